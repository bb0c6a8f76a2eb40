//! Best responses of the three case-study agents to one day of prices.

use std::error::Error;

use xorbid::agents::{verify_result, AgentKind, AgentsConfig};

fn main() -> Result<(), Box<dyn Error>> {
    // cheap night, expensive evening
    let prices: Vec<f64> = (0..24)
        .map(|h| match h {
            0..=5 => 35.0,
            6..=16 => 80.0,
            17..=20 => 160.0,
            _ => 60.0,
        })
        .collect();
    let agents = AgentsConfig::table1();
    for kind in AgentKind::ALL {
        let agent = agents.agent(kind)?;
        let r = agent.best_response(&prices)?;
        verify_result(&agent, &prices, &r, 1e-7)?;
        let profile: Vec<String> = r.profile.iter().map(|x| format!("{x:.0}")).collect();
        println!("{kind}: surplus {:.1} EUR, valuation {:.1} EUR", r.surplus, r.valuation);
        println!("  profile MW [{}]", profile.join(" "));
    }
    Ok(())
}
