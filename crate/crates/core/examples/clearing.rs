//! Clearing an exclusive group at realized prices and the resulting profit loss.

use std::error::Error;

use xorbid::agents::{AgentKind, AgentsConfig};
use xorbid::bids::heuristic_ii;
use xorbid::market::{clear_xor, profit_loss, unrestricted_surplus};
use xorbid::scenarios::ScenarioSet;

fn main() -> Result<(), Box<dyn Error>> {
    let agent = AgentsConfig::table1().agent(AgentKind::Battery)?;
    let evening = |peak: f64| -> Vec<f64> { (0..24).map(|h| if (17..21).contains(&h) { peak } else { 50.0 }).collect() };
    let scenarios = ScenarioSet::uniform(vec![evening(90.0), evening(140.0), evening(60.0)])?;
    let outcome = heuristic_ii(&agent, &scenarios, 2)?;

    for peak in [55.0, 100.0, 200.0] {
        let realized = evening(peak);
        let cleared = clear_xor(&outcome.group, &realized)?;
        let best = unrestricted_surplus(&agent, &realized)?;
        let loss = profit_loss(&agent, &outcome.candidates, &realized)?;
        println!(
            "peak {peak:>5.1}: accepted {:?}, payment {:>8.2}, surplus {:>7.2}, best possible {best:>7.2}, profit loss {loss:.2}",
            cleared.accepted, cleared.payment, cleared.surplus
        );
    }
    Ok(())
}
