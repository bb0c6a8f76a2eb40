//! Candidate packages from scenarios, then a few ways of choosing B of them.

use std::error::Error;

use xorbid::agents::{AgentKind, AgentsConfig};
use xorbid::bids::{
    enumerate_candidates, heuristic_ii, select_bids_bruteforce, select_bids_cvar, select_bids_lp, UtilityMatrix,
};
use xorbid::experiments::{generate_synthetic_prices, SynthConfig};
use xorbid::scenarios::ScenarioSet;

fn main() -> Result<(), Box<dyn Error>> {
    let history = generate_synthetic_prices(3, 12, 24, &SynthConfig::default())?;
    let scenarios = ScenarioSet::uniform(history.prices().to_vec())?;
    let agent = AgentsConfig::table1().agent(AgentKind::Battery)?;
    let candidates = enumerate_candidates(&agent, &scenarios)?;
    let u = UtilityMatrix::new(&candidates, &scenarios);
    println!("{} scenarios, {} distinct candidates", scenarios.len(), candidates.len());

    for limit in [1, 2, 3] {
        let lp = select_bids_lp(&u, limit)?;
        let exact = select_bids_bruteforce(&u, limit)?;
        println!(
            "B = {limit}: picked {:?} worth {:.2} ({:?}, relaxation {:.2}); enumeration {:.2}",
            lp.indices, lp.objective, lp.path, lp.relaxation, exact.objective
        );
    }
    for beta in [0.0, 0.5, 0.9] {
        let c = select_bids_cvar(&u, 2, beta)?;
        println!("CVaR beta = {beta}: picked {:?}, CVaR {:.2}, expected {:.2}", c.indices, c.cvar, c.expected);
    }

    let outcome = heuristic_ii(&agent, &scenarios, 3)?;
    println!("submitted group of {} bids, in-sample expected surplus {:.2}", outcome.group.len(), outcome.expected_surplus);
    for bid in outcome.group.bids() {
        println!("  price {:>8.2} EUR for {:?}", bid.price, bid.profile.iter().map(|x| x.round()).collect::<Vec<_>>());
    }
    Ok(())
}
