//! Transport distance between a price sample and the bidding scenarios, and the
//! expected profit loss bound built on it.

use std::error::Error;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xorbid::agents::{AgentKind, AgentsConfig};
use xorbid::market::{check_wasserstein_bound, wasserstein_distance, DiscreteMeasure};
use xorbid::scenarios::ScenarioSet;

fn main() -> Result<(), Box<dyn Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let base: Vec<f64> = (0..6).map(|h| 40.0 + 15.0 * h as f64).collect();
    let jitter = |rng: &mut ChaCha8Rng, size: f64| -> Vec<f64> { base.iter().map(|p| p + rng.random_range(-size..size)).collect() };
    let scenarios = ScenarioSet::uniform((0..4).map(|_| jitter(&mut rng, 20.0)).collect())?;
    let agent = AgentsConfig::table1().agent(AgentKind::Battery)?;

    for size in [5.0, 20.0, 60.0] {
        let sample = DiscreteMeasure::uniform((0..15).map(|_| jitter(&mut rng, size)).collect())?;
        let d = wasserstein_distance(&sample, &DiscreteMeasure::from(&scenarios))?;
        let report = check_wasserstein_bound(&agent, &sample, &scenarios)?;
        println!(
            "noise {size:>4.0}: d_W {d:.2}, E[loss] {:.2} <= L * d_W = {:.2} * {:.2} = {:.2}: {}",
            report.expected_loss, report.lipschitz, report.distance, report.bound, report.holds
        );
    }
    Ok(())
}
