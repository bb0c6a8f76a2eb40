//! A small bid-limit sweep on synthetic prices, summarized per agent.

use std::error::Error;

use xorbid::experiments::{run_bid_sweep, ExperimentConfig};

const CONFIG: &str = r#"
agents = ["generator", "battery", "heat"]
scenario_count = 20

[prices]
synthetic_seed = 2023
synthetic_days = 120

[days]
sample = 5
seed = 1

[sweep]
bids = [1, 2, 5, 20]
"#;

fn main() -> Result<(), Box<dyn Error>> {
    let config = ExperimentConfig::from_toml_str(CONFIG)?;
    let result = run_bid_sweep(&config)?;
    println!("{:<10} {:>4} {:>8} {:>6}", "agent", "B", "mean %", "s.e.");
    for point in result.summary() {
        println!("{:<10} {:>4} {:>8.2} {:>6.2}", point.agent.to_string(), point.sweep_value, point.mean_percent, point.std_error);
    }
    for failure in &result.failures {
        println!("failed: {} on {}: {}", failure.agent, failure.day, failure.message);
    }
    Ok(())
}
