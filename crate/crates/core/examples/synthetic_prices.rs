//! Generate a synthetic price year and write it as a history CSV.

use std::error::Error;

use xorbid::experiments::{generate_synthetic_prices, SynthConfig};

fn main() -> Result<(), Box<dyn Error>> {
    let history = generate_synthetic_prices(2023, 365, 24, &SynthConfig::default())?;
    let all: Vec<f64> = history.prices().iter().flatten().copied().collect();
    let mean = all.iter().sum::<f64>() / all.len() as f64;
    let negative = all.iter().filter(|&&p| p < 0.0).count();
    let max = all.iter().copied().fold(f64::MIN, f64::max);
    println!("{} days, mean {mean:.1} EUR/MWh, max {max:.1}, {negative} negative hours", history.len());

    let path = std::env::temp_dir().join("xorbid_synthetic_prices.csv");
    history.write_csv(std::fs::File::create(&path)?)?;
    println!("wrote {}", path.display());
    Ok(())
}
