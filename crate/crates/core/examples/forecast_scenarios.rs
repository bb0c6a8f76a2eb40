//! Point forecast for one day, scenarios from past residuals, and tightening
//! the scenarios towards the realized prices.

use std::error::Error;

use xorbid::experiments::{generate_synthetic_prices, SynthConfig};
use xorbid::scenarios::{backtest_forecasts, generate_scenarios, tighten_scenarios, ForecastConfig};

fn main() -> Result<(), Box<dyn Error>> {
    let history = generate_synthetic_prices(7, 90, 24, &SynthConfig::default())?;
    let records = backtest_forecasts(&history, &ForecastConfig::default(), 30, 90)?;
    let today = records.last().unwrap();
    let past = &records[records.len() - 10..records.len() - 1];
    let set = generate_scenarios(&today.forecast, past, 10)?;

    println!("day {}", today.date);
    println!("hour  forecast  actual   scenario range");
    for h in [3, 8, 13, 19] {
        let column: Vec<f64> = set.prices().iter().map(|s| s[h]).collect();
        let lo = column.iter().copied().fold(f64::MAX, f64::min);
        let hi = column.iter().copied().fold(f64::MIN, f64::max);
        println!("{:>4}  {:>8.1}  {:>6.1}   {lo:.1} .. {hi:.1}", h + 1, today.forecast[h], today.actual[h]);
    }
    for a in [0.0, 0.5, 1.0] {
        let tight = tighten_scenarios(&set, &today.actual, a)?;
        println!("a = {a:.1}: mean distance to actual {:.2}", tight.mean_distance_to(&today.actual));
    }
    Ok(())
}
