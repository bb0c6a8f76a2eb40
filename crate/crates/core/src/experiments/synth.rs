//! Seeded synthetic day-ahead prices for running the sweeps without market data.

use std::f64::consts::TAU;

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{invalid, ExperimentError};
use crate::scenarios::PriceHistory;

/// Shape and noise of the synthetic price process. Prices are EUR/MWh.
///
/// Each day is a base level plus a seasonal swing, a weekend discount,
/// morning and evening peaks and a midday solar dip that deepens in summer.
/// On top sit an AR(1) day-level disturbance and AR(1) hourly noise, both
/// scaled by `noise`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub start: NaiveDate,
    pub base_level: f64,
    /// Winter-over-summer level difference, peak to trough.
    pub seasonal_swing: f64,
    pub weekend_discount: f64,
    pub morning_peak: f64,
    pub evening_peak: f64,
    /// Depth of the midday dip at midsummer; a fifth of it remains in winter.
    pub solar_dip: f64,
    /// Multiplies every random component; 0 gives the deterministic shape.
    pub noise: f64,
    pub day_persistence: f64,
    pub day_sd: f64,
    pub hour_persistence: f64,
    pub hour_sd: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            start: NaiveDate::from_ymd_opt(2023, 1, 1).expect("valid date"),
            base_level: 95.0,
            seasonal_swing: 40.0,
            weekend_discount: 18.0,
            morning_peak: 22.0,
            evening_peak: 38.0,
            solar_dip: 75.0,
            noise: 1.0,
            day_persistence: 0.7,
            day_sd: 18.0,
            hour_persistence: 0.6,
            hour_sd: 9.0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let finite = [
            self.base_level,
            self.seasonal_swing,
            self.weekend_discount,
            self.morning_peak,
            self.evening_peak,
            self.solar_dip,
            self.noise,
            self.day_sd,
            self.hour_sd,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(invalid("synthetic price settings must be finite"));
        }
        if self.noise < 0.0 || self.day_sd < 0.0 || self.hour_sd < 0.0 {
            return Err(invalid("noise scales must be nonnegative"));
        }
        for (name, rho) in [("day_persistence", self.day_persistence), ("hour_persistence", self.hour_persistence)] {
            if !(rho.abs() < 1.0) {
                return Err(invalid(format!("{name} must lie strictly between -1 and 1, got {rho}")));
            }
        }
        Ok(())
    }

    /// Noise-free price of `date` at fractional hour `hour`.
    fn shape(&self, date: NaiveDate, hour: f64) -> f64 {
        let season = (TAU * (date.ordinal0() as f64 + 10.0) / 365.25).cos(); // 1 in midwinter
        let summer = 0.5 * (1.0 - season);
        let weekend = matches!(date.weekday(), Weekday::Sat | Weekday::Sun);
        let bump = |center: f64, width: f64| (-0.5 * ((hour - center) / width).powi(2)).exp();
        self.base_level + 0.5 * self.seasonal_swing * season - if weekend { self.weekend_discount } else { 0.0 }
            + self.morning_peak * bump(8.0, 1.5)
            + self.evening_peak * bump(19.0, 2.0)
            - self.solar_dip * (0.2 + 0.8 * summer) * bump(13.0, 2.5)
            - 12.0 * bump(3.5, 2.0)
    }
}

/// `days` consecutive days of `periods` prices each, reproducible from `seed`.
pub fn generate_synthetic_prices(
    seed: u64,
    days: usize,
    periods: usize,
    config: &SynthConfig,
) -> Result<PriceHistory, ExperimentError> {
    config.validate()?;
    if days == 0 || periods == 0 {
        return Err(invalid("synthetic history needs at least one day and one period"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let day_shock = Normal::new(0.0, config.day_sd * config.noise).map_err(|e| invalid(e.to_string()))?;
    let hour_shock = Normal::new(0.0, config.hour_sd * config.noise).map_err(|e| invalid(e.to_string()))?;
    let mut level = 0.0;
    let mut hourly = 0.0;
    let mut dates = Vec::with_capacity(days);
    let mut prices = Vec::with_capacity(days);
    for d in 0..days {
        let date = config.start + Duration::days(d as i64);
        level = config.day_persistence * level + day_shock.sample(&mut rng);
        let row = (0..periods)
            .map(|t| {
                hourly = config.hour_persistence * hourly + hour_shock.sample(&mut rng);
                let hour = (t as f64 + 0.5) * 24.0 / periods as f64;
                config.shape(date, hour) + level + hourly
            })
            .collect();
        dates.push(date);
        prices.push(row);
    }
    Ok(PriceHistory::new(dates, prices)?)
}
