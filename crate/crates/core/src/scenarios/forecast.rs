//! Hour-wise autoregressive point forecaster.

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{invalid, PriceHistory, ScenarioError};

/// Forecaster settings. For each hour the price is regressed on an intercept
/// and the same hour of the previous `lags` days, fitted by least squares on
/// every prior day. With fewer than `fit_history` prior days the forecast is
/// the previous day's prices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForecastConfig {
    pub lags: usize,
    pub min_history: usize,
    pub fit_history: usize,
}

impl Default for ForecastConfig {
    fn default() -> Self {
        Self { lags: 7, min_history: 8, fit_history: 30 }
    }
}

/// A past point forecast next to the prices that were then realized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastRecord {
    pub date: NaiveDate,
    pub forecast: Vec<f64>,
    pub actual: Vec<f64>,
}

impl ForecastRecord {
    /// `forecast - actual` per period.
    pub fn residual(&self) -> Vec<f64> {
        self.forecast.iter().zip(&self.actual).map(|(f, a)| f - a).collect()
    }
}

impl ForecastConfig {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.lags == 0 {
            return Err(invalid("forecaster needs at least one lag"));
        }
        if self.min_history == 0 {
            return Err(invalid("minimum history must be at least one day"));
        }
        if self.fit_history <= self.lags + 1 {
            return Err(invalid(format!(
                "fit threshold {} leaves no degrees of freedom for {} lags",
                self.fit_history, self.lags
            )));
        }
        Ok(())
    }

    /// Forecast for `day` from the days strictly before it.
    pub fn forecast(&self, history: &PriceHistory, day: NaiveDate) -> Result<Vec<f64>, ScenarioError> {
        self.validate()?;
        let n = history.count_before(day);
        if n < self.min_history {
            return Err(ScenarioError::InsufficientHistory { day, required: self.min_history, available: n });
        }
        let last = history.dates()[n - 1];
        if n == history.len() && day.signed_duration_since(last).num_days() > 1 {
            return Err(invalid(format!("{day} is more than one day after the end of the history ({last})")));
        }
        let prices = &history.prices()[..n];
        if n < self.fit_history {
            return Ok(prices[n - 1].clone());
        }
        (0..history.periods()).map(|h| self.fit_hour(prices, h)).collect()
    }

    fn fit_hour(&self, prices: &[Vec<f64>], h: usize) -> Result<f64, ScenarioError> {
        let n = prices.len();
        let rows = n - self.lags;
        let cols = self.lags + 1;
        let x = DMatrix::from_fn(rows, cols, |r, c| if c == 0 { 1.0 } else { prices[r + self.lags - c][h] });
        let y = DVector::from_fn(rows, |r, _| prices[r + self.lags][h]);
        let svd = x.svd(true, true);
        let cutoff = 1e-10 * svd.singular_values.max();
        let beta = svd.solve(&y, cutoff).map_err(|e| ScenarioError::Fit(e.to_string()))?;
        let mut pred = beta[0];
        for lag in 1..=self.lags {
            pred += beta[lag] * prices[n - lag][h];
        }
        Ok(pred)
    }
}

/// Forecast for `day` with the default configuration.
pub fn point_forecast(history: &PriceHistory, day: NaiveDate) -> Result<Vec<f64>, ScenarioError> {
    ForecastConfig::default().forecast(history, day)
}

/// Point forecasts for history days `[start, end)` (by position), each made
/// only from the days before it and paired with the realized prices.
pub fn backtest_forecasts(
    history: &PriceHistory,
    config: &ForecastConfig,
    start: usize,
    end: usize,
) -> Result<Vec<ForecastRecord>, ScenarioError> {
    if end > history.len() || start > end {
        return Err(invalid(format!("day range {start}..{end} is outside a history of {} days", history.len())));
    }
    (start..end)
        .map(|i| {
            let (date, actual) = history.day(i);
            Ok(ForecastRecord { date, forecast: config.forecast(history, date)?, actual: actual.to_vec() })
        })
        .collect()
}
