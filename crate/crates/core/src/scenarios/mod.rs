//! Price histories, point forecasts and residual-based price scenarios.

mod forecast;
mod history;

pub use forecast::{backtest_forecasts, point_forecast, ForecastConfig, ForecastRecord};
pub use history::PriceHistory;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("forecasting {day} needs at least {required} days of history before it, found {available}")]
    InsufficientHistory { day: NaiveDate, required: usize, available: usize },
    #[error("{scenarios} scenarios need {required} days of past forecast residuals, found {available}")]
    InsufficientResiduals { scenarios: usize, required: usize, available: usize },
    #[error("least-squares fit failed: {0}")]
    Fit(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid(msg.into())
}

/// Weighted set of price vectors (EUR/MWh).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSet {
    prices: Vec<Vec<f64>>,
    probabilities: Vec<f64>,
}

impl ScenarioSet {
    pub fn new(prices: Vec<Vec<f64>>, probabilities: Vec<f64>) -> Result<Self, ScenarioError> {
        if prices.is_empty() {
            return Err(invalid("a scenario set needs at least one scenario"));
        }
        if prices.len() != probabilities.len() {
            return Err(invalid(format!("{} scenarios but {} probabilities", prices.len(), probabilities.len())));
        }
        let periods = prices[0].len();
        if periods == 0 {
            return Err(invalid("scenarios must cover at least one period"));
        }
        for (s, v) in prices.iter().enumerate() {
            if v.len() != periods {
                return Err(invalid(format!("scenario {s} has {} periods, expected {periods}", v.len())));
            }
            if v.iter().any(|p| !p.is_finite()) {
                return Err(invalid(format!("scenario {s} contains a non-finite price")));
            }
        }
        if probabilities.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(invalid("probabilities must be finite and nonnegative"));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { prices, probabilities })
    }

    /// Equally likely scenarios.
    pub fn uniform(prices: Vec<Vec<f64>>) -> Result<Self, ScenarioError> {
        let n = prices.len().max(1);
        Self::new(prices, vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    pub fn periods(&self) -> usize {
        self.prices[0].len()
    }

    pub fn prices(&self) -> &[Vec<f64>] {
        &self.prices
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn scenario(&self, s: usize) -> &[f64] {
        &self.prices[s]
    }

    /// The first `count` scenarios with renormalized probabilities.
    pub fn prefix(&self, count: usize) -> Result<Self, ScenarioError> {
        let count = count.min(self.len());
        let total: f64 = self.probabilities[..count].iter().sum();
        if total <= 0.0 {
            return Err(invalid("prefix carries no probability mass"));
        }
        Self::new(self.prices[..count].to_vec(), self.probabilities[..count].iter().map(|p| p / total).collect())
    }

    /// Expected Euclidean distance of the scenarios to `point`.
    pub fn mean_distance_to(&self, point: &[f64]) -> f64 {
        self.prices
            .iter()
            .zip(&self.probabilities)
            .map(|(v, p)| p * v.iter().zip(point).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
            .sum()
    }
}

/// Builds `scenarios` price vectors from a point forecast and the forecast
/// residuals of earlier days.
///
/// `past` is in chronological order. Scenario 1 is the point forecast;
/// scenario `s >= 2` subtracts the residual `forecast - actual` of the day
/// `s - 1` positions before the target, i.e. `past[past.len() - (s - 1)]`.
/// All scenarios are equally likely.
pub fn generate_scenarios(point: &[f64], past: &[ForecastRecord], scenarios: usize) -> Result<ScenarioSet, ScenarioError> {
    if scenarios == 0 {
        return Err(invalid("scenario count must be at least 1"));
    }
    if point.is_empty() || point.iter().any(|p| !p.is_finite()) {
        return Err(invalid("point forecast must be non-empty and finite"));
    }
    let required = scenarios - 1;
    if past.len() < required {
        return Err(ScenarioError::InsufficientResiduals { scenarios, required, available: past.len() });
    }
    let mut prices = Vec::with_capacity(scenarios);
    prices.push(point.to_vec());
    for back in 1..scenarios {
        let rec = &past[past.len() - back];
        if rec.forecast.len() != point.len() || rec.actual.len() != point.len() {
            return Err(invalid(format!("residual record for {} has the wrong number of periods", rec.date)));
        }
        prices.push((0..point.len()).map(|h| point[h] - (rec.forecast[h] - rec.actual[h])).collect());
    }
    ScenarioSet::uniform(prices)
}

/// Pulls every scenario toward `actual`: `lambda - a * (lambda - actual)`.
pub fn tighten_scenarios(set: &ScenarioSet, actual: &[f64], a: f64) -> Result<ScenarioSet, ScenarioError> {
    if !(0.0..=1.0).contains(&a) {
        return Err(invalid(format!("tightening factor must lie in [0, 1], got {a}")));
    }
    if actual.len() != set.periods() {
        return Err(invalid(format!("actual prices have {} periods, scenarios have {}", actual.len(), set.periods())));
    }
    let prices = set
        .prices
        .iter()
        .map(|v| {
            if a == 1.0 {
                // exact, where `l - (l - r)` may be off by an ulp
                actual.to_vec()
            } else {
                v.iter().zip(actual).map(|(l, r)| l - a * (l - r)).collect()
            }
        })
        .collect();
    ScenarioSet::new(prices, set.probabilities.clone())
}
