//! TOML experiment configuration.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::synth::{generate_synthetic_prices, SynthConfig};
use super::{invalid, ExperimentError};
use crate::agents::{Agent, AgentKind, AgentsConfig};
use crate::scenarios::{ForecastConfig, PriceHistory};

/// Where the price history comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceSource {
    /// CSV file in `date,h01,..` form.
    pub history: Option<PathBuf>,
    /// Seed for a synthetic history, used when no file is given.
    pub synthetic_seed: Option<u64>,
    #[serde(default = "default_synthetic_days")]
    pub synthetic_days: usize,
    #[serde(default = "default_periods")]
    pub periods: usize,
    #[serde(default)]
    pub synthetic: SynthConfig,
}

fn default_synthetic_days() -> usize {
    365
}

fn default_periods() -> usize {
    24
}

/// Which days to evaluate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DaySelection {
    /// Explicit dates; takes precedence over sampling.
    pub dates: Option<Vec<NaiveDate>>,
    /// Number of days drawn without replacement from the eligible ones.
    pub sample: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

/// The swept quantity; exactly one list must be given.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxes {
    pub bids: Option<Vec<usize>>,
    pub scenarios: Option<Vec<usize>>,
    pub tightening: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Bids,
    Scenarios,
    Tightening,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Bids => "bids",
            SweepAxis::Scenarios => "scenarios",
            SweepAxis::Tightening => "tightening",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub agents: Vec<AgentKind>,
    /// Agent parameter file; the case-study parameters when absent.
    pub agent_params: Option<PathBuf>,
    pub prices: PriceSource,
    pub days: DaySelection,
    pub sweep: SweepAxes,
    /// Bid limit where bids are not swept.
    #[serde(default = "default_bid_limit")]
    pub bid_limit: usize,
    /// Scenario count where scenarios are not swept.
    #[serde(default = "default_scenario_count")]
    pub scenario_count: usize,
    /// Tightening toward the realized prices where it is not swept.
    #[serde(default)]
    pub tightening: f64,
    #[serde(default)]
    pub forecast: ForecastConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_bid_limit() -> usize {
    24
}

fn default_scenario_count() -> usize {
    150
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ExperimentError> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a config file. A relative `history`, `agent_params` or
    /// `output_dir` is taken relative to the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ExperimentError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let mut config: Self = toml::from_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let anchor = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = config.prices.history.as_mut() {
            anchor(p);
        }
        if let Some(p) = config.agent_params.as_mut() {
            anchor(p);
        }
        anchor(&mut config.output_dir);
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> Result<String, ExperimentError> {
        toml::to_string(self).map_err(|e| invalid(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.agents.is_empty() {
            return Err(invalid("at least one agent must be listed"));
        }
        self.axis()?;
        if self.bid_limit == 0 || self.scenario_count == 0 {
            return Err(invalid("bid limit and scenario count must be at least 1"));
        }
        if let Some(b) = &self.sweep.bids {
            if b.is_empty() || b.contains(&0) {
                return Err(invalid("swept bid limits must be a non-empty list of values >= 1"));
            }
        }
        if let Some(s) = &self.sweep.scenarios {
            if s.is_empty() || s.contains(&0) {
                return Err(invalid("swept scenario counts must be a non-empty list of values >= 1"));
            }
        }
        let in_unit = |a: f64| (0.0..=1.0).contains(&a);
        if let Some(a) = &self.sweep.tightening {
            if a.is_empty() || !a.iter().copied().all(in_unit) {
                return Err(invalid("swept tightening factors must be a non-empty list in [0, 1]"));
            }
        }
        if !in_unit(self.tightening) {
            return Err(invalid(format!("tightening factor must lie in [0, 1], got {}", self.tightening)));
        }
        match (&self.prices.history, self.prices.synthetic_seed) {
            (Some(_), Some(_)) => return Err(invalid("give either a price history file or a synthetic seed, not both")),
            (None, None) => return Err(invalid("give a price history file or a synthetic seed")),
            _ => {}
        }
        if self.prices.synthetic_days == 0 || self.prices.periods == 0 {
            return Err(invalid("synthetic history needs at least one day and one period"));
        }
        self.prices.synthetic.validate()?;
        match (&self.days.dates, self.days.sample) {
            (Some(d), _) if d.is_empty() => return Err(invalid("the day list is empty")),
            (None, None) => return Err(invalid("give a list of dates or a sample size")),
            (None, Some(0)) => return Err(invalid("day sample size must be at least 1")),
            _ => {}
        }
        self.forecast.validate()?;
        Ok(())
    }

    /// The single swept axis.
    pub fn axis(&self) -> Result<SweepAxis, ExperimentError> {
        let given: Vec<SweepAxis> = [
            (self.sweep.bids.is_some(), SweepAxis::Bids),
            (self.sweep.scenarios.is_some(), SweepAxis::Scenarios),
            (self.sweep.tightening.is_some(), SweepAxis::Tightening),
        ]
        .into_iter()
        .filter_map(|(set, axis)| set.then_some(axis))
        .collect();
        match given.as_slice() {
            [axis] => Ok(*axis),
            [] => Err(invalid("no sweep axis given; set exactly one of bids, scenarios, tightening")),
            _ => Err(invalid("more than one sweep axis given; set exactly one of bids, scenarios, tightening")),
        }
    }

    pub fn load_history(&self) -> Result<PriceHistory, ExperimentError> {
        match (&self.prices.history, self.prices.synthetic_seed) {
            (Some(path), _) => Ok(PriceHistory::load(path)?),
            (None, Some(seed)) => {
                generate_synthetic_prices(seed, self.prices.synthetic_days, self.prices.periods, &self.prices.synthetic)
            }
            (None, None) => Err(invalid("no price source configured")),
        }
    }

    pub fn load_agents(&self) -> Result<Vec<Agent>, ExperimentError> {
        let params = match &self.agent_params {
            Some(path) => AgentsConfig::load(path)?,
            None => AgentsConfig::table1(),
        };
        Ok(self.agents.iter().map(|&k| params.agent(k)).collect::<Result<_, _>>()?)
    }
}
