//! Experiment configuration, synthetic prices and the evaluation sweeps.

mod config;
mod results;
mod sweep;
mod synth;

pub use config::{DaySelection, ExperimentConfig, PriceSource, SweepAxes, SweepAxis};
pub use results::{achieved_percent, DayFailure, PointSummary, SweepRecord, SweepResult};
pub use sweep::{
    bid_sweep, evaluate_group, run_bid_sweep, run_information_sweep, run_scenario_sweep, run_sweep, scenario_sweep,
    tightening_sweep, DayOutcome, Prepared,
};
pub use synth::{generate_synthetic_prices, SynthConfig};

use thiserror::Error;

use crate::agents::AgentError;
use crate::bids::BidError;
use crate::market::MarketError;
use crate::scenarios::ScenarioError;
use crate::solver::SolverError;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Bid(#[from] BidError),
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
    #[error("all {failures} day evaluations failed; first error: {first}")]
    AllDaysFailed { failures: usize, first: String },
}

pub(crate) fn invalid(msg: impl Into<String>) -> ExperimentError {
    ExperimentError::Invalid(msg.into())
}

impl ExperimentError {
    /// Whether the failure came from an optimization or a consistency check
    /// rather than from bad input.
    pub fn is_solver_failure(&self) -> bool {
        fn agent(e: &AgentError) -> bool {
            matches!(e, AgentError::Solver(_) | AgentError::Infeasible | AgentError::Verification(_))
        }
        fn solver(e: &SolverError) -> bool {
            !matches!(e, SolverError::Invalid(_))
        }
        match self {
            ExperimentError::Agent(e) => agent(e),
            ExperimentError::Bid(BidError::BestResponse { source, .. }) => agent(source),
            ExperimentError::Bid(BidError::Solver(e)) => solver(e),
            ExperimentError::Bid(BidError::Internal(_)) => true,
            ExperimentError::Market(MarketError::Agent(e)) => agent(e),
            ExperimentError::Market(MarketError::Bid(BidError::BestResponse { source, .. })) => agent(source),
            ExperimentError::Market(MarketError::Solver(e)) => solver(e),
            ExperimentError::Market(MarketError::Internal(_)) => true,
            ExperimentError::Internal(_) | ExperimentError::AllDaysFailed { .. } => true,
            _ => false,
        }
    }
}
