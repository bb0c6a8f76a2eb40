//! Agent valuation models and their best-response oracles.
//!
//! Each agent maximizes `v(x) - <lambda, x>` over its feasible power profiles,
//! where `x_t > 0` is consumption from the grid and `x_t < 0` is supply. Three
//! models are provided: a thermal unit-commitment generator, a battery and a
//! district heating utility.

mod battery;
mod config;
mod generator;
mod heat;
mod validate;

pub use battery::BatteryParams;
pub use config::{AgentKind, AgentsConfig};
pub use generator::{CostBlock, ThermalGeneratorParams};
pub use heat::HeatUtilityParams;
pub use validate::verify_result;

use std::ops::Deref;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::solver::{MixedIntegerProgram, Solution, Solver, SolverError, Status};

/// Absolute tolerance under which a surplus counts as zero for tie-breaking.
const ZERO_SURPLUS_TOL: f64 = 1e-6;
/// Branch-and-bound gap used by every agent MILP.
const AGENT_GAP: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("invalid agent parameters: {0}")]
    Invalid(String),
    #[error("price vector has {got} periods, expected {expected}")]
    PriceLength { expected: usize, got: usize },
    #[error("price vector contains a non-finite entry at period {0}")]
    NonFinitePrice(usize),
    #[error("best-response model is infeasible")]
    Infeasible,
    #[error("schedule check failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("cannot read agent config: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse agent config: {0}")]
    Parse(#[from] toml::de::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> AgentError {
    AgentError::Invalid(msg.into())
}

/// Grid power per period in MW; positive is consumption, negative is supply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PowerProfile(Vec<f64>);

impl PowerProfile {
    pub fn new(values: Vec<f64>) -> Result<Self, AgentError> {
        if let Some(t) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("profile entry {t} is not finite")));
        }
        Ok(Self(values))
    }

    pub fn zeros(periods: usize) -> Self {
        Self(vec![0.0; periods])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Payment `<lambda, x>` in euros.
    pub fn cost(&self, prices: &[f64]) -> f64 {
        self.0.iter().zip(prices).map(|(x, p)| x * p).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Entry-wise comparison with absolute tolerance `tol`.
    pub fn approx_eq(&self, other: &PowerProfile, tol: f64) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| (a - b).abs() <= tol)
    }
}

impl Deref for PowerProfile {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Decisions behind a best response, enough to re-check feasibility without a solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Schedule {
    Generator {
        /// Commitment state per period.
        commitment: Vec<bool>,
        /// Output per period and cost block, MW.
        block_output: Vec<Vec<f64>>,
    },
    Battery {
        charge: Vec<f64>,
        discharge: Vec<f64>,
        /// `true` while the charging side is enabled.
        charging_mode: Vec<bool>,
        state_of_charge: Vec<f64>,
    },
    Heat {
        electric: Vec<f64>,
        gas: Vec<f64>,
        curtailed: Vec<f64>,
        charge: Vec<f64>,
        discharge: Vec<f64>,
        storage: Vec<f64>,
    },
}

/// Best-response profile, its valuation and surplus, and the certifying schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValuationResult {
    pub profile: PowerProfile,
    pub valuation: f64,
    pub surplus: f64,
    pub schedule: Schedule,
}

/// One of the three agent models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Agent {
    Generator(ThermalGeneratorParams),
    Battery(BatteryParams),
    Heat(HeatUtilityParams),
}

impl Agent {
    pub fn kind(&self) -> AgentKind {
        match self {
            Agent::Generator(_) => AgentKind::Generator,
            Agent::Battery(_) => AgentKind::Battery,
            Agent::Heat(_) => AgentKind::Heat,
        }
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        match self {
            Agent::Generator(p) => p.validate(),
            Agent::Battery(p) => p.validate(),
            Agent::Heat(p) => p.validate(),
        }
    }

    /// Number of periods the model is tied to, if any (the heat load fixes it).
    pub fn fixed_horizon(&self) -> Option<usize> {
        match self {
            Agent::Heat(p) => Some(p.heat_load.len()),
            _ => None,
        }
    }

    /// Same agent restricted to the first `periods` hours.
    pub fn truncated(&self, periods: usize) -> Agent {
        match self {
            Agent::Heat(p) => Agent::Heat(p.truncated(periods)),
            other => other.clone(),
        }
    }

    /// Surplus-maximizing profile at `prices`. When the best surplus is zero
    /// and the zero profile is feasible, the zero profile is returned.
    pub fn best_response(&self, prices: &[f64]) -> Result<ValuationResult, AgentError> {
        self.best_response_with(prices, &Solver::default())
    }

    pub fn best_response_with(&self, prices: &[f64], solver: &Solver) -> Result<ValuationResult, AgentError> {
        self.validate()?;
        check_prices(prices, self.fixed_horizon())?;
        let best = self.solve(prices, false, solver)?.ok_or(AgentError::Infeasible)?;
        if best.surplus.abs() > ZERO_SURPLUS_TOL || best.profile.is_zero() {
            return Ok(best);
        }
        match self.solve(prices, true, solver)? {
            Some(zero) if zero.surplus >= best.surplus - ZERO_SURPLUS_TOL => Ok(zero),
            _ => Ok(best),
        }
    }

    fn solve(&self, prices: &[f64], zero_profile: bool, solver: &Solver) -> Result<Option<ValuationResult>, AgentError> {
        match self {
            Agent::Generator(p) => {
                let (mip, layout) = p.model(prices, zero_profile);
                Ok(solve_model(&mip, solver)?.map(|sol| p.extract(prices, &layout, &sol)))
            }
            Agent::Battery(p) => {
                let (mip, layout) = p.model(prices, zero_profile);
                Ok(solve_model(&mip, solver)?.map(|sol| p.extract(prices, &layout, &sol)))
            }
            Agent::Heat(p) => {
                let offset = p.gas_only_value(solver)?;
                let (mip, layout) = p.model(prices, zero_profile);
                Ok(solve_model(&mip, solver)?.map(|sol| p.extract(prices, &layout, &sol, offset)))
            }
        }
    }

    /// Upper bound `2 * sqrt(sum_t c_t^2)` on the diameter of the feasible
    /// profile set, where `c_t` caps `|x_t|`.
    pub fn valuation_norm_bound(&self, periods: usize) -> f64 {
        let cap = match self {
            Agent::Generator(p) => p.capacity(),
            Agent::Battery(p) => p.max_charge.max(p.max_discharge),
            Agent::Heat(p) => p.electric_capacity,
        };
        2.0 * (periods as f64 * cap * cap).sqrt()
    }
}

pub(crate) fn check_prices(prices: &[f64], expected: Option<usize>) -> Result<(), AgentError> {
    if let Some(expected) = expected {
        if prices.len() != expected {
            return Err(AgentError::PriceLength { expected, got: prices.len() });
        }
    }
    if prices.is_empty() {
        return Err(AgentError::PriceLength { expected: expected.unwrap_or(1), got: 0 });
    }
    if let Some(t) = prices.iter().position(|p| !p.is_finite()) {
        return Err(AgentError::NonFinitePrice(t));
    }
    Ok(())
}

fn solve_model(mip: &MixedIntegerProgram, solver: &Solver) -> Result<Option<Solution>, AgentError> {
    let sol = solver.solve_milp(mip, AGENT_GAP)?;
    match sol.status {
        Status::Optimal => Ok(Some(sol)),
        Status::Infeasible => Ok(None),
        Status::Unbounded => Err(SolverError::Numerical("agent model reported unbounded".into()).into()),
    }
}

/// Rounds values within `1e-9` of zero or of `bound` onto them.
pub(crate) fn snap(v: f64, bound: f64) -> f64 {
    if v.abs() <= 1e-9 {
        0.0
    } else if (v - bound).abs() <= 1e-9 * bound.abs().max(1.0) {
        bound
    } else {
        v
    }
}
