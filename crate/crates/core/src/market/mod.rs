//! The auctioneer's side: XOR acceptance, realized surplus and profit loss,
//! and the transport distance used to bound expected profit loss.

mod wasserstein;

pub use wasserstein::{
    check_wasserstein_bound, transport_distance, wasserstein_distance, BoundReport, DiscreteMeasure,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{Agent, AgentError, PowerProfile};
use crate::bids::{BidError, CandidateSet, ExclusiveGroup};
use crate::scenarios::ScenarioError;
use crate::solver::SolverError;

#[derive(Debug, Error)]
pub enum MarketError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Bid(#[from] BidError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> MarketError {
    MarketError::Invalid(msg.into())
}

/// What the auctioneer accepts from one exclusive group at given prices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClearingOutcome {
    /// Index of the accepted bid in the group; `None` means the zero bid.
    pub accepted: Option<usize>,
    pub profile: PowerProfile,
    /// `<prices, profile>`, EUR.
    pub payment: f64,
    /// Bid price minus payment, EUR; never negative.
    pub surplus: f64,
}

/// Accepts the bid with the largest surplus `price - <prices, profile>`, or
/// nothing if no bid beats the zero bid. Exact ties go to the zero bid, then
/// to the lowest index.
pub fn clear_xor(group: &ExclusiveGroup, prices: &[f64]) -> Result<ClearingOutcome, MarketError> {
    if let Some(periods) = group.periods() {
        if periods != prices.len() {
            return Err(invalid(format!("group has {periods} periods but {} prices were given", prices.len())));
        }
    }
    if let Some(t) = prices.iter().position(|p| !p.is_finite()) {
        return Err(invalid(format!("price in period {t} is not finite")));
    }
    let mut best: Option<(usize, f64)> = None;
    for (b, bid) in group.bids().iter().enumerate() {
        let surplus = bid.surplus(prices);
        if surplus > best.map_or(0.0, |(_, s)| s) {
            best = Some((b, surplus));
        }
    }
    Ok(match best {
        Some((b, surplus)) => {
            let bid = &group.bids()[b];
            ClearingOutcome { accepted: Some(b), profile: bid.profile.clone(), payment: bid.profile.cost(prices), surplus }
        }
        None => ClearingOutcome { accepted: None, profile: PowerProfile::zeros(prices.len()), payment: 0.0, surplus: 0.0 },
    })
}

/// Best surplus over the candidate profiles and the zero profile, each
/// valued at its own valuation.
pub fn restricted_surplus(candidates: &CandidateSet, prices: &[f64]) -> f64 {
    candidates
        .candidates()
        .iter()
        .map(|c| c.valuation() - c.profile().cost(prices))
        .fold(0.0, f64::max)
}

/// Surplus of an unrestricted best response, floored at zero since staying
/// out of the market is always possible.
pub fn unrestricted_surplus(agent: &Agent, prices: &[f64]) -> Result<f64, MarketError> {
    Ok(agent.best_response(prices)?.surplus.max(0.0))
}

/// Profit loss at `prices` from being restricted to `candidates`.
pub fn profit_loss(agent: &Agent, candidates: &CandidateSet, prices: &[f64]) -> Result<f64, MarketError> {
    let best = unrestricted_surplus(agent, prices)?;
    let restricted = restricted_surplus(candidates, prices);
    // the restricted maximum can only exceed the unrestricted one by rounding
    Ok((best - restricted).max(0.0))
}

/// Profit loss at every point, evaluated in parallel.
pub fn profit_losses(agent: &Agent, candidates: &CandidateSet, points: &[Vec<f64>]) -> Result<Vec<f64>, MarketError> {
    points.par_iter().map(|p| profit_loss(agent, candidates, p)).collect()
}

#[cfg(test)]
mod tests;
