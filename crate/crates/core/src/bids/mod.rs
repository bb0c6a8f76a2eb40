//! XOR package-bid construction and selection.
//!
//! Candidates come from best responses to each price scenario. When there are
//! more candidates than allowed bids, a subset is chosen to maximize the
//! expected surplus the auctioneer's acceptance rule would realize, either
//! risk-neutrally ([`select_bids_lp`]) or by CVaR ([`select_bids_cvar`]).

mod group;
mod relax;
mod select;

pub use group::{ExclusiveGroup, PackageBid};
pub use select::{
    heuristic_ii, heuristic_ii_from_candidates, lp_relaxation_value, select_all, select_bids_bruteforce,
    select_bids_cvar, select_bids_lp, CvarSelection, HeuristicOutcome, Selection, SelectionPath, BRUTE_FORCE_LIMIT,
    SELECTION_PIVOT_BUDGET,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{Agent, AgentError, PowerProfile, ValuationResult};
use crate::scenarios::ScenarioSet;
use crate::solver::SolverError;

/// Two candidate profiles closer than this in every period are the same package.
pub const PROFILE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum BidError {
    #[error("best response for scenario {scenario} failed: {source}")]
    BestResponse { scenario: usize, source: AgentError },
    #[error("{count} candidates exceed the bid limit {limit}")]
    TooManyCandidates { count: usize, limit: usize },
    #[error("brute force would enumerate {combinations} subsets, above the limit of {limit}")]
    TooManySubsets { combinations: f64, limit: f64 },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> BidError {
    BidError::Invalid(msg.into())
}

/// A distinct best-response profile and the scenario that first produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub result: ValuationResult,
    pub scenario: usize,
}

impl Candidate {
    pub fn profile(&self) -> &PowerProfile {
        &self.result.profile
    }

    pub fn valuation(&self) -> f64 {
        self.result.valuation
    }
}

/// Pairwise distinct, nonzero candidate packages in scenario order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CandidateSet {
    candidates: Vec<Candidate>,
}

impl CandidateSet {
    /// Builds a set from best responses in scenario order, dropping zero
    /// profiles and later duplicates.
    pub fn from_results(results: Vec<ValuationResult>) -> Self {
        let mut candidates: Vec<Candidate> = Vec::new();
        for (scenario, result) in results.into_iter().enumerate() {
            if result.profile.iter().all(|v| v.abs() <= PROFILE_TOL) {
                continue;
            }
            if candidates.iter().any(|c| c.result.profile.approx_eq(&result.profile, PROFILE_TOL)) {
                continue;
            }
            candidates.push(Candidate { result, scenario });
        }
        Self { candidates }
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn get(&self, k: usize) -> &Candidate {
        &self.candidates[k]
    }
}

/// One best response per scenario, deduplicated, without the zero profile.
/// Scenarios are solved in parallel.
pub fn enumerate_candidates(agent: &Agent, scenarios: &ScenarioSet) -> Result<CandidateSet, BidError> {
    let results: Vec<ValuationResult> = scenarios
        .prices()
        .par_iter()
        .enumerate()
        .map(|(scenario, prices)| agent.best_response(prices).map_err(|source| BidError::BestResponse { scenario, source }))
        .collect::<Result<_, _>>()?;
    Ok(CandidateSet::from_results(results))
}

/// Surplus `U[k][s]` of candidate `k` under scenario `s`, with scenario weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    probabilities: Vec<f64>,
}

impl UtilityMatrix {
    pub fn new(candidates: &CandidateSet, scenarios: &ScenarioSet) -> Self {
        let values = candidates
            .candidates()
            .iter()
            .flat_map(|c| scenarios.prices().iter().map(move |lam| c.valuation() - c.profile().cost(lam)))
            .collect();
        Self { rows: candidates.len(), cols: scenarios.len(), values, probabilities: scenarios.probabilities().to_vec() }
    }

    /// Matrix from explicit rows (candidates) and scenario probabilities.
    pub fn from_rows(rows: Vec<Vec<f64>>, probabilities: Vec<f64>) -> Result<Self, BidError> {
        let cols = probabilities.len();
        if cols == 0 {
            return Err(invalid("utility matrix needs at least one scenario"));
        }
        if let Some(k) = rows.iter().position(|r| r.len() != cols) {
            return Err(invalid(format!("utility row {k} has {} entries, expected {cols}", rows[k].len())));
        }
        if rows.iter().flatten().chain(&probabilities).any(|v| !v.is_finite()) {
            return Err(invalid("utility matrix entries and probabilities must be finite"));
        }
        if probabilities.iter().any(|p| *p < 0.0) || (probabilities.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(invalid("probabilities must be nonnegative and sum to 1"));
        }
        Ok(Self { rows: rows.len(), cols, values: rows.concat(), probabilities })
    }

    /// Number of candidates K.
    pub fn candidates(&self) -> usize {
        self.rows
    }

    /// Number of scenarios S.
    pub fn scenarios(&self) -> usize {
        self.cols
    }

    pub fn get(&self, k: usize, s: usize) -> f64 {
        self.values[k * self.cols + s]
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.cols..(k + 1) * self.cols]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Expected surplus when bidding exactly `selected` and the acceptance
    /// rule picks the best package (or none) in each scenario.
    pub fn expected_surplus(&self, selected: &[usize]) -> f64 {
        (0..self.cols)
            .map(|s| {
                let best = selected.iter().map(|&k| self.get(k, s)).fold(0.0_f64, f64::max);
                self.probabilities[s] * best
            })
            .sum()
    }

    /// Surplus realized in each scenario by bidding `selected`.
    pub fn scenario_surpluses(&self, selected: &[usize]) -> Vec<f64> {
        (0..self.cols).map(|s| selected.iter().map(|&k| self.get(k, s)).fold(0.0_f64, f64::max)).collect()
    }

    /// Same matrix with probabilities multiplied by `factor` and renormalized.
    pub fn rescaled(&self, factor: f64) -> Self {
        let scaled: Vec<f64> = self.probabilities.iter().map(|p| p * factor).collect();
        let total: f64 = scaled.iter().sum();
        Self { probabilities: scaled.iter().map(|p| p / total).collect(), ..self.clone() }
    }
}
