//! Order-1 Wasserstein distance between finite price distributions and the
//! expected-profit-loss bound built on it.

use serde::{Deserialize, Serialize};

use super::{invalid, profit_losses, MarketError};
use crate::agents::Agent;
use crate::bids::enumerate_candidates;
use crate::scenarios::ScenarioSet;
use crate::solver::{Comparator, LinearProgram, Sense, Solver};

const PROBABILITY_TOL: f64 = 1e-9;
/// Closed form and transport program must agree this closely.
const CROSS_CHECK_TOL: f64 = 1e-8;

/// Finitely supported probability measure on price vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    points: Vec<Vec<f64>>,
    probabilities: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(points: Vec<Vec<f64>>, probabilities: Vec<f64>) -> Result<Self, MarketError> {
        if points.is_empty() {
            return Err(invalid("a measure needs at least one support point"));
        }
        if points.len() != probabilities.len() {
            return Err(invalid(format!("{} points but {} probabilities", points.len(), probabilities.len())));
        }
        let dim = points[0].len();
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(invalid(format!("point {i} has dimension {}, expected {dim}", p.len())));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(invalid(format!("point {i} has a non-finite coordinate")));
            }
        }
        if let Some(i) = probabilities.iter().position(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(invalid(format!("probability {i} is negative or not finite")));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_TOL {
            return Err(invalid(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { points, probabilities })
    }

    /// Equal weight on every point.
    pub fn uniform(points: Vec<Vec<f64>>) -> Result<Self, MarketError> {
        let n = points.len().max(1);
        Self::new(points, vec![1.0 / n as f64; n])
    }

    /// All mass on one point.
    pub fn degenerate(point: Vec<f64>) -> Result<Self, MarketError> {
        Self::new(vec![point], vec![1.0])
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The single support point when all mass sits on one location.
    fn atom(&self) -> Option<&[f64]> {
        let first = &self.points[0];
        let single = self
            .points
            .iter()
            .zip(&self.probabilities)
            .all(|(p, &w)| w == 0.0 || p == first);
        single.then_some(first.as_slice())
    }
}

impl From<&ScenarioSet> for DiscreteMeasure {
    fn from(set: &ScenarioSet) -> Self {
        Self { points: set.prices().to_vec(), probabilities: set.probabilities().to_vec() }
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn check_dims(p: &DiscreteMeasure, q: &DiscreteMeasure) -> Result<(), MarketError> {
    if p.dim() != q.dim() {
        return Err(invalid(format!("measures live in dimensions {} and {}", p.dim(), q.dim())));
    }
    Ok(())
}

/// Distance by solving the transport program over couplings of `p` and `q`.
pub fn transport_distance(p: &DiscreteMeasure, q: &DiscreteMeasure) -> Result<f64, MarketError> {
    check_dims(p, q)?;
    let (n, m) = (p.len(), q.len());
    let mut lp = LinearProgram::new(Sense::Minimize);
    let mut vars = vec![vec![0usize; m]; n];
    for i in 0..n {
        for j in 0..m {
            vars[i][j] = lp.add_var(0.0, f64::INFINITY, euclidean(&p.points[i], &q.points[j]));
        }
    }
    for i in 0..n {
        lp.add_row((0..m).map(|j| (vars[i][j], 1.0)).collect(), Comparator::Eq, p.probabilities[i]);
    }
    // the last column constraint follows from the others and the unit totals
    for j in 0..m.saturating_sub(1) {
        lp.add_row((0..n).map(|i| (vars[i][j], 1.0)).collect(), Comparator::Eq, q.probabilities[j]);
    }
    let sol = Solver::default().solve_lp(&lp)?;
    if !sol.is_optimal() {
        return Err(MarketError::Internal(format!("transport program ended {:?}", sol.status)));
    }
    Ok(sol.objective.max(0.0))
}

/// Order-1 Wasserstein distance with Euclidean ground cost. When either
/// measure is a single atom the distance is the mean distance to it, and that
/// closed form is checked against the transport program.
pub fn wasserstein_distance(p: &DiscreteMeasure, q: &DiscreteMeasure) -> Result<f64, MarketError> {
    check_dims(p, q)?;
    let (spread, atom) = match (p.atom(), q.atom()) {
        (_, Some(a)) => (p, a),
        (Some(a), None) => (q, a),
        (None, None) => return transport_distance(p, q),
    };
    let closed: f64 = spread.points.iter().zip(&spread.probabilities).map(|(x, w)| w * euclidean(x, atom)).sum();
    let program = transport_distance(p, q)?;
    if (closed - program).abs() > CROSS_CHECK_TOL * (1.0 + closed.abs()) {
        return Err(MarketError::Internal(format!(
            "closed-form distance {closed} disagrees with the transport program {program}"
        )));
    }
    Ok(closed)
}

/// Outcome of checking `E[Gamma] <= L * d_W`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    #[serde(rename = "E_gamma")]
    pub expected_loss: f64,
    #[serde(rename = "L")]
    pub lipschitz: f64,
    #[serde(rename = "d_W")]
    pub distance: f64,
    #[serde(rename = "L_times_dW")]
    pub bound: f64,
    pub holds: bool,
}

/// Builds the agent's candidates on `q` (all of them, one per scenario),
/// then compares the expected profit loss under `p` with `L * d_W(p, q)`.
pub fn check_wasserstein_bound(agent: &Agent, p: &DiscreteMeasure, q: &ScenarioSet) -> Result<BoundReport, MarketError> {
    let q_measure = DiscreteMeasure::from(q);
    check_dims(p, &q_measure)?;
    let candidates = enumerate_candidates(agent, q)?;
    let losses = profit_losses(agent, &candidates, p.points())?;
    let expected_loss: f64 = losses.iter().zip(p.probabilities()).map(|(g, w)| w * g).sum();
    let lipschitz = agent.valuation_norm_bound(p.dim());
    let distance = wasserstein_distance(p, &q_measure)?;
    let bound = lipschitz * distance;
    // floating-point slack only; both sides are sums of nonnegative terms
    let holds = expected_loss <= bound + 1e-9 * (1.0 + bound.abs());
    Ok(BoundReport { expected_loss, lipschitz, distance, bound, holds })
}
