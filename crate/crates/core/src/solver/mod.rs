//! Exact LP and MILP engine.
//!
//! [`Solver::solve_lp`] runs a bounded revised simplex (Dantzig pricing with a
//! Bland fallback once degenerate pivots stall); [`Solver::solve_milp`] wraps
//! it in best-bound branch-and-bound with most-fractional branching. Solver
//! instances only carry [`Settings`] and can be used from any thread.

mod bnb;
mod factor;
mod lp_format;
mod model;
mod simplex;

pub use lp_format::write_lp_format;
pub use model::{Comparator, LinearProgram, MixedIntegerProgram, Row, Sense, Solution, Status, VarKind};

pub(crate) use simplex::{Basis, VarState};
use simplex::{LpOutcome, Simplex, SparseMatrix};
use thiserror::Error;

/// Numerical tolerances and limits shared by every solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    /// Allowed bound and row violation of a reported point.
    pub feasibility_tol: f64,
    /// Distance from an integer below which a value counts as integral.
    pub integrality_tol: f64,
    /// Relative reduced-cost tolerance for optimality.
    pub optimality_tol: f64,
    /// Relative tolerance used when comparing objective values.
    pub duality_gap_tol: f64,
    /// Smallest pivot magnitude accepted by the ratio test.
    pub pivot_tol: f64,
    /// Iterations without objective progress before the bounds are shifted
    /// to break degeneracy; ten times as many after that switch to Bland's rule.
    pub stall_threshold: usize,
    /// Basis updates between refactorizations.
    pub refactor_interval: usize,
    /// Simplex iteration cap per LP; `None` scales with problem size.
    pub max_iterations: Option<usize>,
    /// Branch-and-bound node cap.
    pub max_nodes: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-7,
            integrality_tol: 1e-6,
            optimality_tol: 1e-9,
            duality_gap_tol: 1e-6,
            pivot_tol: 1e-9,
            stall_threshold: 100,
            refactor_interval: 64,
            max_iterations: None,
            max_nodes: 200_000,
        }
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid program: {0}")]
    Invalid(String),
    #[error("simplex iteration limit reached after {iterations} iterations")]
    IterationLimit { iterations: usize },
    #[error("node limit reached after {nodes} nodes (best bound {best_bound}, incumbent {})",
        .incumbent.as_ref().map_or("none".to_string(), |s| s.objective.to_string()))]
    NodeLimit { nodes: usize, best_bound: f64, incumbent: Option<Box<Solution>> },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl SolverError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        SolverError::Invalid(msg.into())
    }
}

/// Stateless solver front-end.
#[derive(Debug, Clone, Default)]
pub struct Solver {
    pub settings: Settings,
}

impl Solver {
    pub fn new(settings: Settings) -> Self {
        Self { settings }
    }

    /// Solves a linear program. The returned solution carries row duals when
    /// optimal.
    pub fn solve_lp(&self, lp: &LinearProgram) -> Result<Solution, SolverError> {
        lp.validate()?;
        let matrix = SparseMatrix::from_lp(lp);
        let res = Simplex::new(&matrix, lp.sense, &lp.objective, &lp.lower, &lp.upper, &self.settings).solve(None)?;
        Ok(lp_solution(lp, res))
    }

    /// [`Solver::solve_lp`] started from `warm` (statuses of every structural
    /// then every slack column), also returning the final basis.
    pub(crate) fn solve_lp_warm(&self, lp: &LinearProgram, warm: Option<&Basis>) -> Result<(Solution, Basis), SolverError> {
        lp.validate()?;
        let matrix = SparseMatrix::from_lp(lp);
        let res = Simplex::new(&matrix, lp.sense, &lp.objective, &lp.lower, &lp.upper, &self.settings).solve(warm)?;
        let basis = res.basis.clone();
        Ok((lp_solution(lp, res), basis))
    }

    /// Solves a mixed-integer program to within `gap_tolerance` (absolute) of
    /// the integer optimum.
    pub fn solve_milp(&self, mip: &MixedIntegerProgram, gap_tolerance: f64) -> Result<Solution, SolverError> {
        mip.validate()?;
        if !(gap_tolerance >= 0.0) {
            return Err(SolverError::invalid("gap tolerance must be a nonnegative number"));
        }
        bnb::branch_and_bound(mip, gap_tolerance, &self.settings)
    }
}

/// Solves `lp` with default settings.
pub fn solve_lp(lp: &LinearProgram) -> Result<Solution, SolverError> {
    Solver::default().solve_lp(lp)
}

/// Solves `mip` with default settings.
pub fn solve_milp(mip: &MixedIntegerProgram, gap_tolerance: f64) -> Result<Solution, SolverError> {
    Solver::default().solve_milp(mip, gap_tolerance)
}

fn lp_solution(lp: &LinearProgram, res: simplex::LpResult) -> Solution {
    match res.outcome {
        LpOutcome::Optimal => {
            let duals = match lp.sense {
                Sense::Maximize => res.duals.iter().map(|y| -y).collect(),
                Sense::Minimize => res.duals,
            };
            Solution {
                status: Status::Optimal,
                objective: lp.objective_value(&res.x),
                x: res.x,
                duals: Some(duals),
                iterations: res.iterations,
                nodes: 0,
            }
        }
        LpOutcome::Infeasible => Solution::without_point(Status::Infeasible, res.iterations, 0),
        LpOutcome::Unbounded => Solution::without_point(Status::Unbounded, res.iterations, 0),
    }
}

#[cfg(test)]
mod tests;
