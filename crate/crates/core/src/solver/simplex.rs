//! Bounded-variable revised simplex.
//!
//! Every row `a_i x cmp b_i` gets a slack `s_i` with `a_i x + s_i = b_i`, whose
//! bounds encode the comparator. The basis matrix is held as a sparse LU
//! factorization plus product-form updates (see [`Factor`]) and refactored
//! periodically.
//!
//! Phase 1 minimizes the sum of bound violations of the basic variables and
//! is re-entered automatically whenever the current point is infeasible, so a
//! warm start from any basis works.
//!
//! When the objective stops improving, every bound is widened by a small,
//! column-dependent amount so that degenerate ties disappear. The original
//! bounds come back once the shifted program is solved, and the iterations
//! continue from that basis. A second stall falls back to Bland's rule.

use super::model::{Comparator, LinearProgram, Sense};
use super::factor::Factor;
use super::{Settings, SolverError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum VarState {
    Basic,
    AtLower,
    AtUpper,
    Free,
}

/// Basis statuses of all structural and slack columns, reusable as a warm start.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Basis {
    pub states: Vec<VarState>,
}

#[derive(Debug)]
pub(crate) enum LpOutcome {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug)]
pub(crate) struct LpResult {
    pub outcome: LpOutcome,
    /// Structural values.
    pub x: Vec<f64>,
    /// Row duals of the internal minimization form.
    pub duals: Vec<f64>,
    pub iterations: usize,
    pub basis: Basis,
}

/// Immutable column-wise copy of the constraint matrix.
pub(crate) struct SparseMatrix {
    pub m: usize,
    pub n: usize,
    col_start: Vec<usize>,
    col_row: Vec<usize>,
    col_val: Vec<f64>,
    pub rhs: Vec<f64>,
    pub slack_lower: Vec<f64>,
    pub slack_upper: Vec<f64>,
}

impl SparseMatrix {
    pub fn from_lp(lp: &LinearProgram) -> Self {
        let m = lp.rows.len();
        let n = lp.num_vars();
        let mut col_start = vec![0usize; n + 1];
        for row in &lp.rows {
            for &(j, _) in &row.coeffs {
                col_start[j + 1] += 1;
            }
        }
        for j in 0..n {
            col_start[j + 1] += col_start[j];
        }
        let mut fill = col_start.clone();
        let nnz = col_start[n];
        let mut col_row = vec![0usize; nnz];
        let mut col_val = vec![0.0; nnz];
        for (i, row) in lp.rows.iter().enumerate() {
            for &(j, v) in &row.coeffs {
                col_row[fill[j]] = i;
                col_val[fill[j]] = v;
                fill[j] += 1;
            }
        }
        let (slack_lower, slack_upper) = lp
            .rows
            .iter()
            .map(|row| match row.cmp {
                Comparator::Le => (0.0, f64::INFINITY),
                Comparator::Ge => (f64::NEG_INFINITY, 0.0),
                Comparator::Eq => (0.0, 0.0),
            })
            .unzip();
        Self { m, n, col_start, col_row, col_val, rhs: lp.rows.iter().map(|r| r.rhs).collect(), slack_lower, slack_upper }
    }

    #[inline]
    fn col(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.col_start[j]..self.col_start[j + 1];
        self.col_row[range.clone()].iter().copied().zip(self.col_val[range].iter().copied())
    }
}


pub(crate) struct Simplex<'a> {
    a: &'a SparseMatrix,
    settings: &'a Settings,
    n: usize,
    m: usize,
    /// Internal minimization costs of all columns (slacks cost zero).
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    state: Vec<VarState>,
    /// Variable held at each basis position.
    head: Vec<usize>,
    factor: Factor,
    dual_tol: f64,
    /// Original bounds while shifted bounds are in use.
    shifted: Option<(Vec<f64>, Vec<f64>)>,
}

impl<'a> Simplex<'a> {
    pub fn new(a: &'a SparseMatrix, sense: Sense, objective: &[f64], lower: &[f64], upper: &[f64], settings: &'a Settings) -> Self {
        let (m, n) = (a.m, a.n);
        let mut cost = vec![0.0; n + m];
        for j in 0..n {
            cost[j] = match sense {
                Sense::Maximize => -objective[j],
                Sense::Minimize => objective[j],
            };
        }
        let cmax = objective.iter().fold(0.0f64, |acc, c| acc.max(c.abs()));
        let mut lo = lower.to_vec();
        let mut hi = upper.to_vec();
        lo.extend_from_slice(&a.slack_lower);
        hi.extend_from_slice(&a.slack_upper);
        Self {
            a,
            settings,
            n,
            m,
            cost,
            lower: lo,
            upper: hi,
            x: vec![0.0; n + m],
            state: vec![VarState::AtLower; n + m],
            head: Vec::new(),
            factor: Factor::identity(m),
            dual_tol: settings.optimality_tol * (1.0 + cmax),
            shifted: None,
        }
    }

    fn nonbasic_state(&self, j: usize) -> VarState {
        if self.lower[j].is_finite() {
            VarState::AtLower
        } else if self.upper[j].is_finite() {
            VarState::AtUpper
        } else {
            VarState::Free
        }
    }

    fn nonbasic_value(&self, j: usize, st: VarState) -> f64 {
        match st {
            VarState::AtLower if self.lower[j].is_finite() => self.lower[j],
            VarState::AtUpper if self.upper[j].is_finite() => self.upper[j],
            VarState::AtLower | VarState::AtUpper | VarState::Free => {
                if self.lower[j].is_finite() {
                    self.lower[j]
                } else if self.upper[j].is_finite() {
                    self.upper[j]
                } else {
                    0.0
                }
            }
            VarState::Basic => unreachable!(),
        }
    }

    fn cold_start(&mut self) {
        for j in 0..self.n {
            self.state[j] = self.nonbasic_state(j);
            self.x[j] = self.nonbasic_value(j, self.state[j]);
        }
        for i in 0..self.m {
            self.state[self.n + i] = VarState::Basic;
        }
        self.head = (0..self.m).map(|i| self.n + i).collect();
        self.factor = Factor::identity(self.m);
        self.recompute_basics();
    }

    /// Installs a warm-start basis; returns false if it is structurally invalid
    /// or singular.
    fn warm_start(&mut self, basis: &Basis) -> bool {
        if basis.states.len() != self.n + self.m {
            return false;
        }
        let head: Vec<usize> = (0..self.n + self.m).filter(|&j| basis.states[j] == VarState::Basic).collect();
        if head.len() != self.m {
            return false;
        }
        for (j, &st) in basis.states.iter().enumerate() {
            self.state[j] = match st {
                VarState::Basic => VarState::Basic,
                VarState::AtLower if self.lower[j].is_finite() => VarState::AtLower,
                VarState::AtUpper if self.upper[j].is_finite() => VarState::AtUpper,
                _ => self.nonbasic_state(j),
            };
            if self.state[j] != VarState::Basic {
                self.x[j] = self.nonbasic_value(j, self.state[j]);
            }
        }
        self.head = head;
        if self.refactor().is_err() {
            return false;
        }
        self.recompute_basics();
        true
    }

    fn refactor(&mut self) -> Result<(), SolverError> {
        let columns: Vec<Vec<(usize, f64)>> = self
            .head
            .iter()
            .map(|&j| if j < self.n { self.a.col(j).collect() } else { vec![(j - self.n, 1.0)] })
            .collect();
        self.factor = Factor::new(self.m, &columns)?;
        Ok(())
    }

    /// Representation of column `q` in the current basis, indexed by position.
    fn ftran_column(&self, q: usize) -> Vec<f64> {
        let mut rhs = vec![0.0; self.m];
        if q < self.n {
            for (i, v) in self.a.col(q) {
                rhs[i] = v;
            }
        } else {
            rhs[q - self.n] = 1.0;
        }
        self.factor.ftran(&mut rhs);
        rhs
    }

    /// Solves `y' B = c_B'` where `cost_of` gives the cost of each basic variable.
    fn btran(&self, cost_of: &dyn Fn(usize) -> f64) -> Vec<f64> {
        let mut c: Vec<f64> = self.head.iter().map(|&j| cost_of(j)).collect();
        self.factor.btran(&mut c);
        c
    }

    /// Recomputes basic values from the nonbasic ones.
    fn recompute_basics(&mut self) {
        let mut rhs = self.a.rhs.clone();
        for j in 0..self.n {
            if self.state[j] != VarState::Basic {
                let xj = self.x[j];
                if xj != 0.0 {
                    for (i, v) in self.a.col(j) {
                        rhs[i] -= v * xj;
                    }
                }
            }
        }
        for i in 0..self.m {
            if self.state[self.n + i] != VarState::Basic {
                rhs[i] -= self.x[self.n + i];
            }
        }
        self.factor.ftran(&mut rhs);
        for (p, &j) in self.head.iter().enumerate() {
            self.x[j] = rhs[p];
        }
    }

    fn infeasibility_direction(&self, j: usize) -> f64 {
        let tol = self.settings.feasibility_tol;
        if self.x[j] < self.lower[j] - tol {
            -1.0
        } else if self.x[j] > self.upper[j] + tol {
            1.0
        } else {
            0.0
        }
    }

    /// Widens every non-fixed bound by a distinct relative amount and moves
    /// nonbasic variables onto their new bounds.
    fn shift_bounds(&mut self) {
        let original = (self.lower.clone(), self.upper.clone());
        for j in 0..self.n + self.m {
            if self.lower[j] == self.upper[j] {
                continue;
            }
            // deterministic spread in [1, 2)
            let spread = 1.0 + ((j as u64).wrapping_mul(2_654_435_761) % 1021) as f64 / 1021.0;
            let eps = |b: f64| BOUND_SHIFT * spread * (1.0 + b.abs());
            if self.lower[j].is_finite() {
                self.lower[j] -= eps(self.lower[j]);
            }
            if self.upper[j].is_finite() {
                self.upper[j] += eps(self.upper[j]);
            }
            if self.state[j] != VarState::Basic {
                self.x[j] = self.nonbasic_value(j, self.state[j]);
            }
        }
        self.shifted = Some(original);
        self.recompute_basics();
    }

    fn restore_bounds(&mut self) {
        if let Some((lower, upper)) = self.shifted.take() {
            self.lower = lower;
            self.upper = upper;
            for j in 0..self.n + self.m {
                if self.state[j] != VarState::Basic {
                    self.x[j] = self.nonbasic_value(j, self.state[j]);
                }
            }
            self.recompute_basics();
        }
    }

    pub fn solve(mut self, warm: Option<&Basis>) -> Result<LpResult, SolverError> {
        let started_warm = match warm {
            Some(b) => self.warm_start(b),
            None => false,
        };
        if !started_warm {
            self.cold_start();
        }
        let (m, n) = (self.m, self.n);
        let max_iter = self.settings.max_iterations.unwrap_or(20_000 + 40 * (m + n));
        let mut iterations = 0usize;
        // last phase, its best objective so far, and the iteration that reached it
        let mut progress: (bool, f64, usize) = (true, f64::INFINITY, 0);
        let mut was_shifted = false;
        let mut phase_one_costs = vec![0.0; n + m];

        loop {
            if iterations >= max_iter {
                return Err(SolverError::IterationLimit { iterations });
            }
            if self.factor.updates() >= self.settings.refactor_interval || self.factor.is_bloated() {
                if self.refactor().is_err() {
                    // Drifted into a singular basis: restart from the slack basis.
                    self.cold_start();
                }
                self.recompute_basics();
            }

            let mut infeasible = false;
            let mut violation = 0.0;
            for p in 0..m {
                let b = self.head[p];
                let dir = self.infeasibility_direction(b);
                phase_one_costs[b] = dir;
                if dir > 0.0 {
                    violation += self.x[b] - self.upper[b];
                } else if dir < 0.0 {
                    violation += self.lower[b] - self.x[b];
                }
                if dir != 0.0 {
                    infeasible = true;
                }
            }
            let phase_one = infeasible;
            let objective = if phase_one {
                violation
            } else {
                self.cost.iter().zip(&self.x).map(|(c, x)| c * x).sum()
            };
            if phase_one != progress.0 || objective < progress.1 - 1e-9 * (1.0 + progress.1.abs()) {
                progress = (phase_one, objective, iterations);
            }
            let y = if phase_one {
                self.btran(&|j| phase_one_costs[j])
            } else {
                self.btran(&|j| self.cost[j])
            };

            let stalled = iterations - progress.2;
            if stalled >= self.settings.stall_threshold && !was_shifted {
                was_shifted = true;
                self.shift_bounds();
                progress = (phase_one, f64::INFINITY, iterations);
                continue;
            }
            // Bland's rule while the objective has stalled again, until it improves
            let bland = was_shifted && stalled >= 10 * self.settings.stall_threshold;
            let tol = if phase_one { self.settings.optimality_tol } else { self.dual_tol };
            let mut entering: Option<(usize, f64, f64)> = None; // (column, direction, |d|)
            for j in 0..n + m {
                let st = self.state[j];
                if st == VarState::Basic || self.lower[j] == self.upper[j] {
                    continue;
                }
                let cj = if phase_one { 0.0 } else { self.cost[j] };
                let d = if j < n {
                    let mut d = cj;
                    for (i, v) in self.a.col(j) {
                        d -= y[i] * v;
                    }
                    d
                } else {
                    cj - y[j - n]
                };
                let dir = match st {
                    VarState::AtLower if d < -tol => 1.0,
                    VarState::AtUpper if d > tol => -1.0,
                    VarState::Free if d.abs() > tol => -d.signum(),
                    _ => continue,
                };
                let score = d.abs();
                match entering {
                    None => entering = Some((j, dir, score)),
                    Some((_, _, best)) if !bland && score > best => entering = Some((j, dir, score)),
                    _ => {}
                }
                if bland {
                    break;
                }
            }

            let Some((q, dir, _)) = entering else {
                if self.shifted.is_some() {
                    self.restore_bounds();
                    progress = (phase_one, f64::INFINITY, iterations);
                    continue;
                }
                if phase_one {
                    return Ok(self.finish(LpOutcome::Infeasible, iterations));
                }
                return Ok(self.finish(LpOutcome::Optimal, iterations));
            };

            let alpha = self.ftran_column(q);
            let step = self.ratio_test(q, dir, &alpha, bland);
            iterations += 1;
            match step {
                Step::Unbounded => {
                    self.restore_bounds();
                    if phase_one {
                        return Err(SolverError::Numerical("unbounded phase-one direction".into()));
                    }
                    return Ok(self.finish(LpOutcome::Unbounded, iterations));
                }
                Step::Flip(t) => {
                    self.apply_step(q, dir, t, &alpha);
                    self.state[q] = if dir > 0.0 { VarState::AtUpper } else { VarState::AtLower };
                    self.x[q] = if dir > 0.0 { self.upper[q] } else { self.lower[q] };
                }
                Step::Pivot { t, pos, at_upper } => {
                    self.apply_step(q, dir, t, &alpha);
                    let leaving_var = self.head[pos];
                    self.x[leaving_var] = if at_upper { self.upper[leaving_var] } else { self.lower[leaving_var] };
                    self.state[leaving_var] = if at_upper { VarState::AtUpper } else { VarState::AtLower };
                    self.state[q] = VarState::Basic;
                    self.head[pos] = q;
                    self.factor.push_eta(pos, &alpha);
                }
            }
        }
    }

    fn apply_step(&mut self, q: usize, dir: f64, t: f64, alpha: &[f64]) {
        if t == 0.0 {
            return;
        }
        self.x[q] += dir * t;
        for (p, &j) in self.head.iter().enumerate() {
            let a = alpha[p];
            if a != 0.0 {
                self.x[j] -= dir * t * a;
            }
        }
    }

    fn ratio_test(&self, q: usize, dir: f64, alpha: &[f64], bland: bool) -> Step {
        let ftol = self.settings.feasibility_tol;
        let piv_tol = self.settings.pivot_tol;
        // (basic var, position, rate, exact ratio, relaxed ratio, leaves at upper)
        let mut cands: Vec<(usize, usize, f64, f64, f64, bool)> = Vec::new();
        for (pos, &var) in self.head.iter().enumerate() {
            let rate = -dir * alpha[pos];
            if rate.abs() <= piv_tol {
                continue;
            }
            let (x, lo, hi) = (self.x[var], self.lower[var], self.upper[var]);
            if rate < 0.0 {
                if x > hi + ftol {
                    let r = (x - hi) / -rate;
                    cands.push((var, pos, rate, r, r, true));
                } else if x >= lo - ftol && lo.is_finite() {
                    cands.push((var, pos, rate, ((x - lo) / -rate).max(0.0), (x - lo + ftol) / -rate, false));
                }
            } else if x < lo - ftol {
                let r = (lo - x) / rate;
                cands.push((var, pos, rate, r, r, false));
            } else if x <= hi + ftol && hi.is_finite() {
                cands.push((var, pos, rate, ((hi - x) / rate).max(0.0), (hi - x + ftol) / rate, true));
            }
        }
        let range = self.upper[q] - self.lower[q];
        if cands.is_empty() {
            return if range.is_finite() { Step::Flip(range) } else { Step::Unbounded };
        }
        let chosen = if bland {
            let min_exact = cands.iter().map(|c| c.3).fold(f64::INFINITY, f64::min);
            let slack_tol = 1e-12 * (1.0 + min_exact);
            cands
                .into_iter()
                .filter(|c| c.3 <= min_exact + slack_tol)
                .min_by_key(|c| c.0)
                .expect("non-empty candidates")
        } else {
            let t_max = cands.iter().map(|c| c.4).fold(f64::INFINITY, f64::min);
            cands
                .into_iter()
                .filter(|c| c.3 <= t_max)
                .max_by(|a, b| a.2.abs().total_cmp(&b.2.abs()).then(b.0.cmp(&a.0)))
                .expect("at least the minimizer of the relaxed ratio qualifies")
        };
        let (_, pos, _, t, _, at_upper) = chosen;
        if range.is_finite() && range <= t {
            return Step::Flip(range);
        }
        Step::Pivot { t, pos, at_upper }
    }

    fn finish(mut self, outcome: LpOutcome, iterations: usize) -> LpResult {
        let n = self.n;
        if matches!(outcome, LpOutcome::Optimal) && self.refactor().is_ok() {
            self.recompute_basics();
        }
        let duals = self.btran(&|j| self.cost[j]);
        LpResult {
            outcome,
            x: self.x[..n].to_vec(),
            duals,
            iterations,
            basis: Basis { states: self.state.clone() },
        }
    }
}

/// Relative widening of each bound while degeneracy is being broken.
const BOUND_SHIFT: f64 = 1e-6;

enum Step {
    Unbounded,
    Flip(f64),
    Pivot { t: f64, pos: usize, at_upper: bool },
}
