//! Problem containers for linear and mixed-integer programs.

use std::fmt;

use super::SolverError;

/// Direction of optimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

/// Row comparator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparator {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Comparator::Le => "<=",
            Comparator::Eq => "=",
            Comparator::Ge => ">=",
        })
    }
}

/// A sparse constraint row `sum(coeffs) cmp rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub cmp: Comparator,
    pub rhs: f64,
}

/// A linear program with sparse rows and per-variable bounds.
///
/// Bounds may be `f64::NEG_INFINITY` / `f64::INFINITY`; every other number
/// in the program must be finite.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<Row>,
    pub names: Vec<String>,
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        Self {
            sense,
            objective: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            rows: Vec::new(),
            names: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Adds a variable and returns its index.
    pub fn add_var(&mut self, lower: f64, upper: f64, objective: f64) -> usize {
        let idx = self.objective.len();
        self.objective.push(objective);
        self.lower.push(lower);
        self.upper.push(upper);
        self.names.push(format!("x{idx}"));
        idx
    }

    /// Adds a named variable; the name is only used by the LP-format dump.
    pub fn add_named_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, objective: f64) -> usize {
        let idx = self.add_var(lower, upper, objective);
        self.names[idx] = name.into();
        idx
    }

    /// Adds a row and returns its index. Duplicate column entries are summed.
    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, cmp: Comparator, rhs: f64) -> usize {
        let mut coeffs = coeffs;
        coeffs.sort_by_key(|&(j, _)| j);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len());
        for (j, v) in coeffs {
            match merged.last_mut() {
                Some(last) if last.0 == j => last.1 += v,
                _ => merged.push((j, v)),
            }
        }
        merged.retain(|&(_, v)| v != 0.0);
        self.rows.push(Row { coeffs: merged, cmp, rhs });
        self.rows.len() - 1
    }

    /// Checks the structural invariants: finite data, consistent lengths,
    /// in-range indices and non-crossing bounds.
    pub fn validate(&self) -> Result<(), SolverError> {
        let n = self.objective.len();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(SolverError::invalid("bound vectors do not match the number of variables"));
        }
        for j in 0..n {
            if !self.objective[j].is_finite() {
                return Err(SolverError::invalid(format!("objective coefficient of variable {j} is not finite")));
            }
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if lo.is_nan() || hi.is_nan() {
                return Err(SolverError::invalid(format!("bound of variable {j} is NaN")));
            }
            if lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(SolverError::invalid(format!("variable {j} has an unsatisfiable infinite bound")));
            }
            if lo > hi {
                return Err(SolverError::invalid(format!("variable {j} has lower bound {lo} above upper bound {hi}")));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(SolverError::invalid(format!("right-hand side of row {i} is not finite")));
            }
            for &(j, v) in &row.coeffs {
                if j >= n {
                    return Err(SolverError::invalid(format!("row {i} references variable {j} but only {n} exist")));
                }
                if !v.is_finite() {
                    return Err(SolverError::invalid(format!("row {i} has a non-finite coefficient for variable {j}")));
                }
            }
        }
        Ok(())
    }

    /// Objective value of `x` in the program's own sense.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        for row in &self.rows {
            let lhs: f64 = row.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            let viol = match row.cmp {
                Comparator::Le => lhs - row.rhs,
                Comparator::Ge => row.rhs - lhs,
                Comparator::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }
}

/// Integrality restriction of a variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Integer,
    Binary,
}

/// A linear program plus integrality restrictions on a subset of its variables.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedIntegerProgram {
    pub lp: LinearProgram,
    pub kinds: Vec<VarKind>,
}

impl MixedIntegerProgram {
    pub fn new(sense: Sense) -> Self {
        Self { lp: LinearProgram::new(sense), kinds: Vec::new() }
    }

    pub fn from_lp(lp: LinearProgram) -> Self {
        let kinds = vec![VarKind::Continuous; lp.num_vars()];
        Self { lp, kinds }
    }

    pub fn add_var(&mut self, lower: f64, upper: f64, objective: f64) -> usize {
        self.kinds.push(VarKind::Continuous);
        self.lp.add_var(lower, upper, objective)
    }

    pub fn add_named_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, objective: f64) -> usize {
        self.kinds.push(VarKind::Continuous);
        self.lp.add_named_var(name, lower, upper, objective)
    }

    pub fn add_binary(&mut self, name: impl Into<String>, objective: f64) -> usize {
        self.kinds.push(VarKind::Binary);
        self.lp.add_named_var(name, 0.0, 1.0, objective)
    }

    pub fn add_integer(&mut self, name: impl Into<String>, lower: f64, upper: f64, objective: f64) -> usize {
        self.kinds.push(VarKind::Integer);
        self.lp.add_named_var(name, lower, upper, objective)
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, cmp: Comparator, rhs: f64) -> usize {
        self.lp.add_row(coeffs, cmp, rhs)
    }

    pub fn set_kind(&mut self, var: usize, kind: VarKind) {
        self.kinds[var] = kind;
        if kind == VarKind::Binary {
            self.lp.lower[var] = self.lp.lower[var].max(0.0);
            self.lp.upper[var] = self.lp.upper[var].min(1.0);
        }
    }

    /// Indices of variables restricted to integer values.
    pub fn integer_vars(&self) -> Vec<usize> {
        self.kinds
            .iter()
            .enumerate()
            .filter(|(_, k)| **k != VarKind::Continuous)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        self.lp.validate()?;
        if self.kinds.len() != self.lp.num_vars() {
            return Err(SolverError::invalid("integrality markers do not match the number of variables"));
        }
        for (j, kind) in self.kinds.iter().enumerate() {
            if *kind == VarKind::Binary && (self.lp.lower[j] < 0.0 || self.lp.upper[j] > 1.0) {
                return Err(SolverError::invalid(format!("binary variable {j} has bounds outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Outcome classification of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of a solve. `duals` is present for pure linear programs at optimality.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: Status,
    pub x: Vec<f64>,
    pub objective: f64,
    pub duals: Option<Vec<f64>>,
    pub iterations: usize,
    pub nodes: usize,
}

impl Solution {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    pub(crate) fn without_point(status: Status, iterations: usize, nodes: usize) -> Self {
        let objective = match status {
            Status::Infeasible => f64::NAN,
            Status::Unbounded => f64::INFINITY,
            Status::Optimal => 0.0,
        };
        Self { status, x: Vec::new(), objective, duals: None, iterations, nodes }
    }

    /// Reduced costs `c - A'y` of the structural variables.
    pub fn reduced_costs(&self, lp: &LinearProgram) -> Option<Vec<f64>> {
        let y = self.duals.as_ref()?;
        let mut reduced = lp.objective.clone();
        for (row, &yi) in lp.rows.iter().zip(y) {
            for &(j, a) in &row.coeffs {
                reduced[j] -= a * yi;
            }
        }
        Some(reduced)
    }

    /// Objective of the bounded dual built from `duals`: `b'y` plus each
    /// reduced cost priced at the bound it pushes toward. Reduced costs with
    /// magnitude below `tol` are treated as zero. Returns infinity when a
    /// reduced cost points at an infinite bound (dual infeasible).
    pub fn dual_objective(&self, lp: &LinearProgram, tol: f64) -> Option<f64> {
        let y = self.duals.as_ref()?;
        let reduced = self.reduced_costs(lp)?;
        let mut total: f64 = lp.rows.iter().zip(y).map(|(r, yi)| r.rhs * yi).sum();
        for (j, &d) in reduced.iter().enumerate() {
            if d.abs() <= tol {
                continue;
            }
            let toward_upper = match lp.sense {
                Sense::Maximize => d > 0.0,
                Sense::Minimize => d < 0.0,
            };
            let bound = if toward_upper { lp.upper[j] } else { lp.lower[j] };
            if !bound.is_finite() {
                return Some(match lp.sense {
                    Sense::Maximize => f64::INFINITY,
                    Sense::Minimize => f64::NEG_INFINITY,
                });
            }
            total += d * bound;
        }
        Some(total)
    }
}
