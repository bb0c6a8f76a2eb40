//! Best-bound branch-and-bound on top of the simplex engine.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::rc::Rc;

use super::model::{MixedIntegerProgram, Sense, Solution, Status};
use super::simplex::{Basis, LpOutcome, Simplex, SparseMatrix};
use super::{Settings, SolverError};

struct Node {
    /// Upper bound on the score of any solution in this subtree.
    bound: f64,
    depth: usize,
    id: usize,
    /// Bounds of the integer variables, in `int_vars` order.
    bounds: Vec<(f64, f64)>,
    warm: Option<Rc<Basis>>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.id.cmp(&self.id))
    }
}

struct Incumbent {
    score: f64,
    x: Vec<f64>,
    basis: Basis,
}

pub(crate) fn branch_and_bound(mip: &MixedIntegerProgram, gap: f64, settings: &Settings) -> Result<Solution, SolverError> {
    let lp = &mip.lp;
    let matrix = SparseMatrix::from_lp(lp);
    let int_vars = mip.integer_vars();
    let itol = settings.integrality_tol;
    // Scores are maximized regardless of the program's sense.
    let sign = match lp.sense {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    };

    let mut root_bounds = Vec::with_capacity(int_vars.len());
    for &j in &int_vars {
        let lo = if lp.lower[j].is_finite() { (lp.lower[j] - itol).ceil() } else { lp.lower[j] };
        let hi = if lp.upper[j].is_finite() { (lp.upper[j] + itol).floor() } else { lp.upper[j] };
        if lo > hi {
            return Ok(Solution::without_point(Status::Infeasible, 0, 0));
        }
        root_bounds.push((lo, hi));
    }

    let mut heap = BinaryHeap::new();
    heap.push(Node { bound: f64::INFINITY, depth: 0, id: 0, bounds: root_bounds, warm: None });
    let mut next_id = 1;
    let mut incumbent: Option<Incumbent> = None;
    let mut nodes = 0usize;
    let mut iterations = 0usize;
    let mut lower = lp.lower.clone();
    let mut upper = lp.upper.clone();

    while let Some(node) = heap.pop() {
        if let Some(inc) = &incumbent {
            if node.bound <= inc.score + gap {
                break;
            }
        }
        if nodes >= settings.max_nodes {
            let best_bound = sign * node.bound;
            let incumbent = incumbent.map(|inc| {
                Box::new(Solution {
                    status: Status::Optimal,
                    objective: lp.objective_value(&inc.x),
                    x: inc.x,
                    duals: None,
                    iterations,
                    nodes,
                })
            });
            return Err(SolverError::NodeLimit { nodes, best_bound, incumbent });
        }
        nodes += 1;

        for (&j, &(lo, hi)) in int_vars.iter().zip(&node.bounds) {
            lower[j] = lo;
            upper[j] = hi;
        }
        let res = Simplex::new(&matrix, lp.sense, &lp.objective, &lower, &upper, settings).solve(node.warm.as_deref())?;
        iterations += res.iterations;
        match res.outcome {
            LpOutcome::Infeasible => continue,
            LpOutcome::Unbounded => {
                if nodes == 1 {
                    return Ok(Solution::without_point(Status::Unbounded, iterations, nodes));
                }
                return Err(SolverError::Numerical("unbounded relaxation below a bounded node".into()));
            }
            LpOutcome::Optimal => {}
        }
        let score = sign * lp.objective_value(&res.x);
        if let Some(inc) = &incumbent {
            if score <= inc.score + gap {
                continue;
            }
        }

        // most fractional, lowest index on ties
        let mut branch: Option<(usize, f64)> = None;
        for (pos, &j) in int_vars.iter().enumerate() {
            let v = res.x[j];
            let frac = v - v.floor();
            let dist = frac.min(1.0 - frac);
            if dist > itol && branch.is_none_or(|(_, best)| dist > best + 1e-12) {
                branch = Some((pos, dist));
            }
        }

        match branch {
            None => {
                let better = incumbent.as_ref().is_none_or(|inc| score > inc.score);
                if better {
                    incumbent = Some(Incumbent { score, x: res.x, basis: res.basis });
                }
            }
            Some((pos, _)) => {
                let j = int_vars[pos];
                let v = res.x[j];
                let warm = Rc::new(res.basis);
                let mut down = node.bounds.clone();
                down[pos].1 = v.floor();
                let mut up = node.bounds;
                up[pos].0 = v.ceil();
                for bounds in [down, up] {
                    heap.push(Node { bound: score, depth: node.depth + 1, id: next_id, bounds, warm: Some(Rc::clone(&warm)) });
                    next_id += 1;
                }
            }
        }
    }

    let Some(inc) = incumbent else {
        return Ok(Solution::without_point(Status::Infeasible, iterations, nodes));
    };

    // Polish: fix the integers at their rounded values and re-solve for a clean vertex.
    let mut lower = lp.lower.clone();
    let mut upper = lp.upper.clone();
    for &j in &int_vars {
        let r = inc.x[j].round();
        lower[j] = r;
        upper[j] = r;
    }
    let polished = Simplex::new(&matrix, lp.sense, &lp.objective, &lower, &upper, settings).solve(Some(&inc.basis));
    let mut x = match polished {
        Ok(res) if matches!(res.outcome, LpOutcome::Optimal) && sign * lp.objective_value(&res.x) >= inc.score - gap.max(1e-9) => {
            iterations += res.iterations;
            res.x
        }
        _ => inc.x,
    };
    for &j in &int_vars {
        x[j] = x[j].round();
    }
    Ok(Solution { status: Status::Optimal, objective: lp.objective_value(&x), x, duals: None, iterations, nodes })
}
