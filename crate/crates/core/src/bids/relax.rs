//! The selection relaxation solved by column generation, and an exact
//! branch-and-price on top of it.
//!
//! Any feasible `gamma` splits per candidate into scenario subsets: `gamma_k`
//! is a nonnegative combination of indicator vectors of sets `A` with total
//! weight at most `delta_k`. The master program therefore has one column per
//! (candidate, scenario set) and a fixed set of rows: the cardinality row, one
//! row per scenario and one linking row per candidate. Pricing a candidate is
//! a scan over scenarios: the best set takes every scenario whose weight
//! exceeds its dual. Columns are added until no candidate can improve the
//! objective, so the returned value is the optimum of the full relaxation.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::rc::Rc;

use super::{BidError, UtilityMatrix};
use crate::solver::{Basis, Comparator, LinearProgram, Sense, Solver, Status, VarState};

const CERTIFY_TOL: f64 = 1e-9;
const FRACTIONAL_TOL: f64 = 1e-6;
const MAX_NODES: usize = 50_000;
/// Weight of the best-bound duals when pricing.
const SMOOTHING: f64 = 0.7;
const MIN_SMOOTHING: f64 = 0.05;

/// Optimum of the relaxation under given bounds on `delta`.
#[derive(Debug, Clone)]
pub(crate) struct Relaxed {
    /// Value of the master program; the relaxation optimum when `certified`.
    pub objective: f64,
    /// Valid upper bound on the relaxation optimum.
    pub bound: f64,
    /// Whether the bound met the objective before the pivot budget ran out.
    pub certified: bool,
    pub delta: Vec<f64>,
    /// Final basis, reusable as a warm start for a neighbouring solve.
    pub start: Rc<Start>,
}

/// A basis together with the number of columns it was built for.
#[derive(Debug)]
pub(crate) struct Start {
    basis: Basis,
    columns: usize,
    /// Scenario duals with the best bound found, the smoothing centre for
    /// the next solve.
    duals: Vec<f64>,
}

/// One master column: candidate `k` serving the scenarios in `scenarios`.
struct Column {
    k: usize,
    scenarios: Vec<usize>,
    value: f64,
}

/// Master program over the columns generated so far. Variables are the
/// `delta`, then the columns in insertion order; rows never change, so a
/// basis stays valid when columns are appended.
pub(crate) struct MasterProgram<'a> {
    u: &'a UtilityMatrix,
    /// `pi_s * U_ks`, clipped at zero, row-major by candidate.
    weight: Vec<f64>,
    columns: Vec<Column>,
    seen: HashSet<(usize, Vec<usize>)>,
    solver: Solver,
    /// Simplex pivots allowed over all solves, and pivots used so far.
    budget: usize,
    spent: usize,
}

impl<'a> MasterProgram<'a> {
    /// Starts with, per candidate, every scenario where it has positive
    /// surplus and the scenarios where it is the overall best, plus the
    /// assignment each scenario gets under `seed`.
    pub fn new(u: &'a UtilityMatrix, seed: &[usize], budget: usize) -> Self {
        let (k_len, s_len) = (u.candidates(), u.scenarios());
        let mut weight = vec![0.0; k_len * s_len];
        for k in 0..k_len {
            for s in 0..s_len {
                let w = u.probabilities()[s] * u.get(k, s);
                if w > 0.0 {
                    weight[k * s_len + s] = w;
                }
            }
        }
        let mut program = Self {
            u,
            weight,
            columns: Vec::new(),
            seen: HashSet::new(),
            solver: Solver::default(),
            budget,
            spent: 0,
        };
        let best_in = |weight: &[f64], pool: &mut dyn Iterator<Item = usize>, s: usize| {
            pool.filter(|&k| weight[k * s_len + s] > 0.0)
                .max_by(|&a, &b| weight[a * s_len + s].total_cmp(&weight[b * s_len + s]).then(b.cmp(&a)))
        };
        let mut overall = vec![Vec::new(); k_len];
        let mut assigned = vec![Vec::new(); k_len];
        for s in 0..s_len {
            if let Some(k) = best_in(&program.weight, &mut (0..k_len), s) {
                overall[k].push(s);
            }
            if let Some(k) = best_in(&program.weight, &mut seed.iter().copied(), s) {
                assigned[k].push(s);
            }
        }
        for k in 0..k_len {
            let positive: Vec<usize> = (0..s_len).filter(|&s| program.weight[k * s_len + s] > 0.0).collect();
            for set in [positive, std::mem::take(&mut overall[k]), std::mem::take(&mut assigned[k])] {
                program.add(k, set);
            }
        }
        program
    }

    /// Whether the pivot budget is used up.
    pub fn exhausted(&self) -> bool {
        self.spent >= self.budget
    }

    /// Adds the column unless it is empty or already present.
    fn add(&mut self, k: usize, scenarios: Vec<usize>) -> bool {
        if scenarios.is_empty() || !self.seen.insert((k, scenarios.clone())) {
            return false;
        }
        let s_len = self.u.scenarios();
        let value = scenarios.iter().map(|&s| self.weight[k * s_len + s]).sum();
        self.columns.push(Column { k, scenarios, value });
        true
    }

    /// `start` laid out for the current column count, new columns at zero.
    fn extend(&self, start: &Start) -> Basis {
        let k_len = self.u.candidates();
        let added = self.columns.len() - start.columns;
        let states = &start.basis.states;
        let mut out = Vec::with_capacity(states.len() + added);
        out.extend_from_slice(&states[..k_len + start.columns]);
        out.extend(std::iter::repeat(VarState::AtLower).take(added));
        out.extend_from_slice(&states[k_len + start.columns..]);
        Basis { states: out }
    }

    /// Lagrangian upper bound on the relaxation for scenario duals `y >= 0`,
    /// minimized over the cardinality multiplier. Also returns that
    /// multiplier and each candidate's best column value `e_k`.
    fn lagrangian_bound(&self, y: &[f64], count: usize, bounds: &[(f64, f64)]) -> (f64, f64, Vec<f64>) {
        let s_len = self.u.scenarios();
        let e: Vec<f64> = self
            .weight
            .chunks(s_len)
            .map(|row| row.iter().zip(y).map(|(w, y)| (w - y).max(0.0)).sum())
            .collect();
        let inner = |mu: f64| {
            count as f64 * mu
                + e.iter().zip(bounds).map(|(&e, &(lo, hi))| if e > mu { (e - mu) * hi } else { (e - mu) * lo }).sum::<f64>()
        };
        // convex and piecewise linear in mu with breakpoints at the e_k
        let (best, mu) = e
            .iter()
            .chain(std::iter::once(&0.0))
            .map(|&mu| (inner(mu), mu))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .expect("at least one breakpoint");
        (y.iter().sum::<f64>() + best, mu, e)
    }

    /// Solves the relaxation with `sum delta = count` and the given bounds;
    /// `None` when those bounds leave it infeasible.
    ///
    /// Pricing uses duals smoothed toward the best Lagrangian bound seen so
    /// far, and falls back to the master's own duals when that finds nothing
    /// new.
    pub fn solve(
        &mut self,
        count: usize,
        bounds: &[(f64, f64)],
        start: Option<&Start>,
    ) -> Result<Option<Relaxed>, BidError> {
        let (k_len, s_len) = (self.u.candidates(), self.u.scenarios());
        let mut warm = start.map(|st| self.extend(st));
        let mut stable: Option<(f64, Vec<f64>)> = start.map(|st| {
            let (bound, _, _) = self.lagrangian_bound(&st.duals, count, bounds);
            (bound, st.duals.clone())
        });
        loop {
            let mut lp = LinearProgram::new(Sense::Maximize);
            let delta: Vec<usize> = bounds.iter().map(|&(lo, hi)| lp.add_var(lo, hi, 0.0)).collect();
            let lambda: Vec<usize> = self.columns.iter().map(|c| lp.add_var(0.0, f64::INFINITY, c.value)).collect();
            lp.add_row(delta.iter().map(|&d| (d, 1.0)).collect(), Comparator::Eq, count as f64);
            let mut scenario_rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); s_len];
            let mut link_rows: Vec<Vec<(usize, f64)>> = delta.iter().map(|&d| vec![(d, -1.0)]).collect();
            for (c, &var) in self.columns.iter().zip(&lambda) {
                for &s in &c.scenarios {
                    scenario_rows[s].push((var, 1.0));
                }
                link_rows[c.k].push((var, 1.0));
            }
            for coeffs in scenario_rows {
                lp.add_row(coeffs, Comparator::Le, 1.0);
            }
            for coeffs in link_rows {
                lp.add_row(coeffs, Comparator::Le, 0.0);
            }

            let (sol, basis) = self.solver.solve_lp_warm(&lp, warm.as_ref())?;
            self.spent += sol.iterations;
            match sol.status {
                Status::Infeasible => return Ok(None),
                Status::Unbounded => return Err(BidError::Internal("selection relaxation is unbounded".into())),
                Status::Optimal => {}
            }
            let duals = sol.duals.as_ref().expect("optimal LP carries duals");
            let y: Vec<f64> = (0..s_len).map(|s| duals[1 + s].max(0.0)).collect();
            let tol = CERTIFY_TOL * (1.0 + sol.objective.abs());
            let columns_now = self.columns.len();
            let finish = |basis: Basis, stable: Option<(f64, Vec<f64>)>, certified: bool| {
                let delta_values = delta.iter().map(|&d| sol.x[d].clamp(0.0, 1.0)).collect();
                let (bound, duals) = stable.unwrap_or_else(|| (f64::INFINITY, y.clone()));
                let bound = if certified { sol.objective } else { bound.max(sol.objective) };
                let start = Rc::new(Start { basis, columns: columns_now, duals });
                Ok(Some(Relaxed { objective: sol.objective, bound, certified, delta: delta_values, start }))
            };

            let improve = |stable: &mut Option<(f64, Vec<f64>)>, bound: f64, point: &[f64]| {
                if stable.as_ref().is_none_or(|(b, _)| bound < *b) {
                    *stable = Some((bound, point.to_vec()));
                }
            };
            let (bound, _, _) = self.lagrangian_bound(&y, count, bounds);
            improve(&mut stable, bound, &y);
            if stable.as_ref().is_some_and(|(b, _)| *b - sol.objective <= tol) {
                return finish(basis, stable, true);
            }
            if self.spent >= self.budget {
                return finish(basis, stable, false);
            }

            // smoothed pricing, halving the smoothing after each miss
            let mut added = false;
            let mut alpha = SMOOTHING;
            while !added && alpha >= MIN_SMOOTHING {
                let centre = &stable.as_ref().expect("set above").1;
                let point: Vec<f64> = centre.iter().zip(&y).map(|(c, r)| alpha * c + (1.0 - alpha) * r).collect();
                let (bound, _, e) = self.lagrangian_bound(&point, count, bounds);
                improve(&mut stable, bound, &point);
                for k in 0..k_len {
                    if e[k] > 0.0 && bounds[k].1 > 0.0 {
                        let row = &self.weight[k * s_len..(k + 1) * s_len];
                        added |= self.add(k, (0..s_len).filter(|&s| row[s] > point[s]).collect());
                    }
                }
                alpha /= 2.0;
            }
            if stable.as_ref().is_some_and(|(b, _)| *b - sol.objective <= tol) {
                return finish(basis, stable, true);
            }

            // exact pricing on the master's duals: extend them to every
            // missing column and bound what those columns could add
            if !added {
                let reduced = sol.reduced_costs(&lp).expect("optimal LP carries duals");
                let mut total_gap = 0.0;
                let mut priced_columns = Vec::new();
                for k in 0..k_len {
                    let row = &self.weight[k * s_len..(k + 1) * s_len];
                    let best: f64 =
                        row.iter().zip(&y).map(|(w, y)| (w - y).max(0.0)).sum::<f64>() - duals[1 + s_len + k].max(0.0);
                    if best <= 0.0 {
                        continue;
                    }
                    let (lo, hi) = bounds[k];
                    let priced = |d: f64| if d > 0.0 { d * hi } else { d * lo };
                    let d = reduced[delta[k]];
                    let gap = priced(d + best) - priced(d);
                    if gap > 0.0 {
                        total_gap += gap;
                        priced_columns.push((k, (0..s_len).filter(|&s| row[s] > y[s]).collect::<Vec<_>>()));
                    }
                }
                if total_gap > tol {
                    for (k, set) in priced_columns {
                        added |= self.add(k, set);
                    }
                }
            }
            if !added {
                return finish(basis, stable, true);
            }
            warm = Some(self.extend(&Start { basis, columns: columns_now, duals: Vec::new() }));
        }
    }
}

/// Greedy selection followed by best-improvement single swaps.
pub(crate) fn local_search(u: &UtilityMatrix, count: usize) -> Vec<usize> {
    let (k_len, s_len) = (u.candidates(), u.scenarios());
    let p = u.probabilities();
    let mut selected: Vec<usize> = Vec::with_capacity(count);
    let mut current = vec![0.0_f64; s_len];
    let mut taken = vec![false; k_len];
    for _ in 0..count.min(k_len) {
        let mut best = (f64::NEG_INFINITY, usize::MAX);
        for k in (0..k_len).filter(|&k| !taken[k]) {
            let gain: f64 = (0..s_len).map(|s| p[s] * (u.get(k, s) - current[s]).max(0.0)).sum();
            if gain > best.0 {
                best = (gain, k);
            }
        }
        let k = best.1;
        taken[k] = true;
        selected.push(k);
        for s in 0..s_len {
            current[s] = current[s].max(u.get(k, s));
        }
    }
    loop {
        // best and second best per scenario among the selection, floored at zero
        let mut first = vec![(0.0_f64, usize::MAX); s_len];
        let mut second = vec![0.0_f64; s_len];
        for &k in &selected {
            for s in 0..s_len {
                let v = u.get(k, s);
                if v > first[s].0 {
                    second[s] = first[s].0;
                    first[s] = (v, k);
                } else if v > second[s] {
                    second[s] = v;
                }
            }
        }
        let base: f64 = (0..s_len).map(|s| p[s] * first[s].0).sum();
        let mut best = (base + 1e-12 * (1.0 + base.abs()), usize::MAX, usize::MAX);
        for (slot, &out) in selected.iter().enumerate() {
            for k in (0..k_len).filter(|&k| !taken[k]) {
                let value: f64 = (0..s_len)
                    .map(|s| {
                        let kept = if first[s].1 == out { second[s] } else { first[s].0 };
                        p[s] * kept.max(u.get(k, s))
                    })
                    .sum();
                if value > best.0 {
                    best = (value, slot, k);
                }
            }
        }
        if best.1 == usize::MAX {
            break;
        }
        taken[selected[best.1]] = false;
        taken[best.2] = true;
        selected[best.1] = best.2;
    }
    selected.sort_unstable();
    selected
}

pub(crate) fn integral(delta: &[f64]) -> Option<Vec<usize>> {
    let mut picked = Vec::new();
    for (k, &v) in delta.iter().enumerate() {
        if v > 1.0 - FRACTIONAL_TOL {
            picked.push(k);
        } else if v > FRACTIONAL_TOL {
            return None;
        }
    }
    Some(picked)
}

/// The `count` largest entries of `delta`, lowest index first on ties.
pub(crate) fn largest(delta: &[f64], count: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..delta.len()).collect();
    order.sort_by(|&a, &b| delta[b].total_cmp(&delta[a]).then(a.cmp(&b)));
    let mut picked = order[..count].to_vec();
    picked.sort_unstable();
    picked
}

struct Node {
    bound: f64,
    id: usize,
    bounds: Vec<(f64, f64)>,
    start: Rc<Start>,
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
        self.bound.total_cmp(&other.bound).then(other.id.cmp(&self.id))
    }
}

/// Result of [`branch_and_price`].
pub(crate) struct Search {
    pub picked: Vec<usize>,
    /// Upper bound over the unexplored nodes when the pivot budget ran out;
    /// `None` when the incumbent is proven optimal.
    pub open_bound: Option<f64>,
}

/// Best-bound search over binary `delta`, starting from a solved root.
pub(crate) fn branch_and_price(
    program: &mut MasterProgram<'_>,
    count: usize,
    root: &Relaxed,
    mut incumbent: (f64, Vec<usize>),
) -> Result<Search, BidError> {
    let u = program.u;
    let k_len = u.candidates();
    let gap_tol = |bound: f64| 1e-9 * (1.0 + bound.abs());
    let mut heap = BinaryHeap::new();
    let mut next_id = 0usize;
    let mut push_children = |heap: &mut BinaryHeap<Node>, bounds: &[(f64, f64)], relaxed: &Relaxed| {
        // most fractional delta, lowest index on ties
        let (k, _) = relaxed
            .delta
            .iter()
            .enumerate()
            .map(|(k, &v)| (k, (v - 0.5).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .expect("fractional node has candidates");
        for value in [1.0, 0.0] {
            let mut child = bounds.to_vec();
            child[k] = (value, value);
            heap.push(Node { bound: relaxed.bound, id: next_id, bounds: child, start: Rc::clone(&relaxed.start) });
            next_id += 1;
        }
    };
    push_children(&mut heap, &vec![(0.0, 1.0); k_len], root);
    let mut nodes = 0usize;
    while let Some(node) = heap.pop() {
        if node.bound <= incumbent.0 + gap_tol(node.bound) {
            break;
        }
        if program.exhausted() {
            return Ok(Search { picked: incumbent.1, open_bound: Some(node.bound) });
        }
        nodes += 1;
        if nodes > MAX_NODES {
            return Err(BidError::Internal(format!("selection search exceeded {MAX_NODES} nodes")));
        }
        let Some(relaxed) = program.solve(count, &node.bounds, Some(&node.start))? else { continue };
        let candidate = integral(&relaxed.delta).filter(|p| p.len() == count).unwrap_or_else(|| largest(&relaxed.delta, count));
        let value = u.expected_surplus(&candidate);
        if value > incumbent.0 {
            incumbent = (value, candidate);
        }
        if relaxed.bound <= incumbent.0 + gap_tol(relaxed.bound) {
            continue;
        }
        if !relaxed.certified {
            // the budget ran out inside this node; it stays open at its bound
            let open = heap.iter().map(|n| n.bound).fold(relaxed.bound, f64::max);
            return Ok(Search { picked: incumbent.1, open_bound: Some(open) });
        }
        if integral(&relaxed.delta).is_none() {
            push_children(&mut heap, &node.bounds, &relaxed);
        }
    }
    Ok(Search { picked: incumbent.1, open_bound: None })
}
