//! Choosing which candidates to submit when there are more than the bid limit.

use serde::{Deserialize, Serialize};

use super::relax::{branch_and_price, integral, largest, local_search, MasterProgram};
use super::{enumerate_candidates, invalid, BidError, CandidateSet, ExclusiveGroup, PackageBid, UtilityMatrix};
use crate::agents::Agent;
use crate::scenarios::ScenarioSet;
use crate::solver::{Comparator, LinearProgram, MixedIntegerProgram, Sense, Solution, Solver, VarKind};

/// Largest number of subsets [`select_bids_bruteforce`] will enumerate.
pub const BRUTE_FORCE_LIMIT: f64 = 1e6;

const INTEGRAL_TOL: f64 = 1e-6;
const BOUND_TOL: f64 = 1e-6;
/// Subsets times scenarios below which an exact fallback enumerates instead of branching.
const ENUMERATION_WORK: f64 = 2e7;
/// Simplex pivots [`select_bids_lp`] may spend on relaxations.
pub const SELECTION_PIVOT_BUDGET: usize = 2_000;

/// How a selection was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionPath {
    /// No more candidates than the limit; everything is selected.
    AllCandidates,
    /// The relaxation returned an integral vertex.
    IntegralRelaxation,
    /// The relaxation was fractional and keeping its largest `delta` reached the bound.
    Repaired,
    /// Neither of the above and few enough subsets to enumerate them all.
    Enumeration,
    /// Neither of the above; solved exactly by branch-and-bound.
    BranchAndBound,
    /// The pivot budget ran out before optimality was proven; the best
    /// selection found is returned.
    BestFound,
}

/// Selected candidate indices (ascending) and the expected surplus they realize.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub indices: Vec<usize>,
    pub objective: f64,
    /// Optimal value of the relaxation (equal to `objective` for `AllCandidates`),
    /// or a proven upper bound on the best selection's value when the pivot
    /// budget cut the search short.
    pub relaxation: f64,
    pub path: SelectionPath,
}

/// Result of a CVaR-maximizing selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvarSelection {
    pub indices: Vec<usize>,
    pub cvar: f64,
    /// Expected surplus of the same selection.
    pub expected: f64,
    /// Whether the continuous relaxation already had integral `delta`.
    pub relaxation_integral: bool,
}

/// Output of the hybrid heuristic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicOutcome {
    pub group: ExclusiveGroup,
    /// In-sample expected surplus of the group.
    pub expected_surplus: f64,
    pub candidates: CandidateSet,
    /// Candidate indices placed in the group, in group order.
    pub selected: Vec<usize>,
    /// `None` when every candidate fit under the limit.
    pub selection: Option<Selection>,
}

/// Every candidate as a bid at its own valuation.
pub fn select_all(candidates: &CandidateSet, limit: usize) -> Result<ExclusiveGroup, BidError> {
    if candidates.len() > limit {
        return Err(BidError::TooManyCandidates { count: candidates.len(), limit });
    }
    truthful_group(candidates, &(0..candidates.len()).collect::<Vec<_>>(), limit)
}

fn truthful_group(candidates: &CandidateSet, indices: &[usize], limit: usize) -> Result<ExclusiveGroup, BidError> {
    let bids = indices
        .iter()
        .map(|&k| {
            let c = candidates.get(k);
            PackageBid { profile: c.profile().clone(), price: c.valuation() }
        })
        .collect();
    ExclusiveGroup::new(bids, limit)
}

fn check_limit(limit: usize) -> Result<(), BidError> {
    if limit == 0 {
        return Err(invalid("bid limit must be at least 1"));
    }
    Ok(())
}

struct SelectionModel {
    lp: LinearProgram,
    delta: Vec<usize>,
}

/// Builds the full CVaR selection program. `gamma[k][s]` is only created where it can
/// contribute (`pi_s * U_ks > 0`); the others are zero in some optimum anyway.
fn selection_model(u: &UtilityMatrix, count: usize, cvar_beta: Option<f64>) -> (SelectionModel, Vec<Vec<(usize, usize)>>) {
    let (k_len, s_len) = (u.candidates(), u.scenarios());
    let mut lp = LinearProgram::new(Sense::Maximize);
    let delta: Vec<usize> = (0..k_len).map(|k| lp.add_named_var(format!("delta_{k}"), 0.0, 1.0, 0.0)).collect();
    let mut per_scenario: Vec<Vec<(usize, usize)>> = vec![Vec::new(); s_len];
    for k in 0..k_len {
        for s in 0..s_len {
            let value = u.get(k, s);
            if value > 0.0 && u.probabilities()[s] > 0.0 {
                let obj = if cvar_beta.is_some() { 0.0 } else { u.probabilities()[s] * value };
                let g = lp.add_named_var(format!("gamma_{k}_{s}"), 0.0, 1.0, obj);
                lp.add_row(vec![(g, 1.0), (delta[k], -1.0)], Comparator::Le, 0.0);
                per_scenario[s].push((k, g));
            }
        }
    }
    for vars in &per_scenario {
        if vars.len() > 1 {
            lp.add_row(vars.iter().map(|&(_, g)| (g, 1.0)).collect(), Comparator::Le, 1.0);
        }
    }
    lp.add_row(delta.iter().map(|&d| (d, 1.0)).collect(), Comparator::Eq, count as f64);
    if let Some(beta) = cvar_beta {
        let alpha = lp.add_named_var("alpha", f64::NEG_INFINITY, f64::INFINITY, 1.0);
        for (s, vars) in per_scenario.iter().enumerate() {
            let pi = u.probabilities()[s];
            if pi <= 0.0 {
                continue;
            }
            let eta = lp.add_named_var(format!("eta_{s}"), 0.0, f64::INFINITY, -pi / (1.0 - beta));
            // eta_s >= alpha - sum_k U_ks gamma_ks
            let mut coeffs = vec![(eta, 1.0), (alpha, -1.0)];
            coeffs.extend(vars.iter().map(|&(k, g)| (g, u.get(k, s))));
            lp.add_row(coeffs, Comparator::Ge, 0.0);
        }
    }
    (SelectionModel { lp, delta }, per_scenario)
}

fn solve_optimal_lp(solver: &Solver, lp: &LinearProgram) -> Result<Solution, BidError> {
    let sol = solver.solve_lp(lp)?;
    if !sol.is_optimal() {
        return Err(BidError::Internal(format!("selection relaxation ended {:?}", sol.status)));
    }
    Ok(sol)
}

fn to_mip(model: &SelectionModel) -> MixedIntegerProgram {
    let mut mip = MixedIntegerProgram::from_lp(model.lp.clone());
    for &d in &model.delta {
        mip.set_kind(d, VarKind::Binary);
    }
    mip
}

fn integral_indices(x: &[f64], delta: &[usize]) -> Option<Vec<usize>> {
    let mut picked = Vec::new();
    for (k, &d) in delta.iter().enumerate() {
        let v = x[d];
        if v > 1.0 - INTEGRAL_TOL {
            picked.push(k);
        } else if v > INTEGRAL_TOL {
            return None;
        }
    }
    Some(picked)
}

/// Swaps selected indices for lower unselected ones while the score does
/// not drop, so that among equally good selections the lowest indices win.
fn prefer_low_indices(mut indices: Vec<usize>, total: usize, score: impl Fn(&[usize]) -> f64) -> Vec<usize> {
    indices.sort_unstable();
    let mut current = score(&indices);
    let mut pos = indices.len();
    while pos > 0 {
        pos -= 1;
        let held = indices[pos];
        for candidate in 0..held.min(total) {
            if indices.contains(&candidate) {
                continue;
            }
            let mut trial = indices.clone();
            trial[pos] = candidate;
            trial.sort_unstable();
            let value = score(&trial);
            if value >= current {
                indices = trial;
                current = value;
                // restart from the top so every slot sees the new set
                pos = indices.len();
                break;
            }
        }
    }
    indices
}

/// Optimal value of the continuous relaxation of the selection program.
pub fn lp_relaxation_value(u: &UtilityMatrix, limit: usize) -> Result<f64, BidError> {
    check_limit(limit)?;
    let k_len = u.candidates();
    if k_len == 0 {
        return Ok(0.0);
    }
    let count = limit.min(k_len);
    if count == 1 {
        return Ok(single_best(u).1);
    }
    let seed = local_search(u, count);
    let mut program = MasterProgram::new(u, &seed, usize::MAX);
    let relaxed = program
        .solve(count, &vec![(0.0, 1.0); k_len], None)?
        .ok_or_else(|| BidError::Internal("selection relaxation is infeasible".into()))?;
    Ok(relaxed.objective)
}

/// With one bid the relaxation is linear in `delta`, so its optimum is the
/// candidate with the largest expected positive surplus.
fn single_best(u: &UtilityMatrix) -> (usize, f64) {
    (0..u.candidates())
        .map(|k| (k, u.row(k).iter().zip(u.probabilities()).map(|(v, p)| p * v.max(0.0)).sum::<f64>()))
        .fold((0, f64::NEG_INFINITY), |best, (k, v)| if v > best.1 { (k, v) } else { best })
}

/// Picks exactly `min(limit, K)` candidates maximizing expected surplus.
///
/// Solves the relaxation first. A fractional vertex is repaired by keeping
/// the largest `delta`; if that misses the relaxation bound the program is
/// solved exactly, by enumeration when there are few subsets and by
/// branching on `delta` otherwise.
pub fn select_bids_lp(u: &UtilityMatrix, limit: usize) -> Result<Selection, BidError> {
    check_limit(limit)?;
    let k_len = u.candidates();
    if k_len <= limit {
        let indices: Vec<usize> = (0..k_len).collect();
        let objective = u.expected_surplus(&indices);
        return Ok(Selection { indices, objective, relaxation: objective, path: SelectionPath::AllCandidates });
    }
    let (indices, bound, path) = if limit == 1 {
        let (k, bound) = single_best(u);
        (vec![k], bound, SelectionPath::IntegralRelaxation)
    } else {
        let seed = local_search(u, limit);
        let seed_value = u.expected_surplus(&seed);
        let mut program = MasterProgram::new(u, &seed, SELECTION_PIVOT_BUDGET);
        let root = program
            .solve(limit, &vec![(0.0, 1.0); k_len], None)?
            .ok_or_else(|| BidError::Internal("selection relaxation is infeasible".into()))?;
        let bound = root.bound;
        let reaches = |value: f64| value >= bound - BOUND_TOL * (1.0 + bound.abs());
        let repaired = integral(&root.delta).filter(|p| p.len() == limit).unwrap_or_else(|| largest(&root.delta, limit));
        let repaired_value = u.expected_surplus(&repaired);
        let is_integral = integral(&root.delta).is_some_and(|p| p.len() == limit);
        if root.certified && reaches(repaired_value) {
            let path = if is_integral { SelectionPath::IntegralRelaxation } else { SelectionPath::Repaired };
            (repaired, bound, path)
        } else if binomial(k_len, limit) * u.scenarios() as f64 <= ENUMERATION_WORK {
            (select_bids_bruteforce(u, limit)?.indices, bound, SelectionPath::Enumeration)
        } else {
            let incumbent = if seed_value > repaired_value { (seed_value, seed) } else { (repaired_value, repaired) };
            if !root.certified {
                (incumbent.1, bound, SelectionPath::BestFound)
            } else {
                let search = branch_and_price(&mut program, limit, &root, incumbent)?;
                match search.open_bound {
                    None => (search.picked, bound, SelectionPath::BranchAndBound),
                    Some(open) => (search.picked, open.min(bound), SelectionPath::BestFound),
                }
            }
        }
    };
    let indices = prefer_low_indices(indices, k_len, |sel| u.expected_surplus(sel));
    let objective = u.expected_surplus(&indices);
    if objective > bound + BOUND_TOL * (1.0 + bound.abs()) {
        return Err(BidError::Internal(format!("selection value {objective} exceeds its relaxation bound {bound}")));
    }
    Ok(Selection { indices, objective, relaxation: bound, path })
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Exact selection by enumerating every subset of size `min(limit, K)`.
/// Among equal objectives the lexicographically smallest subset wins.
pub fn select_bids_bruteforce(u: &UtilityMatrix, limit: usize) -> Result<Selection, BidError> {
    check_limit(limit)?;
    let k_len = u.candidates();
    let m = limit.min(k_len);
    let combinations = binomial(k_len, m);
    if combinations > BRUTE_FORCE_LIMIT {
        return Err(BidError::TooManySubsets { combinations, limit: BRUTE_FORCE_LIMIT });
    }
    let s_len = u.scenarios();
    let mut best = (f64::NEG_INFINITY, Vec::new());
    // best[level] holds the per-scenario maximum over the first `level` picks
    let mut levels = vec![vec![0.0_f64; s_len]; m + 1];
    let mut chosen = Vec::with_capacity(m);
    fn recurse(
        u: &UtilityMatrix,
        start: usize,
        m: usize,
        levels: &mut [Vec<f64>],
        chosen: &mut Vec<usize>,
        best: &mut (f64, Vec<usize>),
    ) {
        let depth = chosen.len();
        if depth == m {
            let value: f64 = levels[depth].iter().zip(u.probabilities()).map(|(v, p)| p * v).sum();
            if value > best.0 {
                *best = (value, chosen.clone());
            }
            return;
        }
        for k in start..=u.candidates() - (m - depth) {
            let (head, tail) = levels.split_at_mut(depth + 1);
            for (s, slot) in tail[0].iter_mut().enumerate() {
                *slot = head[depth][s].max(u.get(k, s));
            }
            chosen.push(k);
            recurse(u, k + 1, m, levels, chosen, best);
            chosen.pop();
        }
    }
    recurse(u, 0, m, &mut levels, &mut chosen, &mut best);
    let objective = u.expected_surplus(&best.1);
    let path = if m == k_len { SelectionPath::AllCandidates } else { SelectionPath::Enumeration };
    Ok(Selection { indices: best.1, objective, relaxation: objective, path })
}

/// Picks exactly `min(limit, K)` candidates maximizing the `beta`-CVaR of
/// the realized surplus, solved with binary `delta`.
pub fn select_bids_cvar(u: &UtilityMatrix, limit: usize, beta: f64) -> Result<CvarSelection, BidError> {
    check_limit(limit)?;
    if !(0.0..1.0).contains(&beta) {
        return Err(invalid(format!("CVaR level must lie in [0, 1), got {beta}")));
    }
    let k_len = u.candidates();
    let m = limit.min(k_len);
    if k_len == 0 {
        return Ok(CvarSelection { indices: Vec::new(), cvar: 0.0, expected: 0.0, relaxation_integral: true });
    }
    let solver = Solver::default();
    let (model, _) = selection_model(u, m, Some(beta));
    let relaxed = solve_optimal_lp(&solver, &model.lp)?;
    let relaxation_integral = integral_indices(&relaxed.x, &model.delta).is_some();
    let gap = 1e-9 * (1.0 + relaxed.objective.abs());
    let exact = solver.solve_milp(&to_mip(&model), gap)?;
    if !exact.is_optimal() {
        return Err(BidError::Internal(format!("CVaR selection ended {:?}", exact.status)));
    }
    let picked: Vec<usize> = (0..k_len).filter(|&k| exact.x[model.delta[k]] > 0.5).collect();
    if picked.len() != m {
        return Err(BidError::Internal(format!("CVaR selection picked {} of {m}", picked.len())));
    }
    let indices = prefer_low_indices(picked, k_len, |sel| u.cvar(sel, beta));
    let cvar = u.cvar(&indices, beta);
    if (cvar - exact.objective).abs() > BOUND_TOL * (1.0 + cvar.abs()) {
        return Err(BidError::Internal(format!("CVaR {cvar} of the selection differs from the program value {}", exact.objective)));
    }
    Ok(CvarSelection { expected: u.expected_surplus(&indices), indices, cvar, relaxation_integral })
}

impl UtilityMatrix {
    /// `beta`-CVaR of the realized surplus when bidding `selected`:
    /// `max_alpha alpha - E[(alpha - X)^+] / (1 - beta)`, attained at one of
    /// the scenario surpluses.
    pub fn cvar(&self, selected: &[usize], beta: f64) -> f64 {
        let x = self.scenario_surpluses(selected);
        let p = self.probabilities();
        x.iter()
            .map(|&alpha| {
                let shortfall: f64 = x.iter().zip(p).map(|(v, pi)| pi * (alpha - v).max(0.0)).sum();
                alpha - shortfall / (1.0 - beta)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// The hybrid heuristic: one candidate per scenario, all of them if they fit
/// under `limit`, otherwise the expected-surplus-optimal subset, each bid at
/// its valuation.
pub fn heuristic_ii(agent: &Agent, scenarios: &ScenarioSet, limit: usize) -> Result<HeuristicOutcome, BidError> {
    check_limit(limit)?;
    let candidates = enumerate_candidates(agent, scenarios)?;
    heuristic_ii_from_candidates(candidates, scenarios, limit)
}

/// [`heuristic_ii`] for candidates that were already enumerated on `scenarios`.
pub fn heuristic_ii_from_candidates(
    candidates: CandidateSet,
    scenarios: &ScenarioSet,
    limit: usize,
) -> Result<HeuristicOutcome, BidError> {
    check_limit(limit)?;
    let u = UtilityMatrix::new(&candidates, scenarios);
    if candidates.len() <= limit {
        let selected: Vec<usize> = (0..candidates.len()).collect();
        let group = select_all(&candidates, limit)?;
        let expected_surplus = u.expected_surplus(&selected);
        return Ok(HeuristicOutcome { group, expected_surplus, candidates, selected, selection: None });
    }
    let selection = select_bids_lp(&u, limit)?;
    let group = truthful_group(&candidates, &selection.indices, limit)?;
    Ok(HeuristicOutcome {
        group,
        expected_surplus: selection.objective,
        selected: selection.indices.clone(),
        candidates,
        selection: Some(selection),
    })
}

/// Relaxation value from the full program with every pair present.
#[cfg(test)]
pub(super) fn full_relaxation_value(u: &UtilityMatrix, limit: usize) -> f64 {
    let (model, _) = selection_model(u, limit.min(u.candidates()), None);
    solve_optimal_lp(&Solver::default(), &model.lp).unwrap().objective
}
