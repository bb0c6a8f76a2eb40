use super::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

#[test]
fn single_bounded_variable() {
    let mut lp = LinearProgram::new(Sense::Maximize);
    let x = lp.add_var(0.0, f64::INFINITY, 1.0);
    lp.add_row(vec![(x, 1.0)], Comparator::Le, 1.0);
    let sol = solve_lp(&lp).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert!(close(sol.x[0], 1.0, 1e-9));
    assert!(close(sol.objective, 1.0, 1e-9));
    assert!(close(sol.duals.as_ref().unwrap()[0], 1.0, 1e-9));
}

#[test]
fn unbounded_ray() {
    let mut lp = LinearProgram::new(Sense::Maximize);
    lp.add_var(0.0, f64::INFINITY, 1.0);
    let sol = solve_lp(&lp).unwrap();
    assert_eq!(sol.status, Status::Unbounded);
}

#[test]
fn two_variable_vertex() {
    let mut lp = LinearProgram::new(Sense::Maximize);
    let a = lp.add_var(0.0, f64::INFINITY, 3.0);
    let b = lp.add_var(0.0, f64::INFINITY, 2.0);
    lp.add_row(vec![(a, 1.0), (b, 1.0)], Comparator::Le, 4.0);
    lp.add_row(vec![(a, 1.0)], Comparator::Le, 2.0);
    let sol = solve_lp(&lp).unwrap();
    assert!(close(sol.x[a], 2.0, 1e-9) && close(sol.x[b], 2.0, 1e-9));
    assert!(close(sol.objective, 10.0, 1e-9));
    let duals = sol.duals.clone().unwrap();
    assert!(close(duals[0], 2.0, 1e-9) && close(duals[1], 1.0, 1e-9));
}

#[test]
fn small_knapsack() {
    let mut mip = MixedIntegerProgram::new(Sense::Maximize);
    let a = mip.add_binary("a", 10.0);
    let b = mip.add_binary("b", 6.0);
    mip.add_row(vec![(a, 5.0), (b, 4.0)], Comparator::Le, 5.0);
    let sol = solve_milp(&mip, 0.0).unwrap();
    assert_eq!(sol.x[a], 1.0);
    assert_eq!(sol.x[b], 0.0);
    assert!(close(sol.objective, 10.0, 1e-9));
}

#[test]
fn integral_root_needs_one_node() {
    let mut mip = MixedIntegerProgram::new(Sense::Maximize);
    let a = mip.add_binary("a", 1.0);
    let b = mip.add_binary("b", 1.0);
    mip.add_row(vec![(a, 1.0), (b, 1.0)], Comparator::Le, 1.0);
    let sol = solve_milp(&mip, 0.0).unwrap();
    assert_eq!(sol.nodes, 1);
    assert!(close(sol.objective, 1.0, 1e-9));
}

#[test]
fn contradictory_rows_are_infeasible() {
    let mut lp = LinearProgram::new(Sense::Maximize);
    let a = lp.add_var(0.0, f64::INFINITY, 1.0);
    let b = lp.add_var(0.0, f64::INFINITY, 1.0);
    lp.add_row(vec![(a, 1.0), (b, 1.0)], Comparator::Le, 0.0);
    lp.add_row(vec![(a, 1.0), (b, 1.0)], Comparator::Ge, 1.0);
    assert_eq!(solve_lp(&lp).unwrap().status, Status::Infeasible);
    let mip = MixedIntegerProgram::from_lp(lp);
    assert_eq!(solve_milp(&mip, 0.0).unwrap().status, Status::Infeasible);
}

#[test]
fn minimize_with_free_and_negative_bounds() {
    // min x + y, x free, y in [-3, 5], x - y >= -1, x + 2y >= -4
    let mut lp = LinearProgram::new(Sense::Minimize);
    let x = lp.add_var(f64::NEG_INFINITY, f64::INFINITY, 1.0);
    let y = lp.add_var(-3.0, 5.0, 1.0);
    lp.add_row(vec![(x, 1.0), (y, -1.0)], Comparator::Ge, -1.0);
    lp.add_row(vec![(x, 1.0), (y, 2.0)], Comparator::Ge, -4.0);
    let sol = solve_lp(&lp).unwrap();
    // vertex of the two rows: x = -2, y = -1 gives -3; y = -3 gives x = 2, obj -1
    assert!(close(sol.objective, -3.0, 1e-9), "{:?}", sol);
    assert!(lp.max_violation(&sol.x) <= 1e-9);
}

#[test]
fn equality_rows_and_degenerate_start() {
    let mut lp = LinearProgram::new(Sense::Maximize);
    let v: Vec<usize> = (0..4).map(|_| lp.add_var(0.0, 10.0, 1.0)).collect();
    lp.add_row(vec![(v[0], 1.0), (v[1], 1.0)], Comparator::Eq, 3.0);
    lp.add_row(vec![(v[1], 1.0), (v[2], -1.0)], Comparator::Eq, 0.0);
    lp.add_row(vec![(v[2], 1.0), (v[3], 1.0)], Comparator::Le, 0.0);
    let sol = solve_lp(&lp).unwrap();
    assert!(close(sol.objective, 3.0, 1e-9));
    assert!(lp.max_violation(&sol.x) <= 1e-9);
}

#[test]
fn invalid_programs_are_rejected() {
    let mut lp = LinearProgram::new(Sense::Maximize);
    let x = lp.add_var(0.0, 1.0, f64::NAN);
    lp.add_row(vec![(x, 1.0)], Comparator::Le, 1.0);
    assert!(matches!(solve_lp(&lp), Err(SolverError::Invalid(_))));

    let mut lp = LinearProgram::new(Sense::Maximize);
    lp.add_var(2.0, 1.0, 1.0);
    assert!(matches!(solve_lp(&lp), Err(SolverError::Invalid(_))));

    let mut lp = LinearProgram::new(Sense::Maximize);
    lp.add_var(0.0, 1.0, 1.0);
    lp.rows.push(Row { coeffs: vec![(3, 1.0)], cmp: Comparator::Le, rhs: 1.0 });
    assert!(matches!(solve_lp(&lp), Err(SolverError::Invalid(_))));
}

#[test]
fn node_limit_reports_incumbent_and_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut mip = MixedIntegerProgram::new(Sense::Maximize);
    let n = 30;
    let vars: Vec<usize> = (0..n).map(|j| mip.add_binary(format!("b{j}"), rng.random_range(10.0..20.0))).collect();
    let weights: Vec<(usize, f64)> = vars.iter().map(|&j| (j, rng.random_range(10.0..20.0))).collect();
    mip.add_row(weights, Comparator::Le, 150.5);
    let solver = Solver::new(Settings { max_nodes: 3, ..Settings::default() });
    match solver.solve_milp(&mip, 0.0) {
        Err(SolverError::NodeLimit { nodes, best_bound, incumbent }) => {
            assert_eq!(nodes, 3);
            assert!(best_bound.is_finite());
            if let Some(inc) = incumbent {
                assert!(inc.objective <= best_bound + 1e-9);
            }
        }
        other => panic!("expected node limit, got {other:?}"),
    }
}

#[test]
fn lp_format_lists_sections() {
    let mut mip = MixedIntegerProgram::new(Sense::Minimize);
    let a = mip.add_binary("a", 1.0);
    let b = mip.add_integer("b", 0.0, 5.0, -2.0);
    let c = mip.add_named_var("c", f64::NEG_INFINITY, f64::INFINITY, 0.0);
    mip.add_row(vec![(a, 1.0), (b, -1.0), (c, 2.5)], Comparator::Ge, 1.0);
    let text = write_lp_format(&mip);
    for needle in ["Minimize", " obj: 1 a - 2 b", "Subject To", " r0: 1 a - 1 b + 2.5 c >= 1", "Bounds", " c free", "Binaries\n a", "Generals\n b", "End"] {
        assert!(text.contains(needle), "missing {needle:?} in\n{text}");
    }
}

// ---------------------------------------------------------------- oracles

/// Best vertex of a bounded LP by enumerating every basis of the constraint
/// set `rows + box`. `None` means infeasible.
fn vertex_oracle(lp: &LinearProgram) -> Option<f64> {
    let n = lp.num_vars();
    // every constraint as (a, b, kind): kind 0 is <=, 1 is =, 2 is >=
    let mut cons: Vec<(Vec<f64>, f64)> = Vec::new();
    for row in &lp.rows {
        let mut a = vec![0.0; n];
        for &(j, v) in &row.coeffs {
            a[j] = v;
        }
        cons.push((a, row.rhs));
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cons.push((e.clone(), lp.lower[j]));
        cons.push((e, lp.upper[j]));
    }
    let m = cons.len();
    let mut best: Option<f64> = None;
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let a = DMatrix::from_fn(n, n, |r, c| cons[idx[r]].0[c]);
        let b = DVector::from_fn(n, |r, _| cons[idx[r]].1);
        if let Some(x) = a.clone().lu().solve(&b) {
            if (&a * &x - &b).amax() < 1e-9 {
                let xs: Vec<f64> = x.iter().copied().collect();
                if lp.max_violation(&xs) <= 1e-9 {
                    let obj = lp.objective_value(&xs);
                    best = Some(match (best, lp.sense) {
                        (None, _) => obj,
                        (Some(v), Sense::Maximize) => v.max(obj),
                        (Some(v), Sense::Minimize) => v.min(obj),
                    });
                }
            }
        }
        // next combination
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < m - n + i {
                idx[i] += 1;
                for k in i + 1..n {
                    idx[k] = idx[k - 1] + 1;
                }
                break;
            }
        }
    }
}

fn random_lp(rng: &mut ChaCha8Rng, n: usize, m: usize) -> LinearProgram {
    let sense = if rng.random_bool(0.5) { Sense::Maximize } else { Sense::Minimize };
    let mut lp = LinearProgram::new(sense);
    for _ in 0..n {
        let lo = rng.random_range(-5.0..1.0_f64).round();
        let hi = lo + rng.random_range(0.0..6.0_f64).round();
        lp.add_var(lo, hi, rng.random_range(-5.0..5.0_f64).round());
    }
    for _ in 0..m {
        let mut coeffs = Vec::new();
        for j in 0..n {
            if rng.random_bool(0.7) {
                coeffs.push((j, rng.random_range(-4.0..4.0_f64).round()));
            }
        }
        let cmp = match rng.random_range(0..5) {
            0 => Comparator::Eq,
            1 | 2 => Comparator::Ge,
            _ => Comparator::Le,
        };
        lp.add_row(coeffs, cmp, rng.random_range(-6.0..6.0_f64).round());
    }
    lp
}

#[test]
fn random_bounded_lps_match_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut optimal = 0;
    for trial in 0..400 {
        let n = rng.random_range(1..=4);
        let m = rng.random_range(1..=5);
        let lp = random_lp(&mut rng, n, m);
        let sol = solve_lp(&lp).unwrap();
        match vertex_oracle(&lp) {
            None => assert_eq!(sol.status, Status::Infeasible, "trial {trial}: {lp:?}"),
            Some(v) => {
                optimal += 1;
                assert_eq!(sol.status, Status::Optimal, "trial {trial}: {lp:?}");
                assert!(close(sol.objective, v, 1e-7), "trial {trial}: {} vs {v}", sol.objective);
                assert!(lp.max_violation(&sol.x) <= 1e-7);
                let dual = sol.dual_objective(&lp, 1e-9).unwrap();
                assert!((dual - sol.objective).abs() <= 1e-6 * (1.0 + sol.objective.abs()), "trial {trial}");
            }
        }
    }
    assert!(optimal > 100);
}

fn random_binary_program(rng: &mut ChaCha8Rng) -> MixedIntegerProgram {
    let n = rng.random_range(1..=12);
    let m = rng.random_range(1..=10);
    let sense = if rng.random_bool(0.5) { Sense::Maximize } else { Sense::Minimize };
    let mut mip = MixedIntegerProgram::new(sense);
    for j in 0..n {
        mip.add_binary(format!("b{j}"), rng.random_range(-10..=10) as f64);
    }
    for _ in 0..m {
        let mut coeffs = Vec::new();
        for j in 0..n {
            if rng.random_bool(0.6) {
                coeffs.push((j, rng.random_range(-6..=6) as f64));
            }
        }
        let cmp = match rng.random_range(0..6) {
            0 => Comparator::Eq,
            1 | 2 => Comparator::Ge,
            _ => Comparator::Le,
        };
        let rhs = rng.random_range(-4..=8) as f64;
        mip.add_row(coeffs, cmp, rhs);
    }
    mip
}

fn brute_force(mip: &MixedIntegerProgram) -> Option<f64> {
    let n = mip.lp.num_vars();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << n) {
        let x: Vec<f64> = (0..n).map(|j| ((mask >> j) & 1) as f64).collect();
        if mip.lp.max_violation(&x) <= 1e-9 {
            let v = mip.lp.objective_value(&x);
            best = Some(match (best, mip.lp.sense) {
                (None, _) => v,
                (Some(b), Sense::Maximize) => b.max(v),
                (Some(b), Sense::Minimize) => b.min(v),
            });
        }
    }
    best
}

#[test]
fn random_binary_programs_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut feasible = 0;
    for trial in 0..200 {
        let mip = random_binary_program(&mut rng);
        let sol = solve_milp(&mip, 0.0).unwrap();
        match brute_force(&mip) {
            None => assert_eq!(sol.status, Status::Infeasible, "trial {trial}"),
            Some(v) => {
                feasible += 1;
                assert_eq!(sol.status, Status::Optimal, "trial {trial}");
                assert!((sol.objective - v).abs() <= 1e-6, "trial {trial}: {} vs {v}", sol.objective);
                assert!(mip.lp.max_violation(&sol.x) <= 1e-7);
                assert!(sol.x.iter().all(|v| v.fract() == 0.0));
            }
        }
    }
    assert!(feasible > 50);
}

#[test]
fn mixed_programs_match_enumeration_over_integers() {
    // a few continuous columns on top of binaries; the oracle fixes each binary
    // pattern and solves the remaining LP by vertex enumeration
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for trial in 0..60 {
        let nb = rng.random_range(1..=5);
        let nc = rng.random_range(1..=2);
        let m = rng.random_range(1..=4);
        let mut lp = random_lp(&mut rng, nb + nc, m);
        for j in 0..nb {
            lp.lower[j] = 0.0;
            lp.upper[j] = 1.0;
        }
        let mut mip = MixedIntegerProgram::from_lp(lp.clone());
        for j in 0..nb {
            mip.set_kind(j, VarKind::Binary);
        }
        let mut best: Option<f64> = None;
        for mask in 0u32..(1 << nb) {
            let mut fixed = lp.clone();
            for j in 0..nb {
                let v = ((mask >> j) & 1) as f64;
                fixed.lower[j] = v;
                fixed.upper[j] = v;
            }
            if let Some(v) = vertex_oracle(&fixed) {
                best = Some(match (best, lp.sense) {
                    (None, _) => v,
                    (Some(b), Sense::Maximize) => b.max(v),
                    (Some(b), Sense::Minimize) => b.min(v),
                });
            }
        }
        let sol = solve_milp(&mip, 0.0).unwrap();
        match best {
            None => assert_eq!(sol.status, Status::Infeasible, "trial {trial}"),
            Some(v) => assert!(close(sol.objective, v, 1e-7), "trial {trial}: {} vs {v}", sol.objective),
        }
    }
}

#[test]
fn solves_are_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let mip = random_binary_program(&mut rng);
        let a = solve_milp(&mip, 0.0).unwrap();
        let b = solve_milp(&mip, 0.0).unwrap();
        assert_eq!(a.status, b.status);
        assert_eq!(a.x, b.x);
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
        assert_eq!((a.iterations, a.nodes), (b.iterations, b.nodes));
    }
}

#[test]
fn larger_transport_problem_is_consistent() {
    // supply/demand transport LP large enough to exercise refactorization
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (ns, nd) = (25, 30);
    let supply: Vec<f64> = (0..ns).map(|_| rng.random_range(1.0..10.0)).collect();
    let total: f64 = supply.iter().sum();
    let raw: Vec<f64> = (0..nd).map(|_| rng.random_range(1.0..10.0)).collect();
    let rs: f64 = raw.iter().sum();
    let demand: Vec<f64> = raw.iter().map(|d| d * total / rs).collect();
    let mut lp = LinearProgram::new(Sense::Minimize);
    let mut x = vec![vec![0; nd]; ns];
    for i in 0..ns {
        for j in 0..nd {
            x[i][j] = lp.add_var(0.0, f64::INFINITY, rng.random_range(0.0..5.0));
        }
    }
    for i in 0..ns {
        lp.add_row((0..nd).map(|j| (x[i][j], 1.0)).collect(), Comparator::Eq, supply[i]);
    }
    for j in 0..nd {
        lp.add_row((0..ns).map(|i| (x[i][j], 1.0)).collect(), Comparator::Eq, demand[j]);
    }
    let sol = solve_lp(&lp).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert!(lp.max_violation(&sol.x) <= 1e-7);
    let dual = sol.dual_objective(&lp, 1e-9).unwrap();
    assert!((dual - sol.objective).abs() <= 1e-6 * (1.0 + sol.objective.abs()));
    let reduced = sol.reduced_costs(&lp).unwrap();
    assert!(reduced.iter().all(|&d| d >= -1e-7));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn feasible_points_and_zero_duality_gap(seed in any::<u64>(), n in 1usize..6, m in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lp = random_lp(&mut rng, n, m);
        let sol = solve_lp(&lp).unwrap();
        if sol.status == Status::Optimal {
            prop_assert!(lp.max_violation(&sol.x) <= 1e-7);
            let dual = sol.dual_objective(&lp, 1e-9).unwrap();
            prop_assert!((dual - sol.objective).abs() <= 1e-6 * (1.0 + sol.objective.abs()));
        } else {
            // every program here is boxed, so only infeasibility is possible
            prop_assert_eq!(sol.status, Status::Infeasible);
            prop_assert!(vertex_oracle(&lp).is_none());
        }
    }
}
