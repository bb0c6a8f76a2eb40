use super::*;
use crate::agents::{BatteryParams, HeatUtilityParams, ThermalGeneratorParams};
use crate::bids::PackageBid;
use crate::scenarios::ScenarioSet;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bid(profile: Vec<f64>, price: f64) -> PackageBid {
    PackageBid { profile: PowerProfile::new(profile).unwrap(), price }
}

fn group(bids: Vec<PackageBid>) -> ExclusiveGroup {
    let limit = bids.len().max(1);
    ExclusiveGroup::new(bids, limit).unwrap()
}

#[test]
fn clearing_examples() {
    let g = group(vec![bid(vec![1.0, 0.0, 0.0], 50.0)]);
    let out = clear_xor(&g, &[45.0, 10.0, 10.0]).unwrap();
    assert_eq!(out.accepted, Some(0));
    assert!((out.surplus - 5.0).abs() < 1e-12);
    assert!((out.payment - 45.0).abs() < 1e-12);

    let out = clear_xor(&g, &[55.0, 10.0, 10.0]).unwrap();
    assert_eq!(out.accepted, None);
    assert_eq!(out.surplus, 0.0);
    assert!(out.profile.is_zero());

    let g = group(vec![bid(vec![1.0, 0.0], 13.0), bid(vec![0.0, 1.0], 17.0)]);
    let out = clear_xor(&g, &[10.0, 10.0]).unwrap();
    assert_eq!(out.accepted, Some(1));
    assert!((out.surplus - 7.0).abs() < 1e-12);
}

#[test]
fn clearing_ties() {
    // a bid with exactly zero surplus loses to the zero bid
    let g = group(vec![bid(vec![1.0], 20.0)]);
    assert_eq!(clear_xor(&g, &[20.0]).unwrap().accepted, None);
    // equal surpluses go to the lower index
    let g = group(vec![bid(vec![1.0, 0.0], 15.0), bid(vec![0.0, 1.0], 15.0)]);
    assert_eq!(clear_xor(&g, &[10.0, 10.0]).unwrap().accepted, Some(0));
}

#[test]
fn clearing_rejects_bad_prices() {
    let g = group(vec![bid(vec![1.0, 0.0], 15.0)]);
    assert!(matches!(clear_xor(&g, &[1.0]), Err(MarketError::Invalid(_))));
    assert!(matches!(clear_xor(&g, &[1.0, f64::NAN]), Err(MarketError::Invalid(_))));
}

fn battery() -> Agent {
    Agent::Battery(BatteryParams::table1())
}

#[test]
fn profit_loss_vanishes_on_generating_scenarios() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let agents = [
        battery(),
        Agent::Heat(HeatUtilityParams::table1().truncated(8)),
        Agent::Generator(ThermalGeneratorParams::table1()),
    ];
    for agent in agents {
        let prices: Vec<Vec<f64>> = (0..4).map(|_| (0..8).map(|_| rng.random_range(-20.0..120.0)).collect()).collect();
        let set = ScenarioSet::uniform(prices.clone()).unwrap();
        let candidates = crate::bids::enumerate_candidates(&agent, &set).unwrap();
        for p in &prices {
            let loss = profit_loss(&agent, &candidates, p).unwrap();
            assert!(loss.abs() < 1e-6, "{:?}: loss {loss}", agent.kind());
        }
    }
}

#[test]
fn gas_only_days_lose_nothing() {
    // power too dear to buy in every scenario: the zero bid is the best response
    let agent = Agent::Heat(HeatUtilityParams::table1().truncated(4));
    let set = ScenarioSet::uniform(vec![vec![150.0; 4], vec![160.0; 4]]).unwrap();
    let candidates = crate::bids::enumerate_candidates(&agent, &set).unwrap();
    assert!(candidates.is_empty());
    for p in set.prices() {
        assert_eq!(unrestricted_surplus(&agent, p).unwrap(), 0.0);
        assert_eq!(profit_loss(&agent, &candidates, p).unwrap(), 0.0);
    }
}

#[test]
fn missed_spike_costs_the_whole_arbitrage() {
    let agent = battery();
    let flat = ScenarioSet::uniform(vec![vec![40.0; 24], vec![55.0; 24]]).unwrap();
    let candidates = crate::bids::enumerate_candidates(&agent, &flat).unwrap();
    assert!(candidates.is_empty());
    let mut spike = vec![0.0; 24];
    spike[23] = 100.0;
    let loss = profit_loss(&agent, &candidates, &spike).unwrap();
    assert!((loss - 900.0).abs() < 1e-6, "{loss}");
    // nothing restricted at all: the loss is the best-response surplus
    assert!((loss - unrestricted_surplus(&agent, &spike).unwrap()).abs() < 1e-12);
}

#[test]
fn measure_validation() {
    assert!(DiscreteMeasure::new(vec![], vec![]).is_err());
    assert!(DiscreteMeasure::new(vec![vec![1.0]], vec![0.9]).is_err());
    assert!(DiscreteMeasure::new(vec![vec![1.0], vec![2.0]], vec![1.5, -0.5]).is_err());
    assert!(DiscreteMeasure::new(vec![vec![1.0], vec![2.0, 3.0]], vec![0.5, 0.5]).is_err());
    let a = DiscreteMeasure::degenerate(vec![1.0]).unwrap();
    let b = DiscreteMeasure::degenerate(vec![1.0, 2.0]).unwrap();
    assert!(wasserstein_distance(&a, &b).is_err());
}

#[test]
fn distance_examples() {
    let p = DiscreteMeasure::uniform(vec![vec![0.0], vec![2.0]]).unwrap();
    assert!(wasserstein_distance(&p, &p).unwrap().abs() < 1e-12);
    let q = DiscreteMeasure::degenerate(vec![1.0]).unwrap();
    assert!((wasserstein_distance(&p, &q).unwrap() - 1.0).abs() < 1e-12);
    assert!((transport_distance(&p, &q).unwrap() - 1.0).abs() < 1e-9);
}

/// Minimum over the two extreme couplings of a 2x2 transport problem.
fn two_by_two_oracle(p: &DiscreteMeasure, q: &DiscreteMeasure) -> f64 {
    let c = |i: usize, j: usize| {
        p.points()[i].iter().zip(&q.points()[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    };
    let (p1, q1, q2) = (p.probabilities()[0], q.probabilities()[0], q.probabilities()[1]);
    let cost = |t: f64| t * c(0, 0) + (p1 - t) * c(0, 1) + (q1 - t) * c(1, 0) + (q2 - p1 + t) * c(1, 1);
    let lo = (p1 - q2).max(0.0);
    let hi = p1.min(q1);
    cost(lo).min(cost(hi))
}

#[test]
fn crossing_two_by_two_matches_extreme_plans() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..50 {
        let point = |rng: &mut ChaCha8Rng| (0..3).map(|_| rng.random_range(-5.0..5.0)).collect::<Vec<f64>>();
        let a: f64 = rng.random_range(0.05..0.95);
        let b: f64 = rng.random_range(0.05..0.95);
        let p = DiscreteMeasure::new(vec![point(&mut rng), point(&mut rng)], vec![a, 1.0 - a]).unwrap();
        let q = DiscreteMeasure::new(vec![point(&mut rng), point(&mut rng)], vec![b, 1.0 - b]).unwrap();
        let d = wasserstein_distance(&p, &q).unwrap();
        assert!((d - two_by_two_oracle(&p, &q)).abs() < 1e-9);
    }
}

/// In one dimension the distance is the area between the two CDFs.
fn cdf_oracle(p: &DiscreteMeasure, q: &DiscreteMeasure) -> f64 {
    let mut xs: Vec<f64> = p.points().iter().chain(q.points()).map(|v| v[0]).collect();
    xs.sort_by(f64::total_cmp);
    let cdf = |m: &DiscreteMeasure, x: f64| -> f64 {
        m.points().iter().zip(m.probabilities()).filter(|(v, _)| v[0] <= x).map(|(_, w)| w).sum()
    };
    xs.windows(2).map(|w| (cdf(p, w[0]) - cdf(q, w[0])).abs() * (w[1] - w[0])).sum()
}

fn measure(dim: usize, max_points: usize) -> impl Strategy<Value = DiscreteMeasure> {
    (1..=max_points)
        .prop_flat_map(move |n| {
            (
                proptest::collection::vec(proptest::collection::vec(-10.0..10.0f64, dim), n),
                proptest::collection::vec(0.05..1.0f64, n),
            )
        })
        .prop_map(|(points, weights)| {
            let total: f64 = weights.iter().sum();
            DiscreteMeasure::new(points, weights.iter().map(|w| w / total).collect()).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distance_matches_cdf_area_in_one_dimension(p in measure(1, 6), q in measure(1, 6)) {
        let d = transport_distance(&p, &q).unwrap();
        prop_assert!((d - cdf_oracle(&p, &q)).abs() < 1e-8);
    }

    #[test]
    fn distance_is_a_metric(p in measure(3, 5), q in measure(3, 5), r in measure(3, 5)) {
        let pq = wasserstein_distance(&p, &q).unwrap();
        let qp = wasserstein_distance(&q, &p).unwrap();
        let qr = wasserstein_distance(&q, &r).unwrap();
        let pr = wasserstein_distance(&p, &r).unwrap();
        prop_assert!((pq - qp).abs() < 1e-6);
        prop_assert!(wasserstein_distance(&p, &p).unwrap().abs() < 1e-6);
        prop_assert!(pr <= pq + qr + 1e-6);
    }

    #[test]
    fn closed_form_matches_the_program(p in measure(4, 8), atom in proptest::collection::vec(-10.0..10.0f64, 4)) {
        let q = DiscreteMeasure::degenerate(atom).unwrap();
        let closed = wasserstein_distance(&p, &q).unwrap();
        let program = transport_distance(&p, &q).unwrap();
        prop_assert!((closed - program).abs() < 1e-8);
    }

    #[test]
    fn clearing_surplus_is_the_best_nonnegative_surplus(
        prices in proptest::collection::vec(-50.0..150.0f64, 4),
        raw in proptest::collection::vec((proptest::collection::vec(-5.0..5.0f64, 4), 0.0..400.0f64), 1..6),
    ) {
        let bids: Vec<PackageBid> = raw.into_iter().map(|(x, p)| bid(x, p)).collect();
        let g = group(bids);
        let out = clear_xor(&g, &prices).unwrap();
        let best = g.bids().iter().map(|b| b.surplus(&prices)).fold(0.0, f64::max);
        prop_assert_eq!(out.surplus, best);
        prop_assert!(out.surplus >= 0.0);
        prop_assert!((out.payment - out.profile.cost(&prices)).abs() < 1e-9);
    }

    #[test]
    fn truthful_bids_never_clear_at_a_loss(
        prices in proptest::collection::vec(-50.0..150.0f64, 6),
    ) {
        let agent = battery();
        let set = ScenarioSet::uniform(vec![prices.iter().map(|p| p * 0.8).collect(), prices.clone()]).unwrap();
        let candidates = crate::bids::enumerate_candidates(&agent, &set).unwrap();
        let g = crate::bids::select_all(&candidates, 2).unwrap();
        let out = clear_xor(&g, &prices).unwrap();
        // with truthful prices the cleared surplus is the restricted maximum
        prop_assert!((out.surplus - restricted_surplus(&candidates, &prices)).abs() < 1e-9);
        prop_assert!(out.surplus <= unrestricted_surplus(&agent, &prices).unwrap() + 1e-6);
    }
}

#[test]
fn bound_examples() {
    let agent = battery();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let prices: Vec<Vec<f64>> = (0..3).map(|_| (0..6).map(|_| rng.random_range(0.0..100.0)).collect()).collect();
    let q = ScenarioSet::uniform(prices.clone()).unwrap();
    let p = DiscreteMeasure::uniform(prices.clone()).unwrap();
    let report = check_wasserstein_bound(&agent, &p, &q).unwrap();
    assert!(report.expected_loss.abs() < 1e-6 && report.distance.abs() < 1e-9 && report.holds);

    let single = ScenarioSet::uniform(vec![prices[0].clone()]).unwrap();
    let atom = DiscreteMeasure::degenerate(prices[0].clone()).unwrap();
    let report = check_wasserstein_bound(&agent, &atom, &single).unwrap();
    assert!(report.expected_loss.abs() < 1e-6 && report.bound.abs() < 1e-9 && report.holds);

    let json = serde_json::to_value(&report).unwrap();
    for key in ["E_gamma", "L", "d_W", "L_times_dW", "holds"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn bound_holds_on_perturbed_battery_prices() {
    let agent = battery();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let base: Vec<f64> = (0..8).map(|t| 40.0 + 30.0 * ((t as f64) / 3.0).sin()).collect();
    let scenarios: Vec<Vec<f64>> =
        (0..5).map(|_| base.iter().map(|b| b + rng.random_range(-20.0..20.0)).collect()).collect();
    let sample: Vec<Vec<f64>> =
        (0..20).map(|_| base.iter().map(|b| b + rng.random_range(-40.0..40.0)).collect()).collect();
    let q = ScenarioSet::uniform(scenarios).unwrap();
    let p = DiscreteMeasure::uniform(sample).unwrap();
    let report = check_wasserstein_bound(&agent, &p, &q).unwrap();
    assert!(report.holds, "{report:?}");
    assert!(report.expected_loss > 0.0);
}
