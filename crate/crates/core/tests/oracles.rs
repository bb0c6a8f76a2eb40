//! Best responses against exhaustive enumeration, with randomized parameters.

mod common;

use proptest::prelude::*;
use xorbid::agents::{verify_result, Agent, BatteryParams, CostBlock, HeatUtilityParams, ThermalGeneratorParams};

use common::oracle_surplus;

fn prices(periods: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-60.0f64..260.0, periods)
}

fn generator() -> impl Strategy<Value = ThermalGeneratorParams> {
    (1usize..=4, 1usize..=4, 50.0f64..400.0, 0usize..3, 0usize..4).prop_map(|(up, down, ramp, initial, hours)| {
        let mut p = ThermalGeneratorParams::table1();
        p.min_up_time = up;
        p.min_down_time = down;
        p.ramp_up = ramp.max(p.min_stable);
        p.ramp_down = ramp.max(p.min_stable);
        p.initial_output = [0.0f64, 150.0, 300.0][initial].min(p.ramp_down);
        if p.initial_output > 0.0 {
            p.initial_on_hours = hours;
        } else {
            p.initial_off_hours = hours;
        }
        p.blocks = vec![
            CostBlock { width: 300.0, marginal_cost: 60.0 },
            CostBlock { width: 300.0, marginal_cost: 110.0 },
        ];
        p
    })
}

fn battery() -> impl Strategy<Value = BatteryParams> {
    (0.6f64..1.0, 0.6f64..1.0, 0.0f64..=1.0, 1.0f64..15.0).prop_map(|(ec, ed, start, rate)| {
        let mut p = BatteryParams::table1();
        p.charge_efficiency = ec;
        p.discharge_efficiency = ed;
        p.initial_soc = start * p.max_soc;
        p.max_charge = rate;
        p.max_discharge = 15.0 - rate + 1.0;
        p
    })
}

fn heat() -> impl Strategy<Value = HeatUtilityParams> {
    (proptest::collection::vec(0.0f64..40.0, 5), 0.0f64..=1.0, 0.0f64..0.2).prop_map(|(load, start, loss)| {
        let mut p = HeatUtilityParams::table1().truncated(5);
        p.heat_load = load;
        p.initial_storage = start * p.storage_capacity;
        p.storage_loss = loss;
        p
    })
}

fn check(agent: Agent, prices: &[f64]) -> Result<(), TestCaseError> {
    let r = agent.best_response(prices).unwrap();
    verify_result(&agent, prices, &r, 1e-7).unwrap();
    let oracle = oracle_surplus(&agent, prices);
    prop_assert!((r.surplus.max(0.0) - oracle).abs() <= 1e-6 * (1.0 + oracle.abs()), "{} vs {}", r.surplus, oracle);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn generator_matches_enumeration(p in generator(), lambda in prices(5)) {
        check(Agent::Generator(p), &lambda)?;
    }

    #[test]
    fn battery_matches_enumeration(p in battery(), lambda in prices(5)) {
        check(Agent::Battery(p), &lambda)?;
    }

    #[test]
    fn heat_matches_its_dispatch(p in heat(), lambda in prices(5)) {
        check(Agent::Heat(p), &lambda)?;
    }
}
