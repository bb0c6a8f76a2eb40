//! Feasibility check of a best-response schedule without re-solving its model.

use super::{Agent, AgentError, BatteryParams, HeatUtilityParams, Schedule, ThermalGeneratorParams, ValuationResult};
use crate::solver::Solver;

struct Checker {
    tol: f64,
}

impl Checker {
    fn le(&self, a: f64, b: f64, what: impl FnOnce() -> String) -> Result<(), AgentError> {
        if a <= b + self.tol * (1.0 + b.abs()) {
            Ok(())
        } else {
            Err(AgentError::Verification(format!("{}: {a} > {b}", what())))
        }
    }

    fn eq(&self, a: f64, b: f64, what: impl FnOnce() -> String) -> Result<(), AgentError> {
        if (a - b).abs() <= self.tol * (1.0 + a.abs().max(b.abs())) {
            Ok(())
        } else {
            Err(AgentError::Verification(format!("{}: {a} != {b}", what())))
        }
    }

    fn len(&self, got: usize, want: usize, what: &str) -> Result<(), AgentError> {
        if got == want {
            Ok(())
        } else {
            Err(AgentError::Verification(format!("{what} has {got} entries, expected {want}")))
        }
    }
}

/// Re-checks every model constraint, the profile, the valuation and the
/// surplus of `result` at `prices`, with relative tolerance `tol`.
pub fn verify_result(agent: &Agent, prices: &[f64], result: &ValuationResult, tol: f64) -> Result<(), AgentError> {
    let c = Checker { tol };
    c.len(result.profile.len(), prices.len(), "profile")?;
    let (profile, valuation) = match (agent, &result.schedule) {
        (Agent::Generator(p), Schedule::Generator { commitment, block_output }) => check_generator(&c, p, commitment, block_output)?,
        (Agent::Battery(p), Schedule::Battery { charge, discharge, charging_mode, state_of_charge }) => {
            check_battery(&c, p, charge, discharge, charging_mode, state_of_charge)?
        }
        (Agent::Heat(p), Schedule::Heat { electric, gas, curtailed, charge, discharge, storage }) => {
            check_heat(&c, p, electric, gas, curtailed, charge, discharge, storage)?
        }
        _ => return Err(AgentError::Verification("schedule kind does not match the agent".into())),
    };
    c.len(profile.len(), prices.len(), "schedule")?;
    for (t, (a, b)) in result.profile.iter().zip(&profile).enumerate() {
        c.eq(*a, *b, || format!("profile entry {t} disagrees with the schedule"))?;
    }
    c.eq(result.valuation, valuation, || "valuation".into())?;
    let payment: f64 = profile.iter().zip(prices).map(|(x, p)| x * p).sum();
    c.eq(result.surplus, valuation - payment, || "surplus".into())?;
    Ok(())
}

fn check_generator(
    c: &Checker,
    p: &ThermalGeneratorParams,
    commitment: &[bool],
    block_output: &[Vec<f64>],
) -> Result<(Vec<f64>, f64), AgentError> {
    let t_len = commitment.len();
    c.len(block_output.len(), t_len, "block output")?;
    let (must_on, must_off) = p.initial_obligations();
    let mut prev_on = p.initially_on();
    let mut prev_out = p.initial_output;
    let mut cost = 0.0;
    let mut profile = Vec::with_capacity(t_len);
    // hours left of the current minimum on or off run
    let mut locked_on = must_on;
    let mut locked_off = must_off;
    for t in 0..t_len {
        let on = commitment[t];
        c.len(block_output[t].len(), p.blocks.len(), "block row")?;
        if locked_on > 0 && !on {
            return Err(AgentError::Verification(format!("unit shut down in hour {t} inside a minimum up period")));
        }
        if locked_off > 0 && on {
            return Err(AgentError::Verification(format!("unit started in hour {t} inside a minimum down period")));
        }
        if on && !prev_on {
            locked_on = p.min_up_time;
            cost += p.start_up_cost;
        }
        if !on && prev_on {
            locked_off = p.min_down_time;
            cost += p.shut_down_cost;
        }
        locked_on = locked_on.saturating_sub(1);
        locked_off = locked_off.saturating_sub(1);

        let u = if on { 1.0 } else { 0.0 };
        let mut out = 0.0;
        for (k, (&q, b)) in block_output[t].iter().zip(&p.blocks).enumerate() {
            c.le(0.0, q, || format!("block {k} output in hour {t} is negative"))?;
            c.le(q, b.width * u, || format!("block {k} output in hour {t} exceeds its width"))?;
            out += q;
            cost += b.marginal_cost * q;
        }
        c.le(p.min_stable * u, out, || format!("output below minimum stable generation in hour {t}"))?;
        c.le(out - prev_out, p.ramp_up, || format!("ramp-up limit in hour {t}"))?;
        c.le(prev_out - out, p.ramp_down, || format!("ramp-down limit in hour {t}"))?;
        cost += p.no_load_cost * u;
        profile.push(-out);
        prev_on = on;
        prev_out = out;
    }
    Ok((profile, -cost))
}

fn check_battery(
    c: &Checker,
    p: &BatteryParams,
    charge: &[f64],
    discharge: &[f64],
    mode: &[bool],
    soc: &[f64],
) -> Result<(Vec<f64>, f64), AgentError> {
    let t_len = charge.len();
    for (v, name) in [(discharge.len(), "discharge"), (mode.len(), "mode"), (soc.len(), "state of charge")] {
        c.len(v, t_len, name)?;
    }
    let mut e = p.initial_soc;
    for t in 0..t_len {
        let delta = if mode[t] { 1.0 } else { 0.0 };
        c.le(0.0, charge[t], || format!("negative charge in hour {t}"))?;
        c.le(0.0, discharge[t], || format!("negative discharge in hour {t}"))?;
        c.le(charge[t], p.max_charge * delta, || format!("charge limit or mode in hour {t}"))?;
        c.le(discharge[t], p.max_discharge * (1.0 - delta), || format!("discharge limit or mode in hour {t}"))?;
        e += p.charge_efficiency * charge[t] - discharge[t] / p.discharge_efficiency;
        c.eq(soc[t], e, || format!("state-of-charge balance in hour {t}"))?;
        c.le(p.min_soc, soc[t], || format!("state of charge below minimum in hour {t}"))?;
        c.le(soc[t], p.max_soc, || format!("state of charge above maximum in hour {t}"))?;
        e = soc[t];
    }
    if t_len > 0 {
        c.eq(soc[t_len - 1], p.initial_soc, || "final state of charge".into())?;
    }
    Ok((charge.iter().zip(discharge).map(|(g, d)| g - d).collect(), 0.0))
}

#[allow(clippy::too_many_arguments)]
fn check_heat(
    c: &Checker,
    p: &HeatUtilityParams,
    electric: &[f64],
    gas: &[f64],
    curtailed: &[f64],
    charge: &[f64],
    discharge: &[f64],
    storage: &[f64],
) -> Result<(Vec<f64>, f64), AgentError> {
    let t_len = electric.len();
    c.len(p.heat_load.len(), t_len, "heat load")?;
    for (v, name) in [
        (gas.len(), "gas"),
        (curtailed.len(), "curtailment"),
        (charge.len(), "charge"),
        (discharge.len(), "discharge"),
        (storage.len(), "storage"),
    ] {
        c.len(v, t_len, name)?;
    }
    let keep = 1.0 - p.storage_loss;
    let mut e = p.initial_storage;
    for t in 0..t_len {
        let load = p.heat_load[t];
        for (v, hi, name) in [
            (electric[t], p.electric_capacity, "electric boiler"),
            (gas[t], p.gas_capacity, "gas boiler"),
            (curtailed[t], load, "curtailment"),
            (charge[t], p.max_charge, "storage charge"),
            (discharge[t], p.max_discharge, "storage discharge"),
            (storage[t], p.storage_capacity, "storage level"),
        ] {
            c.le(0.0, v, || format!("{name} negative in hour {t}"))?;
            c.le(v, hi, || format!("{name} above its limit in hour {t}"))?;
        }
        let served = p.electric_efficiency * electric[t] + p.gas_efficiency * gas[t] + discharge[t] - charge[t];
        c.eq(served, load - curtailed[t], || format!("heat balance in hour {t}"))?;
        c.eq(storage[t], keep * e + charge[t] - discharge[t], || format!("storage balance in hour {t}"))?;
        e = storage[t];
    }
    if t_len > 0 {
        c.eq(storage[t_len - 1], p.initial_storage, || "final storage level".into())?;
    }
    let value = p.served_value(gas, curtailed) - p.gas_only_value(&Solver::default())?;
    Ok((electric.to_vec(), value))
}
