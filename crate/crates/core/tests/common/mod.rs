//! Exhaustive reference solvers for the agent models and small random-data helpers.
//!
//! Each oracle enumerates every on/off pattern and solves the remaining
//! dispatch as a plain LP, with storage levels written as running sums
//! instead of balance rows.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use xorbid::agents::{Agent, BatteryParams, HeatUtilityParams, ThermalGeneratorParams};
use xorbid::solver::{solve_lp, Comparator, LinearProgram, Sense, Status};

/// Best surplus at `prices`, floored at zero (staying out is always allowed).
pub fn oracle_surplus(agent: &Agent, prices: &[f64]) -> f64 {
    let best = match agent {
        Agent::Generator(p) => generator_oracle(p, prices),
        Agent::Battery(p) => battery_oracle(p, prices),
        Agent::Heat(p) => heat_oracle(p, prices),
    };
    best.max(0.0)
}

fn solve_max(lp: &LinearProgram) -> Option<f64> {
    let sol = solve_lp(lp).expect("oracle LP solves");
    match sol.status {
        Status::Optimal => Some(sol.objective),
        Status::Infeasible => None,
        other => panic!("oracle LP ended {other:?}"),
    }
}

/// Minimum up and down times, counted from each switch and cut at the horizon.
fn commitment_allowed(p: &ThermalGeneratorParams, on: &[bool]) -> bool {
    let start_on = p.initial_output > 0.0;
    let (must_on, must_off) = if start_on {
        (if p.initial_on_hours == 0 { 0 } else { p.min_up_time.saturating_sub(p.initial_on_hours) }, 0)
    } else {
        (0, if p.initial_off_hours == 0 { 0 } else { p.min_down_time.saturating_sub(p.initial_off_hours) })
    };
    if on.iter().take(must_on).any(|&u| !u) || on.iter().take(must_off).any(|&u| u) {
        return false;
    }
    let t_len = on.len();
    for t in 0..t_len {
        let prev = if t == 0 { start_on } else { on[t - 1] };
        if on[t] && !prev && t >= must_on && !on[t..(t + p.min_up_time).min(t_len)].iter().all(|&u| u) {
            return false;
        }
        if !on[t] && prev && t >= must_off && on[t..(t + p.min_down_time).min(t_len)].iter().any(|&u| u) {
            return false;
        }
    }
    true
}

pub fn generator_oracle(p: &ThermalGeneratorParams, prices: &[f64]) -> f64 {
    let t_len = prices.len();
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..1 << t_len {
        let on: Vec<bool> = (0..t_len).map(|t| mask >> t & 1 == 1).collect();
        if !commitment_allowed(p, &on) {
            continue;
        }
        let mut fixed = 0.0;
        let mut prev = p.initial_output > 0.0;
        for &u in &on {
            if u {
                fixed += p.no_load_cost;
            }
            if u && !prev {
                fixed += p.start_up_cost;
            }
            if !u && prev {
                fixed += p.shut_down_cost;
            }
            prev = u;
        }

        let mut lp = LinearProgram::new(Sense::Maximize);
        let mut output: Vec<Vec<usize>> = Vec::new();
        for (t, &price) in prices.iter().enumerate() {
            output.push(
                p.blocks
                    .iter()
                    .map(|b| lp.add_var(0.0, if on[t] { b.width } else { 0.0 }, price - b.marginal_cost))
                    .collect(),
            );
        }
        let total = |t: usize, sign: f64| output[t].iter().map(|&j| (j, sign)).collect::<Vec<_>>();
        for t in 0..t_len {
            if on[t] {
                lp.add_row(total(t, 1.0), Comparator::Ge, p.min_stable);
            }
            if t == 0 {
                lp.add_row(total(0, 1.0), Comparator::Le, p.initial_output + p.ramp_up);
                lp.add_row(total(0, 1.0), Comparator::Ge, p.initial_output - p.ramp_down);
            } else {
                let mut change = total(t, 1.0);
                change.extend(total(t - 1, -1.0));
                lp.add_row(change.clone(), Comparator::Le, p.ramp_up);
                lp.add_row(change, Comparator::Ge, -p.ramp_down);
            }
        }
        if let Some(v) = solve_max(&lp) {
            best = best.max(v - fixed);
        }
    }
    best
}

pub fn battery_oracle(p: &BatteryParams, prices: &[f64]) -> f64 {
    let t_len = prices.len();
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..1 << t_len {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let mut flows = Vec::new();
        for (t, &price) in prices.iter().enumerate() {
            let charging = mask >> t & 1 == 1;
            let g = lp.add_var(0.0, if charging { p.max_charge } else { 0.0 }, -price);
            let d = lp.add_var(0.0, if charging { 0.0 } else { p.max_discharge }, price);
            flows.push((g, d));
        }
        // stored energy after hour t is the initial level plus a running sum
        for t in 0..t_len {
            let level: Vec<(usize, f64)> = flows[..=t]
                .iter()
                .flat_map(|&(g, d)| [(g, p.charge_efficiency), (d, -1.0 / p.discharge_efficiency)])
                .collect();
            if t + 1 == t_len {
                lp.add_row(level, Comparator::Eq, 0.0);
            } else {
                lp.add_row(level.clone(), Comparator::Ge, p.min_soc - p.initial_soc);
                lp.add_row(level, Comparator::Le, p.max_soc - p.initial_soc);
            }
        }
        if let Some(v) = solve_max(&lp) {
            best = best.max(v);
        }
    }
    best
}

/// No integer decisions: one LP with served heat in place of curtailment,
/// measured from the same LP with the electric boiler switched off (or from
/// zero when that is infeasible).
pub fn heat_oracle(p: &HeatUtilityParams, prices: &[f64]) -> f64 {
    let mut off = p.clone();
    off.electric_capacity = 0.0;
    heat_dispatch(p, prices).expect("heat dispatch is feasible") - heat_dispatch(&off, prices).unwrap_or(0.0)
}

fn heat_dispatch(p: &HeatUtilityParams, prices: &[f64]) -> Option<f64> {
    let t_len = prices.len();
    let keep = 1.0 - p.storage_loss;
    let mut lp = LinearProgram::new(Sense::Maximize);
    let mut vars = Vec::new();
    for &price in prices {
        let x = lp.add_var(0.0, p.electric_capacity, -price);
        let y = lp.add_var(0.0, p.gas_capacity, -p.gas_cost);
        let g = lp.add_var(0.0, p.max_charge, 0.0);
        let d = lp.add_var(0.0, p.max_discharge, 0.0);
        vars.push((x, y, g, d));
    }
    for t in 0..t_len {
        let (x, y, g, d) = vars[t];
        let served = vec![(x, p.electric_efficiency), (y, p.gas_efficiency), (d, 1.0), (g, -1.0)];
        lp.add_row(served.clone(), Comparator::Le, p.heat_load[t]);
        lp.add_row(served, Comparator::Ge, 0.0);
        // value of served heat, split into per-variable objective terms
        for (j, c) in [(x, p.electric_efficiency), (y, p.gas_efficiency), (d, 1.0), (g, -1.0)] {
            lp.objective[j] += p.load_value * c;
        }

        let decay = |j: usize| keep.powi((t - j) as i32);
        let level: Vec<(usize, f64)> = (0..=t).flat_map(|j| [(vars[j].2, decay(j)), (vars[j].3, -decay(j))]).collect();
        let base = keep.powi(t as i32 + 1) * p.initial_storage;
        if t + 1 == t_len {
            lp.add_row(level, Comparator::Eq, p.initial_storage - base);
        } else {
            lp.add_row(level.clone(), Comparator::Ge, -base);
            lp.add_row(level, Comparator::Le, p.storage_capacity - base);
        }
    }
    solve_max(&lp)
}

pub fn random_prices(rng: &mut ChaCha8Rng, periods: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..periods).map(|_| rng.random_range(lo..hi)).collect()
}

/// n choose k as a float, for work estimates.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k.min(n - k)).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
