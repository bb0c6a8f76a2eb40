//! Thermal unit-commitment generator.

use serde::{Deserialize, Serialize};

use super::{invalid, snap, AgentError, PowerProfile, Schedule, ValuationResult};
use crate::solver::{Comparator, MixedIntegerProgram, Sense, Solution};

/// One segment of the piecewise-linear marginal cost curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostBlock {
    #[serde(rename = "width_mw")]
    pub width: f64,
    #[serde(rename = "marginal_cost_eur_per_mwh")]
    pub marginal_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalGeneratorParams {
    #[serde(rename = "no_load_cost_eur_per_h")]
    pub no_load_cost: f64,
    #[serde(rename = "marginal_cost_blocks")]
    pub blocks: Vec<CostBlock>,
    #[serde(rename = "start_up_cost_eur")]
    pub start_up_cost: f64,
    #[serde(rename = "shut_down_cost_eur")]
    pub shut_down_cost: f64,
    #[serde(rename = "minimum_stable_generation_mw")]
    pub min_stable: f64,
    /// Must equal the sum of the block widths.
    #[serde(rename = "maximum_power_output_mw")]
    pub max_output: f64,
    #[serde(rename = "ramp_up_rate_mw_per_h")]
    pub ramp_up: f64,
    #[serde(rename = "ramp_down_rate_mw_per_h")]
    pub ramp_down: f64,
    #[serde(rename = "minimum_up_time_h")]
    pub min_up_time: usize,
    #[serde(rename = "minimum_downtime_h")]
    pub min_down_time: usize,
    /// Output in the hour before the horizon; zero means the unit is off.
    #[serde(rename = "initial_operating_state_mw")]
    pub initial_output: f64,
    #[serde(rename = "initial_off_hours_h")]
    pub initial_off_hours: usize,
    #[serde(rename = "initial_on_hours_h", default)]
    pub initial_on_hours: usize,
}

impl ThermalGeneratorParams {
    /// The case-study thermal plant.
    pub fn table1() -> Self {
        let block = |width, marginal_cost| CostBlock { width, marginal_cost };
        Self {
            no_load_cost: 10_000.0,
            blocks: vec![block(200.0, 70.0), block(200.0, 90.0), block(200.0, 120.0)],
            start_up_cost: 4_000.0,
            shut_down_cost: 3_000.0,
            min_stable: 100.0,
            max_output: 600.0,
            ramp_up: 200.0,
            ramp_down: 200.0,
            min_up_time: 4,
            min_down_time: 4,
            initial_output: 0.0,
            initial_off_hours: 0,
            initial_on_hours: 0,
        }
    }

    /// Total capacity, the sum of block widths.
    pub fn capacity(&self) -> f64 {
        self.blocks.iter().map(|b| b.width).sum()
    }

    pub fn initially_on(&self) -> bool {
        self.initial_output > 0.0
    }

    /// Remaining hours the unit must stay on and stay off at the start of the
    /// horizon. Zero recorded hours means no history, hence no obligation.
    pub fn initial_obligations(&self) -> (usize, usize) {
        if self.initially_on() {
            let up = if self.initial_on_hours == 0 { 0 } else { self.min_up_time.saturating_sub(self.initial_on_hours) };
            (up, 0)
        } else {
            let down = if self.initial_off_hours == 0 { 0 } else { self.min_down_time.saturating_sub(self.initial_off_hours) };
            (0, down)
        }
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        let scalars = [
            ("no-load cost", self.no_load_cost),
            ("start-up cost", self.start_up_cost),
            ("shut-down cost", self.shut_down_cost),
            ("minimum stable generation", self.min_stable),
            ("ramp-up rate", self.ramp_up),
            ("ramp-down rate", self.ramp_down),
            ("initial operating state", self.initial_output),
        ];
        for (name, v) in scalars {
            if !v.is_finite() || v < 0.0 {
                return Err(invalid(format!("generator {name} must be finite and nonnegative, got {v}")));
            }
        }
        if self.blocks.is_empty() {
            return Err(invalid("generator needs at least one cost block"));
        }
        for (k, b) in self.blocks.iter().enumerate() {
            if !(b.width.is_finite() && b.width >= 0.0 && b.marginal_cost.is_finite() && b.marginal_cost >= 0.0) {
                return Err(invalid(format!("generator block {k} needs finite nonnegative width and cost")));
            }
        }
        if self.blocks.windows(2).any(|w| w[1].marginal_cost < w[0].marginal_cost) {
            return Err(invalid("generator marginal costs must be non-decreasing across blocks"));
        }
        let cap = self.capacity();
        if (cap - self.max_output).abs() > 1e-9 * cap.max(1.0) {
            return Err(invalid(format!("maximum power output {} differs from the block total {cap}", self.max_output)));
        }
        if self.min_stable > cap {
            return Err(invalid(format!("minimum stable generation {} exceeds capacity {cap}", self.min_stable)));
        }
        if self.min_up_time == 0 || self.min_down_time == 0 {
            return Err(invalid("minimum up and down times must be at least one hour"));
        }
        if self.initially_on() {
            if self.initial_output < self.min_stable || self.initial_output > cap {
                return Err(invalid(format!(
                    "initial operating state {} MW lies outside [{}, {cap}]",
                    self.initial_output, self.min_stable
                )));
            }
            if self.initial_off_hours > 0 {
                return Err(invalid("a unit with positive initial output cannot report initial off hours"));
            }
        } else if self.initial_on_hours > 0 {
            return Err(invalid("a unit with zero initial output cannot report initial on hours"));
        }
        Ok(())
    }

    pub(crate) fn model(&self, prices: &[f64], zero_profile: bool) -> (MixedIntegerProgram, Layout) {
        let t_len = prices.len();
        let nk = self.blocks.len();
        let (must_on, must_off) = self.initial_obligations();
        let u0 = if self.initially_on() { 1.0 } else { 0.0 };
        let mut mip = MixedIntegerProgram::new(Sense::Maximize);
        let mut layout = Layout { u: Vec::new(), p: Vec::new(), cup: Vec::new(), cdn: Vec::new() };
        for (t, &price) in prices.iter().enumerate() {
            let u = mip.add_binary(format!("u_{t}"), -self.no_load_cost);
            if t < must_on {
                mip.lp.lower[u] = 1.0;
            }
            if t < must_off {
                mip.lp.upper[u] = 0.0;
            }
            layout.u.push(u);
            let blocks: Vec<usize> = self
                .blocks
                .iter()
                .enumerate()
                .map(|(k, b)| {
                    let hi = if zero_profile { 0.0 } else { b.width };
                    mip.add_named_var(format!("p_{t}_{k}"), 0.0, hi, price - b.marginal_cost)
                })
                .collect();
            layout.p.push(blocks);
            layout.cup.push(mip.add_named_var(format!("cup_{t}"), 0.0, f64::INFINITY, -1.0));
            layout.cdn.push(mip.add_named_var(format!("cdn_{t}"), 0.0, f64::INFINITY, -1.0));
        }
        let total = |t: usize, sign: f64| -> Vec<(usize, f64)> { layout.p[t].iter().map(|&j| (j, sign)).collect() };
        for t in 0..t_len {
            let u = layout.u[t];
            for k in 0..nk {
                mip.add_row(vec![(layout.p[t][k], 1.0), (u, -self.blocks[k].width)], Comparator::Le, 0.0);
            }
            let mut row = total(t, 1.0);
            row.push((u, -self.min_stable));
            mip.add_row(row, Comparator::Ge, 0.0);

            // ramping on total output, with the pre-horizon output as a constant
            if t == 0 {
                mip.add_row(total(0, 1.0), Comparator::Le, self.initial_output + self.ramp_up);
                mip.add_row(total(0, 1.0), Comparator::Ge, self.initial_output - self.ramp_down);
            } else {
                let mut up = total(t, 1.0);
                up.extend(total(t - 1, -1.0));
                mip.add_row(up, Comparator::Le, self.ramp_up);
                let mut down = total(t - 1, 1.0);
                down.extend(total(t, -1.0));
                mip.add_row(down, Comparator::Le, self.ramp_down);
            }

            // start-up and shut-down costs
            let (prev, prev_const) = if t == 0 { (None, u0) } else { (Some(layout.u[t - 1]), 0.0) };
            let mut start = vec![(layout.cup[t], 1.0), (u, -self.start_up_cost)];
            let mut stop = vec![(layout.cdn[t], 1.0), (u, self.shut_down_cost)];
            if let Some(pu) = prev {
                start.push((pu, self.start_up_cost));
                stop.push((pu, -self.shut_down_cost));
            }
            mip.add_row(start, Comparator::Ge, -self.start_up_cost * prev_const);
            mip.add_row(stop, Comparator::Ge, self.shut_down_cost * prev_const);
        }

        // minimum up and down times
        let switch = |t: usize, scale: f64| -> (Vec<(usize, f64)>, f64) {
            // scale * (u_t - u_{t-1}) as coefficients plus a constant
            let mut coeffs = vec![(layout.u[t], scale)];
            let constant = if t == 0 {
                -scale * u0
            } else {
                coeffs.push((layout.u[t - 1], -scale));
                0.0
            };
            (coeffs, constant)
        };
        let tu = self.min_up_time;
        let td = self.min_down_time;
        for t in must_on..t_len {
            // sum_{j=t}^{end} u_j - len * (u_t - u_{t-1}) >= 0
            let end = (t + tu).min(t_len);
            let len = (end - t) as f64;
            let (mut row, constant) = switch(t, -len);
            row.extend((t..end).map(|j| (layout.u[j], 1.0)));
            mip.add_row(row, Comparator::Ge, -constant);
        }
        for t in must_off..t_len {
            // sum_{j=t}^{end} (1 - u_j) + len * (u_t - u_{t-1}) >= 0
            let end = (t + td).min(t_len);
            let len = (end - t) as f64;
            let (mut row, constant) = switch(t, len);
            row.extend((t..end).map(|j| (layout.u[j], -1.0)));
            mip.add_row(row, Comparator::Ge, -len - constant);
        }
        (mip, layout)
    }

    pub(crate) fn extract(&self, prices: &[f64], layout: &Layout, sol: &Solution) -> ValuationResult {
        let commitment: Vec<bool> = layout.u.iter().map(|&j| sol.x[j] > 0.5).collect();
        let block_output: Vec<Vec<f64>> = layout
            .p
            .iter()
            .zip(&commitment)
            .map(|(row, &on)| {
                row.iter()
                    .zip(&self.blocks)
                    .map(|(&j, b)| if on { snap(sol.x[j], b.width) } else { 0.0 })
                    .collect()
            })
            .collect();
        // `0.0 - sum` keeps idle hours at +0.0
        let profile = PowerProfile(block_output.iter().map(|row| 0.0 - row.iter().sum::<f64>()).collect());
        let schedule = Schedule::Generator { commitment, block_output };
        let valuation = self.valuation_of(&schedule);
        let surplus = valuation - profile.cost(prices);
        ValuationResult { profile, valuation, surplus, schedule }
    }

    /// Operating cost of a schedule as a (nonpositive) valuation.
    pub(crate) fn valuation_of(&self, schedule: &Schedule) -> f64 {
        let Schedule::Generator { commitment, block_output } = schedule else {
            return f64::NAN;
        };
        let mut prev = self.initially_on();
        let mut cost = 0.0;
        for (t, &on) in commitment.iter().enumerate() {
            if on {
                cost += self.no_load_cost;
            }
            if on && !prev {
                cost += self.start_up_cost;
            }
            if !on && prev {
                cost += self.shut_down_cost;
            }
            cost += block_output[t].iter().zip(&self.blocks).map(|(p, b)| p * b.marginal_cost).sum::<f64>();
            prev = on;
        }
        -cost
    }
}

/// Variable indices of the unit-commitment model.
pub(crate) struct Layout {
    u: Vec<usize>,
    p: Vec<Vec<usize>>,
    cup: Vec<usize>,
    cdn: Vec<usize>,
}
