//! Battery storage with a charge/discharge mode binary per period.

use serde::{Deserialize, Serialize};

use super::{invalid, snap, AgentError, PowerProfile, Schedule, ValuationResult};
use crate::solver::{Comparator, MixedIntegerProgram, Sense, Solution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatteryParams {
    #[serde(rename = "maximum_charging_limit_mw")]
    pub max_charge: f64,
    #[serde(rename = "maximum_discharging_limit_mw")]
    pub max_discharge: f64,
    #[serde(rename = "charging_efficiency")]
    pub charge_efficiency: f64,
    #[serde(rename = "discharging_efficiency")]
    pub discharge_efficiency: f64,
    #[serde(rename = "minimum_feasible_state_of_charge_mwh")]
    pub min_soc: f64,
    #[serde(rename = "maximum_feasible_state_of_charge_mwh")]
    pub max_soc: f64,
    #[serde(rename = "initial_state_of_charge_mwh")]
    pub initial_soc: f64,
}

impl BatteryParams {
    /// The case-study battery.
    pub fn table1() -> Self {
        Self {
            max_charge: 10.0,
            max_discharge: 10.0,
            charge_efficiency: 0.9,
            discharge_efficiency: 0.9,
            min_soc: 0.0,
            max_soc: 20.0,
            initial_soc: 10.0,
        }
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        for (name, v) in [
            ("charging limit", self.max_charge),
            ("discharging limit", self.max_discharge),
            ("minimum state of charge", self.min_soc),
            ("maximum state of charge", self.max_soc),
            ("initial state of charge", self.initial_soc),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(invalid(format!("battery {name} must be finite and nonnegative, got {v}")));
            }
        }
        for (name, v) in [("charging", self.charge_efficiency), ("discharging", self.discharge_efficiency)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(invalid(format!("battery {name} efficiency must lie in (0, 1], got {v}")));
            }
        }
        if !(self.min_soc <= self.initial_soc && self.initial_soc <= self.max_soc) {
            return Err(invalid(format!(
                "initial state of charge {} lies outside [{}, {}]",
                self.initial_soc, self.min_soc, self.max_soc
            )));
        }
        Ok(())
    }

    pub(crate) fn model(&self, prices: &[f64], zero_profile: bool) -> (MixedIntegerProgram, Layout) {
        let t_len = prices.len();
        let mut mip = MixedIntegerProgram::new(Sense::Maximize);
        let mut layout = Layout { g: Vec::new(), d: Vec::new(), delta: Vec::new(), e: Vec::new() };
        let (g_hi, d_hi) = if zero_profile { (0.0, 0.0) } else { (self.max_charge, self.max_discharge) };
        for (t, &price) in prices.iter().enumerate() {
            layout.g.push(mip.add_named_var(format!("g_{t}"), 0.0, g_hi, -price));
            layout.d.push(mip.add_named_var(format!("d_{t}"), 0.0, d_hi, price));
            layout.delta.push(mip.add_binary(format!("delta_{t}"), 0.0));
            let (lo, hi) = if t + 1 == t_len { (self.initial_soc, self.initial_soc) } else { (self.min_soc, self.max_soc) };
            layout.e.push(mip.add_named_var(format!("e_{t}"), lo, hi, 0.0));
        }
        for t in 0..t_len {
            mip.add_row(vec![(layout.g[t], 1.0), (layout.delta[t], -self.max_charge)], Comparator::Le, 0.0);
            mip.add_row(vec![(layout.d[t], 1.0), (layout.delta[t], self.max_discharge)], Comparator::Le, self.max_discharge);
            let mut balance = vec![
                (layout.e[t], 1.0),
                (layout.g[t], -self.charge_efficiency),
                (layout.d[t], 1.0 / self.discharge_efficiency),
            ];
            let rhs = if t == 0 {
                self.initial_soc
            } else {
                balance.push((layout.e[t - 1], -1.0));
                0.0
            };
            mip.add_row(balance, Comparator::Eq, rhs);
        }
        (mip, layout)
    }

    pub(crate) fn extract(&self, prices: &[f64], layout: &Layout, sol: &Solution) -> ValuationResult {
        let charge: Vec<f64> = layout.g.iter().map(|&j| snap(sol.x[j], self.max_charge)).collect();
        let discharge: Vec<f64> = layout.d.iter().map(|&j| snap(sol.x[j], self.max_discharge)).collect();
        let charging_mode: Vec<bool> = layout.delta.iter().map(|&j| sol.x[j] > 0.5).collect();
        let state_of_charge: Vec<f64> = layout.e.iter().map(|&j| sol.x[j]).collect();
        let profile = PowerProfile(charge.iter().zip(&discharge).map(|(g, d)| g - d).collect());
        let valuation = 0.0;
        let surplus = valuation - profile.cost(prices);
        ValuationResult {
            profile,
            valuation,
            surplus,
            schedule: Schedule::Battery { charge, discharge, charging_mode, state_of_charge },
        }
    }
}

/// Variable indices of the battery model.
pub(crate) struct Layout {
    g: Vec<usize>,
    d: Vec<usize>,
    delta: Vec<usize>,
    e: Vec<usize>,
}
