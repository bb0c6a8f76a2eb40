//! District heating utility with an electric boiler, a gas boiler and heat storage.

use serde::{Deserialize, Serialize};

use super::{invalid, snap, AgentError, PowerProfile, Schedule, ValuationResult};
use crate::solver::{Comparator, MixedIntegerProgram, Sense, Solution, Solver, Status};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatUtilityParams {
    #[serde(rename = "efficiency_electric_boiler")]
    pub electric_efficiency: f64,
    #[serde(rename = "efficiency_gas_boiler")]
    pub gas_efficiency: f64,
    /// Fraction of stored heat lost per hour.
    #[serde(rename = "storage_losses_per_h")]
    pub storage_loss: f64,
    #[serde(rename = "cost_gas_eur_per_mwh")]
    pub gas_cost: f64,
    #[serde(rename = "value_of_served_load_eur_per_mwh")]
    pub load_value: f64,
    #[serde(rename = "capacity_electric_boiler_mw")]
    pub electric_capacity: f64,
    #[serde(rename = "capacity_gas_boiler_mw")]
    pub gas_capacity: f64,
    #[serde(rename = "capacity_heat_storage_mwh")]
    pub storage_capacity: f64,
    #[serde(rename = "maximum_storage_charging_limit_mw")]
    pub max_charge: f64,
    #[serde(rename = "maximum_storage_discharging_limit_mw")]
    pub max_discharge: f64,
    #[serde(rename = "initial_state_of_charge_storage_mwh")]
    pub initial_storage: f64,
    #[serde(rename = "hourly_heat_load_mw")]
    pub heat_load: Vec<f64>,
}

impl HeatUtilityParams {
    /// The case-study heat utility.
    pub fn table1() -> Self {
        Self {
            electric_efficiency: 1.0,
            gas_efficiency: 0.9,
            storage_loss: 0.01,
            gas_cost: 90.0,
            load_value: 120.0,
            electric_capacity: 30.0,
            gas_capacity: 10.0,
            storage_capacity: 40.0,
            max_charge: 20.0,
            max_discharge: 20.0,
            initial_storage: 0.0,
            heat_load: vec![
                19.0, 20.0, 20.0, 21.0, 24.0, 32.0, 38.0, 36.0, 36.0, 35.0, 33.0, 32.0, 31.0, 31.0, 31.0, 32.0, 33.0,
                33.0, 33.0, 33.0, 32.0, 29.0, 23.0, 20.0,
            ],
        }
    }

    /// Same utility with the load cut to its first `periods` hours.
    pub fn truncated(&self, periods: usize) -> Self {
        let mut p = self.clone();
        p.heat_load.truncate(periods);
        p
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        for (name, v) in [("electric boiler", self.electric_efficiency), ("gas boiler", self.gas_efficiency)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(invalid(format!("{name} efficiency must lie in (0, 1], got {v}")));
            }
        }
        if !(self.storage_loss >= 0.0 && self.storage_loss < 1.0) {
            return Err(invalid(format!("storage loss must lie in [0, 1), got {}", self.storage_loss)));
        }
        for (name, v) in [
            ("gas cost", self.gas_cost),
            ("value of served load", self.load_value),
            ("electric boiler capacity", self.electric_capacity),
            ("gas boiler capacity", self.gas_capacity),
            ("storage capacity", self.storage_capacity),
            ("storage charging limit", self.max_charge),
            ("storage discharging limit", self.max_discharge),
            ("initial storage", self.initial_storage),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(invalid(format!("heat utility {name} must be finite and nonnegative, got {v}")));
            }
        }
        if self.initial_storage > self.storage_capacity {
            return Err(invalid("initial storage exceeds storage capacity"));
        }
        if self.heat_load.is_empty() {
            return Err(invalid("heat load must cover at least one hour"));
        }
        if let Some(t) = self.heat_load.iter().position(|d| !d.is_finite() || *d < 0.0) {
            return Err(invalid(format!("heat load in hour {t} must be finite and nonnegative")));
        }
        Ok(())
    }

    pub(crate) fn model(&self, prices: &[f64], zero_profile: bool) -> (MixedIntegerProgram, Layout) {
        let t_len = prices.len();
        let mut mip = MixedIntegerProgram::new(Sense::Maximize);
        let mut layout = Layout { x: Vec::new(), y: Vec::new(), z: Vec::new(), g: Vec::new(), d: Vec::new(), e: Vec::new() };
        let x_hi = if zero_profile { 0.0 } else { self.electric_capacity };
        for (t, &price) in prices.iter().enumerate() {
            let load = self.heat_load[t];
            layout.x.push(mip.add_named_var(format!("x_{t}"), 0.0, x_hi, -price));
            layout.y.push(mip.add_named_var(format!("y_{t}"), 0.0, self.gas_capacity, -self.gas_cost));
            layout.z.push(mip.add_named_var(format!("z_{t}"), 0.0, load, -self.load_value));
            layout.g.push(mip.add_named_var(format!("g_{t}"), 0.0, self.max_charge, 0.0));
            layout.d.push(mip.add_named_var(format!("d_{t}"), 0.0, self.max_discharge, 0.0));
            let (lo, hi) = if t + 1 == t_len { (self.initial_storage, self.initial_storage) } else { (0.0, self.storage_capacity) };
            layout.e.push(mip.add_named_var(format!("e_{t}"), lo, hi, 0.0));
        }
        for t in 0..t_len {
            mip.add_row(
                vec![
                    (layout.x[t], self.electric_efficiency),
                    (layout.y[t], self.gas_efficiency),
                    (layout.d[t], 1.0),
                    (layout.g[t], -1.0),
                    (layout.z[t], 1.0),
                ],
                Comparator::Eq,
                self.heat_load[t],
            );
            let keep = 1.0 - self.storage_loss;
            let mut balance = vec![(layout.e[t], 1.0), (layout.g[t], -1.0), (layout.d[t], 1.0)];
            let rhs = if t == 0 {
                keep * self.initial_storage
            } else {
                balance.push((layout.e[t - 1], -keep));
                0.0
            };
            mip.add_row(balance, Comparator::Eq, rhs);
        }
        (mip, layout)
    }

    /// Value of the best schedule that buys no power, running on gas and
    /// storage alone. Valuations are measured from this level so that buying
    /// nothing is worth nothing, as the zero bid assumes. Zero when buying
    /// nothing is infeasible.
    pub fn gas_only_value(&self, solver: &Solver) -> Result<f64, AgentError> {
        let (mip, layout) = self.model(&vec![0.0; self.heat_load.len()], true);
        let sol = solver.solve_lp(&mip.lp)?;
        match sol.status {
            Status::Optimal => {
                let at = |idx: &[usize]| -> Vec<f64> { idx.iter().map(|&j| sol.x[j]).collect() };
                Ok(self.served_value(&at(&layout.y), &at(&layout.z)))
            }
            _ => Ok(0.0),
        }
    }

    /// Value of served load minus gas cost, before the gas-only offset.
    pub(crate) fn served_value(&self, gas: &[f64], curtailed: &[f64]) -> f64 {
        self.heat_load
            .iter()
            .zip(gas)
            .zip(curtailed)
            .map(|((d, y), z)| self.load_value * (d - z) - self.gas_cost * y)
            .sum()
    }

    pub(crate) fn extract(&self, prices: &[f64], layout: &Layout, sol: &Solution, offset: f64) -> ValuationResult {
        let pick = |idx: &[usize], hi: &dyn Fn(usize) -> f64| -> Vec<f64> {
            idx.iter().enumerate().map(|(t, &j)| snap(sol.x[j], hi(t))).collect()
        };
        let electric = pick(&layout.x, &|_| self.electric_capacity);
        let gas = pick(&layout.y, &|_| self.gas_capacity);
        let curtailed = pick(&layout.z, &|t| self.heat_load[t]);
        let charge = pick(&layout.g, &|_| self.max_charge);
        let discharge = pick(&layout.d, &|_| self.max_discharge);
        let storage: Vec<f64> = layout.e.iter().map(|&j| sol.x[j]).collect();
        let profile = PowerProfile(electric.clone());
        let valuation = self.served_value(&gas, &curtailed) - offset;
        let schedule = Schedule::Heat { electric, gas, curtailed, charge, discharge, storage };
        let surplus = valuation - profile.cost(prices);
        ValuationResult { profile, valuation, surplus, schedule }
    }
}

/// Variable indices of the heat utility model.
pub(crate) struct Layout {
    x: Vec<usize>,
    y: Vec<usize>,
    z: Vec<usize>,
    g: Vec<usize>,
    d: Vec<usize>,
    e: Vec<usize>,
}
