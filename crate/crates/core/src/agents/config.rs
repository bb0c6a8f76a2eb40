//! TOML agent configuration.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{invalid, Agent, AgentError, BatteryParams, HeatUtilityParams, ThermalGeneratorParams};

const TABLE1: &str = include_str!("../../data/table1.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Generator,
    Battery,
    Heat,
}

impl AgentKind {
    pub const ALL: [AgentKind; 3] = [AgentKind::Generator, AgentKind::Battery, AgentKind::Heat];
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AgentKind::Generator => "generator",
            AgentKind::Battery => "battery",
            AgentKind::Heat => "heat",
        })
    }
}

impl FromStr for AgentKind {
    type Err = AgentError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "generator" | "thermal" | "thermal_generator" => Ok(AgentKind::Generator),
            "battery" | "storage" => Ok(AgentKind::Battery),
            "heat" | "heat_utility" | "utility" => Ok(AgentKind::Heat),
            other => Err(invalid(format!("unknown agent '{other}' (expected generator, battery or heat)"))),
        }
    }
}

/// Parameter file with one optional section per agent type.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentsConfig {
    pub generator: Option<ThermalGeneratorParams>,
    pub battery: Option<BatteryParams>,
    #[serde(rename = "heat_utility")]
    pub heat: Option<HeatUtilityParams>,
}

impl AgentsConfig {
    /// The bundled case-study parameters.
    pub fn table1() -> Self {
        Self::from_toml_str(TABLE1).expect("bundled agent config parses")
    }

    pub fn from_toml_str(text: &str) -> Result<Self, AgentError> {
        let cfg: AgentsConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, AgentError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("agent config serializes")
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        for agent in AgentKind::ALL.iter().filter_map(|&k| self.agent(k).ok()) {
            agent.validate()?;
        }
        Ok(())
    }

    pub fn agent(&self, kind: AgentKind) -> Result<Agent, AgentError> {
        let missing = || invalid(format!("config has no section for the {kind} agent"));
        Ok(match kind {
            AgentKind::Generator => Agent::Generator(self.generator.clone().ok_or_else(missing)?),
            AgentKind::Battery => Agent::Battery(self.battery.clone().ok_or_else(missing)?),
            AgentKind::Heat => Agent::Heat(self.heat.clone().ok_or_else(missing)?),
        })
    }
}
