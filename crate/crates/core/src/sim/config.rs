use serde::Deserialize;

use super::Scenario;
use crate::calib::Calibrator;
use crate::error::{Error, Result};
use crate::procedures::{Procedure, ProcedureConfig};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default = "default_alpha")]
    alpha: f64,
    #[serde(default = "default_tau")]
    tau: f64,
    #[serde(default)]
    calibrator: Option<String>,
    #[serde(default)]
    replicates: Option<usize>,
    procedures: Vec<String>,
    #[serde(rename = "scenario")]
    scenarios: Vec<Scenario>,
}

fn default_alpha() -> f64 {
    0.1
}

fn default_tau() -> f64 {
    0.5
}

/// A campaign read from TOML:
///
/// ```toml
/// alpha = 0.1
/// procedures = ["p-bh", "ep-bh"]
///
/// [[scenario]]
/// kind = "ttest"
/// k = 2000
/// xi = 2.5
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub procedure_config: ProcedureConfig,
    pub procedures: Vec<Procedure>,
    pub scenarios: Vec<Scenario>,
    pub replicates: Option<usize>,
}

impl SimulationConfig {
    /// Errors name the offending key.
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::InvalidScenario(e.to_string()))?;
        let mut cfg = ProcedureConfig::new(raw.alpha)
            .map_err(|e| Error::InvalidScenario(format!("key `alpha`: {e}")))?
            .with_tau(raw.tau)
            .map_err(|e| Error::InvalidScenario(format!("key `tau`: {e}")))?;
        if let Some(h) = &raw.calibrator {
            let h: Calibrator = h
                .parse()
                .map_err(|e| Error::InvalidScenario(format!("key `calibrator`: {e}")))?;
            cfg = cfg.with_calibrator(h);
        }
        if raw.procedures.is_empty() {
            return Err(Error::InvalidScenario("key `procedures`: list is empty".into()));
        }
        let procedures = raw
            .procedures
            .iter()
            .map(|name| {
                name.parse::<Procedure>()
                    .map_err(|_| Error::InvalidScenario(format!("key `procedures`: unknown procedure `{name}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if raw.scenarios.is_empty() {
            return Err(Error::InvalidScenario("key `scenario`: at least one is required".into()));
        }
        for (i, s) in raw.scenarios.iter().enumerate() {
            s.validate()
                .map_err(|e| Error::InvalidScenario(format!("key `scenario[{i}]`: {e}")))?;
        }
        if raw.replicates == Some(0) {
            return Err(Error::InvalidScenario("key `replicates`: must be at least 1".into()));
        }
        Ok(SimulationConfig {
            procedure_config: cfg,
            procedures,
            scenarios: raw.scenarios,
            replicates: raw.replicates,
        })
    }
}
