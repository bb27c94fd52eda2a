//! The run configuration file (TOML). Every section is optional and falls back
//! to the library defaults; unknown keys are rejected.

use std::path::Path;

use cueval_core::metrics::{MetricSuite, MetricsConfig};
use cueval_core::oracle::OracleConfig;
use cueval_core::scenario::GenerationConfig;
use serde::{Deserialize, Serialize};

use crate::error::{read_to_string, CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluationConfig {
    /// Seconds before the deadline an alarm must come to count.
    pub lead_times: Vec<f64>,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            lead_times: vec![0.0, 0.5, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub oracle: OracleConfig,
    pub metric: MetricsConfig,
    pub evaluation: EvaluationConfig,
    pub generation: GenerationConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&read_to_string(path)?)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// The configuration at `path`, or the defaults when none is given.
    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |e: cueval_core::Error| CliError::Config(e.to_string());
        self.oracle.validate().map_err(cfg_err)?;
        MetricSuite::new(&self.metric).map_err(cfg_err)?;
        self.generation.validate().map_err(cfg_err)?;
        validate_lead_times(&self.evaluation.lead_times)
    }
}

pub fn validate_lead_times(lead_times: &[f64]) -> Result<()> {
    if lead_times.is_empty() {
        return Err(CliError::Config(
            "at least one lead time is required".into(),
        ));
    }
    if let Some(bad) = lead_times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(CliError::Config(format!(
            "lead time {bad} must be finite and non-negative"
        )));
    }
    Ok(())
}

/// Parse a comma-separated lead-time list such as `0,0.5,1.0`.
pub fn parse_lead_times(s: &str) -> Result<Vec<f64>> {
    let v = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("bad lead time `{t}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    validate_lead_times(&v)?;
    Ok(v)
}
