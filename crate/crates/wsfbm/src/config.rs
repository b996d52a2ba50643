//! JSON run configurations. Field names mirror the core types; omitted fields take
//! their defaults and unknown fields are rejected.

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::Path;
use wsfbm_core::simulate::{ParticleSystemConfig, TestFunction};

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn default_functions() -> Vec<TestFunction> {
    vec![TestFunction::centered_bump(1.0)]
}

fn default_replicates() -> usize {
    100
}

fn default_true() -> bool {
    true
}

/// Input of the `simulate` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(default)]
    pub system: ParticleSystemConfig,
    /// Observation times; defaults to the system horizon alone.
    #[serde(default)]
    pub times: Vec<f64>,
    #[serde(default = "default_functions")]
    pub functions: Vec<TestFunction>,
    #[serde(default = "default_true")]
    pub occupation: bool,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            system: ParticleSystemConfig::default(),
            times: Vec::new(),
            functions: default_functions(),
            occupation: true,
            replicates: default_replicates(),
        }
    }
}

/// How occupation fluctuations are estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FluctuationMethod {
    /// Whole Poisson fields in the configured box.
    #[default]
    Field,
    /// Independent single-ancestor families on the line (`d = 1`, Gaussian bump).
    Families,
}

/// Input of the `fluctuations` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluctuationConfig {
    #[serde(default)]
    pub system: ParticleSystemConfig,
    pub time_scale: f64,
    #[serde(default = "default_fractions")]
    pub fractions: Vec<f64>,
    #[serde(default = "default_phi")]
    pub phi: TestFunction,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub method: FluctuationMethod,
}

fn default_fractions() -> Vec<f64> {
    vec![0.5, 1.0]
}

fn default_phi() -> TestFunction {
    TestFunction::centered_bump(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_documents_fill_defaults() {
        let c: SimulateConfig = serde_json::from_str(r#"{"system": {"alpha": 1.5, "lifetime": {"kind": "mittag_leffler", "gamma": 0.5}}}"#).unwrap();
        assert_eq!(c.system.alpha, 1.5);
        assert_eq!(c.replicates, 100);
        assert_eq!(c.system.dimension, 1);
        let f: FluctuationConfig = serde_json::from_str(r#"{"time_scale": 25, "method": "families"}"#).unwrap();
        assert_eq!(f.method, FluctuationMethod::Families);
        assert_eq!(f.fractions, vec![0.5, 1.0]);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_str::<SimulateConfig>(r#"{"system": {"alpah": 1.5}}"#).is_err());
        assert!(serde_json::from_str::<SimulateConfig>(r#"{"replicas": 5}"#).is_err());
    }
}
