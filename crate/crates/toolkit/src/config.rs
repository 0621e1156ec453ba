//! TOML experiment configuration.
//!
//! ```toml
//! n_list = [60, 100]
//! p_list = ["0.5"]
//! eps = 0.0
//! trials = 200
//! base_seed = 1
//! node_budget = 100000000
//! output = "runs/records.csv"
//! ```

use std::path::{Path, PathBuf};

use mif_core::solver::DEFAULT_NODE_BUDGET;
use mif_core::Probability;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_list: Vec<usize>,
    /// Decimal strings; TOML floats are accepted and read by their shortest
    /// decimal form.
    #[serde(deserialize_with = "de_probabilities", serialize_with = "ser_probabilities")]
    pub p_list: Vec<Probability>,
    #[serde(default)]
    pub eps: f64,
    pub trials: u64,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_budget")]
    pub node_budget: u64,
    /// Records CSV; the witness sidecar and the JSON summary sit next to it.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_budget() -> u64 {
    DEFAULT_NODE_BUDGET
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PValue {
    Text(String),
    Number(f64),
}

fn de_probabilities<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<Probability>, D::Error> {
    let raw = Vec::<PValue>::deserialize(d)?;
    raw.into_iter()
        .map(|v| {
            let text = match v {
                PValue::Text(s) => s,
                PValue::Number(x) => x.to_string(),
            };
            text.parse().map_err(serde::de::Error::custom)
        })
        .collect()
}

fn ser_probabilities<S: serde::Serializer>(ps: &[Probability], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(ps.iter().map(|p| p.as_str()))
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> std::result::Result<Self, String> {
        let cfg: Self = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::parse(path, e))
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.trials == 0 {
            return Err("trials must be at least 1".into());
        }
        if self.n_list.is_empty() || self.p_list.is_empty() {
            return Err("n_list and p_list must be non-empty".into());
        }
        if let Some(&n) = self.n_list.iter().find(|&&n| n == 0 || n > mif_core::graph::MAX_VERTICES) {
            return Err(format!("n = {n} outside 1..={}", mif_core::graph::MAX_VERTICES));
        }
        if !self.eps.is_finite() {
            return Err("eps must be finite".into());
        }
        Ok(())
    }

    /// Path of the witness sidecar for `output`.
    pub fn witness_path(output: &Path) -> PathBuf {
        output.with_extension("witnesses.csv")
    }

    /// Path of the JSON summary for `output`.
    pub fn summary_path(output: &Path) -> PathBuf {
        output.with_extension("summary.json")
    }
}
