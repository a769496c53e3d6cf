//! Layered configuration: built-in defaults, then a TOML file, then flags.
//!
//! The resolved form has every field filled in and is written next to each
//! command's outputs, so `--config <out>/config.toml` reproduces the run.

use std::path::{Path, PathBuf};

use anyhow::Context;
use falqon_core::feedback::LawKind;
use serde::{Deserialize, Serialize};

use crate::exit::ConfigError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graphs: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    #[serde(default)]
    pub study: StudySection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub layers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub law: Option<LawKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_b: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dedup: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_draws: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt_list: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub laws: Option<Vec<LawKind>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_target: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quick: Option<bool>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        let cfg = toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> anyhow::Result<String> {
        toml::to_string(self).context("serializing resolved config")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

/// Overwrites `slot` when the flag was given.
pub fn set<T>(slot: &mut Option<T>, flag: Option<T>) {
    if flag.is_some() {
        *slot = flag;
    }
}

/// Fills `slot` with `default` when neither file nor flag set it, and returns
/// the resolved value.
pub fn resolve<T: Clone>(slot: &mut Option<T>, default: T) -> T {
    slot.get_or_insert(default).clone()
}

/// Like [`resolve`] for values without a default.
pub fn require<T: Clone>(slot: &Option<T>, name: &str) -> anyhow::Result<T> {
    slot.clone()
        .ok_or_else(|| ConfigError(format!("missing required setting `{name}`")).into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_sections_parse() {
        let cfg: FileConfig = toml::from_str(
            r#"
            seed = 7
            [run]
            dt = 0.1
            law = "so-hybrid"
            [study]
            dt_list = [0.02, 0.04]
            "#,
        )
        .unwrap();
        assert_eq!(cfg.seed, Some(7));
        assert_eq!(cfg.run.law, Some(LawKind::SecondOrderHybrid));
        assert_eq!(cfg.study.dt_list.as_deref(), Some(&[0.02, 0.04][..]));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<FileConfig>("[run]\nstep = 1").is_err());
    }

    #[test]
    fn flags_override_file_and_defaults_fill_gaps() {
        let mut cfg: FileConfig = toml::from_str("[run]\ndt = 0.1\nlayers = 50").unwrap();
        set(&mut cfg.run.dt, Some(0.2));
        set(&mut cfg.run.layers, None);
        assert_eq!(resolve(&mut cfg.run.dt, 0.5), 0.2);
        assert_eq!(resolve(&mut cfg.run.layers, 10), 50);
        assert_eq!(resolve(&mut cfg.run.eps_b, 1e-9), 1e-9);
        assert_eq!(cfg.run.eps_b, Some(1e-9));
    }

    #[test]
    fn resolved_config_round_trips() {
        let mut cfg = FileConfig::default();
        resolve(&mut cfg.seed, 3);
        resolve(&mut cfg.run.law, LawKind::FirstOrder);
        resolve(&mut cfg.study.dt_list, vec![0.1, 0.028]);
        let back: FileConfig = toml::from_str(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }
}
