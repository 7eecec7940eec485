//! Service configuration: a TOML file plus `GPVA_*` environment overrides.

use std::path::{Path, PathBuf};

use gpva_core::gir::EngineConfig;
use serde::{Deserialize, Serialize};

/// Configuration errors. All are validation failures (CLI exit code 3).
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error("environment variable {name}: {message}")]
    Env { name: String, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Which semantic adapter backs the second ranking tier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdapterKind {
    /// The KB synonym table (deterministic).
    #[default]
    Synonym,
    /// No semantic tier: weak lexical matches stay weak.
    Lexical,
}

impl std::str::FromStr for AdapterKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "synonym" => Ok(AdapterKind::Synonym),
            "lexical" => Ok(AdapterKind::Lexical),
            _ => Err(format!("unknown adapter {s:?} (expected \"synonym\" or \"lexical\")")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// Minimum effective score for a heading to be accepted under GIR 1.
    pub accept: f64,
    /// Minimum score for the most-akin fallback (GIR 4).
    pub akin: f64,
    /// Top lexical score at or above which the semantic tier is skipped.
    pub tier: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        let engine = EngineConfig::default();
        Self { accept: engine.accept_threshold, akin: engine.akin_threshold, tier: 0.6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub kb_path: PathBuf,
    pub thresholds: Thresholds,
    /// Manual handling time per item, the baseline for throughput metrics.
    pub manual_seconds_per_item: f64,
    pub adapter: AdapterKind,
    /// Maximum number of concurrent calls into the semantic adapter.
    pub adapter_concurrency: usize,
    pub listen: String,
    pub storage_path: PathBuf,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            kb_path: PathBuf::from("kb.json"),
            thresholds: Thresholds::default(),
            manual_seconds_per_item: 90.0,
            adapter: AdapterKind::Synonym,
            adapter_concurrency: 4,
            listen: String::from("127.0.0.1:8080"),
            storage_path: PathBuf::from("cases"),
        }
    }
}

impl ServiceConfig {
    /// Reads `path` (defaults when `None`), applies overrides from the
    /// process environment and validates.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        Self::load_with_env(path, std::env::vars())
    }

    /// Like [`ServiceConfig::load`] with an explicit environment.
    pub fn load_with_env(
        path: Option<&Path>,
        env: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self, ConfigError> {
        let mut config = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Read { path: p.to_path_buf(), source })?;
                Self::from_toml(&text).map_err(|source| ConfigError::Parse { path: p.to_path_buf(), source })?
            }
            None => Self::default(),
        };
        config.apply_env(env)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Applies `GPVA_*` overrides; unrelated variables are ignored.
    pub fn apply_env(&mut self, env: impl IntoIterator<Item = (String, String)>) -> Result<(), ConfigError> {
        fn num<T: std::str::FromStr>(name: &str, value: &str) -> Result<T, ConfigError> {
            value.trim().parse().map_err(|_| ConfigError::Env { name: name.to_string(), message: format!("not a number: {value:?}") })
        }
        for (name, value) in env {
            match name.as_str() {
                "GPVA_KB_PATH" => self.kb_path = PathBuf::from(value),
                "GPVA_ACCEPT_THRESHOLD" => self.thresholds.accept = num(&name, &value)?,
                "GPVA_AKIN_THRESHOLD" => self.thresholds.akin = num(&name, &value)?,
                "GPVA_TIER_THRESHOLD" => self.thresholds.tier = num(&name, &value)?,
                "GPVA_MANUAL_SECONDS_PER_ITEM" => self.manual_seconds_per_item = num(&name, &value)?,
                "GPVA_ADAPTER" => {
                    self.adapter = value.trim().parse().map_err(|message| ConfigError::Env { name: name.clone(), message })?
                }
                "GPVA_ADAPTER_CONCURRENCY" => self.adapter_concurrency = num(&name, &value)?,
                "GPVA_LISTEN" => self.listen = value,
                "GPVA_STORAGE_PATH" => self.storage_path = PathBuf::from(value),
                _ => {}
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let t = &self.thresholds;
        for (name, v) in [("accept", t.accept), ("akin", t.akin), ("tier", t.tier)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(ConfigError::Invalid(format!("threshold {name} = {v} must lie in (0, 1]")));
            }
        }
        if !(self.manual_seconds_per_item > 0.0 && self.manual_seconds_per_item.is_finite()) {
            return Err(ConfigError::Invalid(format!(
                "manual_seconds_per_item = {} must be positive",
                self.manual_seconds_per_item
            )));
        }
        if self.adapter_concurrency == 0 {
            return Err(ConfigError::Invalid(String::from("adapter_concurrency must be at least 1")));
        }
        Ok(())
    }

    /// Engine settings derived from the thresholds.
    pub fn engine(&self) -> EngineConfig {
        EngineConfig {
            accept_threshold: self.thresholds.accept,
            akin_threshold: self.thresholds.akin,
            ..EngineConfig::default()
        }
    }
}
