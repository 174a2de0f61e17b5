use std::path::Path;

use serde::{Deserialize, Serialize};

use super::prequential::ModelConfig;
use crate::datastream::DriftConfig;
use crate::error::{Error, Result};

pub const DEFAULT_BATCH_SIZE: usize = 100;

/// Contents of a run config file. Every table is optional.
///
/// ```toml
/// batch_size = 100
///
/// [model]
/// kind = "forest"
/// bagging = true
///
/// [generator]
/// n_samples = 20000
/// n_drifts = 2
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub batch_size: usize,
    pub model: ModelConfig,
    pub generator: Option<DriftConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            batch_size: DEFAULT_BATCH_SIZE,
            model: ModelConfig::default(),
            generator: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text)?;
        if config.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        if let Some(g) = &config.generator {
            g.validate()?;
        }
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evalbench::ModelKind;

    #[test]
    fn partial_file_keeps_defaults() {
        let c = RunConfig::from_toml_str("[model]\nkind = \"forest\"\n").unwrap();
        assert_eq!(c.model.kind, ModelKind::Forest);
        assert_eq!(c.model.n_trees, 20);
        assert_eq!(c.batch_size, 100);
        assert!(c.generator.is_none());
    }

    #[test]
    fn rejects_unknown_keys_and_bad_generators() {
        assert!(RunConfig::from_toml_str("[model]\nirate = 0.3\n").is_err());
        assert!(RunConfig::from_toml_str("batch_size = 0\n").is_err());
        assert!(RunConfig::from_toml_str("[generator]\nn_features = 0\n").is_err());
    }
}
