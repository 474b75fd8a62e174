use std::fs;
use std::path::{Path, PathBuf};

use quadnet_core::synthetic::SampleConfig;
use quadnet_core::TrainConfig;
use serde::{Deserialize, Serialize};

use crate::UsageError;

/// Everything a run can be configured with. Loaded from `--config` when
/// given, then overridden field by field by command-line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub threads: Option<usize>,
    pub catalog: Option<PathBuf>,
    pub catalog_format: Option<String>,
    pub edges: Option<PathBuf>,
    pub vectors: Option<PathBuf>,
    pub hash_dim: Option<usize>,
    pub hash_seed: Option<u64>,
    pub train_fraction: f64,
    pub similars_per_pair: usize,
    pub category_filter: bool,
    pub train: TrainConfig,
    pub sample: SampleConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            threads: None,
            catalog: None,
            catalog_format: None,
            edges: None,
            vectors: None,
            hash_dim: None,
            hash_seed: None,
            train_fraction: quadnet_core::quadgen::DEFAULT_TRAIN_FRACTION,
            similars_per_pair: 1,
            category_filter: true,
            train: TrainConfig::default(),
            sample: SampleConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, UsageError> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text =
            fs::read_to_string(path).map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| UsageError(format!("invalid config {}: {e}", path.display())))
    }
}

/// `flag` wins over `slot` when present.
pub fn set<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}
