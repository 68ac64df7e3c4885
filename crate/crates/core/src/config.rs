//! Run configuration: one JSON document with sections for every stage.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::derive::DeriveConfig;
use crate::error::{Error, Result};
use crate::eval::EvalConfig;
use crate::ontology::RelationType;
use crate::sampling::SplitSpec;
use crate::synth::SynthConfig;
use crate::train::{ModelConfig, TrainConfig};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    pub input: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    pub split: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepGrid {
    pub cooccurrence_thresholds: Vec<u32>,
    pub projection_thresholds: Vec<u32>,
    pub dims: Vec<usize>,
    pub depths: Vec<usize>,
    pub target_relation: RelationType,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            cooccurrence_thresholds: vec![2],
            projection_thresholds: vec![2],
            dims: vec![32],
            depths: vec![2],
            target_relation: RelationType::BuysFrom,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub paths: PathsConfig,
    pub derive: DeriveConfig,
    pub split: SplitSpec,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub eval: EvalConfig,
    pub synth: SynthConfig,
    pub sweep: SweepGrid,
    pub seed: u64,
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<RunConfig> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, serde_json::to_string_pretty(self)?).map_err(|e| Error::io(path, e))
    }

    /// Sets the master seed and the split seed together.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.split.seed = seed;
        self.synth.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.derive.validate()?;
        self.split.validate()?;
        self.synth.validate()?;
        let m = &self.model;
        if m.dim < 1 || m.depth < 1 || m.fanout < 1 {
            return Err(Error::Config("model dim, depth and fanout must be >= 1".into()));
        }
        let t = &self.train;
        if t.batch_size < 1 {
            return Err(Error::Config("batch size must be >= 1".into()));
        }
        if !(t.learning_rate > 0.0 && t.learning_rate.is_finite()) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if self.eval.fanout < 1 {
            return Err(Error::Config("eval fanout must be >= 1".into()));
        }
        Ok(())
    }

    /// SHA-256 over every setting except file paths, as lowercase hex.
    pub fn fingerprint(&self) -> String {
        let mut canonical = self.clone();
        canonical.paths = PathsConfig::default();
        let json = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}
