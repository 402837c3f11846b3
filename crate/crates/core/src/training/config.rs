use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// Weight of the sentence-selector loss.
    pub lambda: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Global gradient-norm bound; zero disables clipping.
    pub clip_norm: f64,
    pub seed: u64,
    /// Parameters start uniform in `[-init_range, init_range]`.
    pub init_range: f64,
    /// Validate every this many epochs.
    pub validation_interval: usize,
    /// Stop after this many validations without improvement; zero disables.
    pub patience: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lambda: 0.08,
            learning_rate: 1e-3,
            batch_size: 16,
            max_epochs: 20,
            clip_norm: 5.0,
            seed: 1,
            init_range: 0.1,
            validation_interval: 1,
            patience: 5,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return bad("lambda must be finite and non-negative");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return bad("learning_rate must be finite and non-negative");
        }
        if !(self.init_range.is_finite() && self.init_range > 0.0) {
            return bad("init_range must be positive");
        }
        if !(self.clip_norm.is_finite() && self.clip_norm >= 0.0) {
            return bad("clip_norm must be finite and non-negative");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if self.validation_interval == 0 {
            return bad("validation_interval must be positive");
        }
        Ok(())
    }
}
