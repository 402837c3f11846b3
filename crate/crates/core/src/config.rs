//! Merged run configuration embedded next to every output.

use serde::{Deserialize, Serialize};

use crate::corpus::CorpusConfig;
use crate::error::Result;
use crate::metrics::MatchConfig;
use crate::model::ModelConfig;
use crate::training::TrainConfig;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: CorpusConfig,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub matching: MatchConfig,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.train.validate()
    }
}
