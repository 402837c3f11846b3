//! Binary checkpoint: an 8-byte magic, a `u32` format version, a `u64` header
//! length, a JSON header, then every array as little-endian `f64` in header
//! order (parameters, then both Adam moments).

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::TrainConfig;
use super::optim::{Adam, AdamConfig};
use crate::corpus::Vocab;
use crate::error::{Error, Result};
use crate::model::{ModelConfig, ModelParams, Tensor};

const MAGIC: &[u8; 8] = b"KPCKPT\0\0";
const FORMAT_VERSION: u32 = 1;

/// Progress counters needed to resume a run exactly.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainState {
    /// Completed epochs.
    pub epoch: usize,
    /// Completed optimizer steps.
    pub step: usize,
    pub best_score: Option<f64>,
    pub best_epoch: Option<usize>,
    pub validations_without_improvement: usize,
    /// Position of the batch-order generator, as a decimal `u128`.
    pub rng_word_pos: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model_config: ModelConfig,
    pub train_config: TrainConfig,
    pub vocab: Vocab,
    pub params: ModelParams,
    pub optimizer: Adam,
    pub state: TrainState,
}

#[derive(Serialize, Deserialize)]
struct ArrayInfo {
    name: String,
    rows: usize,
    cols: usize,
}

#[derive(Serialize, Deserialize)]
struct Header {
    model_config: ModelConfig,
    train_config: TrainConfig,
    vocab: Vec<String>,
    arrays: Vec<ArrayInfo>,
    adam: AdamConfig,
    adam_t: u64,
    state: TrainState,
}

fn bad(path: &Path, reason: impl Into<String>) -> Error {
    Error::Checkpoint {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let header = Header {
            model_config: self.model_config.clone(),
            train_config: self.train_config.clone(),
            vocab: self.vocab.tokens().to_vec(),
            arrays: self
                .params
                .names()
                .iter()
                .zip(&self.params.tensors)
                .map(|(name, t)| ArrayInfo {
                    name: name.clone(),
                    rows: t.rows,
                    cols: t.cols,
                })
                .collect(),
            adam: self.optimizer.config,
            adam_t: self.optimizer.t,
            state: self.state.clone(),
        };
        let header = serde_json::to_vec(&header)?;
        let floats = 3 * self.params.num_scalars();
        let mut out = Vec::with_capacity(20 + header.len() + 8 * floats);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(header.len() as u64).to_le_bytes());
        out.extend_from_slice(&header);
        for group in [&self.params.tensors, &self.optimizer.m, &self.optimizer.v] {
            for t in group.iter() {
                for x in &t.data {
                    out.extend_from_slice(&x.to_le_bytes());
                }
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        if bytes.len() < 20 || &bytes[..8] != MAGIC {
            return Err(bad(path, "not a checkpoint file"));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
        if version != FORMAT_VERSION {
            return Err(bad(path, format!("unsupported format version {version}")));
        }
        let header_len = u64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes")) as usize;
        let body = bytes
            .get(20..)
            .filter(|b| b.len() >= header_len)
            .ok_or_else(|| bad(path, "truncated header"))?;
        let header: Header = serde_json::from_slice(&body[..header_len])
            .map_err(|e| bad(path, format!("bad header: {e}")))?;
        let mut data = &body[header_len..];

        let total: usize = header.arrays.iter().map(|a| a.rows * a.cols).sum();
        if data.len() != 3 * total * 8 {
            return Err(bad(
                path,
                format!(
                    "expected {} bytes of array data, found {}",
                    3 * total * 8,
                    data.len()
                ),
            ));
        }
        let mut read_group = || -> Vec<Tensor> {
            header
                .arrays
                .iter()
                .map(|a| {
                    let n = a.rows * a.cols;
                    let values = data[..8 * n]
                        .chunks_exact(8)
                        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                        .collect();
                    data = &data[8 * n..];
                    Tensor::from_vec(a.rows, a.cols, values)
                })
                .collect()
        };
        let tensors = read_group();
        let m = read_group();
        let v = read_group();

        let named = header
            .arrays
            .iter()
            .map(|a| a.name.clone())
            .zip(tensors)
            .collect();
        let params = ModelParams::from_named(&header.model_config, named)?;
        let vocab = Vocab::from_token_list(header.vocab)?;
        if vocab.len() != header.model_config.vocab_size {
            return Err(bad(
                path,
                format!(
                    "vocabulary has {} entries but the model expects {}",
                    vocab.len(),
                    header.model_config.vocab_size
                ),
            ));
        }
        Ok(Checkpoint {
            model_config: header.model_config,
            train_config: header.train_config,
            vocab,
            params,
            optimizer: Adam {
                config: header.adam,
                t: header.adam_t,
                m,
                v,
            },
            state: header.state,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Checkpoint {
        let model_config = ModelConfig::tiny(9, 4);
        let params = ModelParams::init_uniform(&model_config, 0.1, 3);
        let mut optimizer = Adam::new(AdamConfig::default(), &params.tensors);
        optimizer.t = 7;
        optimizer.m[0].data[0] = 0.25;
        optimizer.v[2].data[1] = 1e-9;
        Checkpoint {
            model_config,
            train_config: TrainConfig::default(),
            vocab: Vocab::from_words(["a", "b"]),
            params,
            optimizer,
            state: TrainState {
                epoch: 2,
                step: 11,
                best_score: Some(0.5),
                best_epoch: Some(1),
                validations_without_improvement: 1,
                rng_word_pos: "12345".into(),
            },
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let ck = sample();
        let bytes = ck.to_bytes().unwrap();
        let back = Checkpoint::from_bytes(&bytes, Path::new("x")).unwrap();
        assert_eq!(back, ck);
        assert_eq!(back.to_bytes().unwrap(), bytes);
    }

    #[test]
    fn rejects_corruption() {
        let bytes = sample().to_bytes().unwrap();
        let p = Path::new("x");
        assert!(Checkpoint::from_bytes(&bytes[..bytes.len() - 8], p).is_err());
        assert!(Checkpoint::from_bytes(b"garbage-garbage-garbage", p).is_err());
        let mut wrong = bytes.clone();
        wrong[8] = 9;
        assert!(Checkpoint::from_bytes(&wrong, p).is_err());
    }
}
