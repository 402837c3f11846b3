use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which token representations the sentence CNN convolves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CnnInput {
    /// Word embeddings.
    #[default]
    Embeddings,
    /// Encoder hidden states.
    Hidden,
}

/// Token encoder kind. Only the bidirectional GRU is built today.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EncoderKind {
    #[default]
    BiGru,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    /// Size of the fixed vocabulary, reserved tokens included.
    pub vocab_size: usize,
    pub embed_dim: usize,
    /// Width of encoder states; each direction gets half.
    pub hidden_dim: usize,
    pub cnn_kernel_sizes: Vec<usize>,
    pub cnn_channels: usize,
    pub selector_mlp_hidden: usize,
    /// Must equal `hidden_dim` so the significance embedding can be added to the states.
    pub significance_embed_dim: usize,
    pub gate_threshold: f64,
    pub max_decode_len: usize,
    pub cnn_input: CnnInput,
    pub encoder: EncoderKind,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            vocab_size: 50_000 + crate::corpus::SPECIAL_TOKENS.len(),
            embed_dim: 300,
            hidden_dim: 300,
            cnn_kernel_sizes: vec![1, 3, 5],
            cnn_channels: 100,
            selector_mlp_hidden: 100,
            significance_embed_dim: 300,
            gate_threshold: 0.5,
            max_decode_len: 60,
            cnn_input: CnnInput::Embeddings,
            encoder: EncoderKind::BiGru,
        }
    }
}

impl ModelConfig {
    /// A small configuration for tests and smoke runs.
    pub fn tiny(vocab_size: usize, dim: usize) -> Self {
        ModelConfig {
            vocab_size,
            embed_dim: dim,
            hidden_dim: dim,
            cnn_kernel_sizes: vec![1, 3],
            cnn_channels: dim,
            selector_mlp_hidden: dim,
            significance_embed_dim: dim,
            max_decode_len: 30,
            ..ModelConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("vocab_size", self.vocab_size),
            ("embed_dim", self.embed_dim),
            ("hidden_dim", self.hidden_dim),
            ("cnn_channels", self.cnn_channels),
            ("selector_mlp_hidden", self.selector_mlp_hidden),
            ("significance_embed_dim", self.significance_embed_dim),
            ("max_decode_len", self.max_decode_len),
        ];
        if let Some((name, _)) = dims.iter().find(|(_, v)| *v == 0) {
            return Err(Error::InvalidConfig(format!("{name} must be positive")));
        }
        if self.vocab_size < crate::corpus::SPECIAL_TOKENS.len() {
            return Err(Error::InvalidConfig(
                "vocab_size smaller than the reserved tokens".into(),
            ));
        }
        if !self.hidden_dim.is_multiple_of(2) {
            return Err(Error::InvalidConfig(
                "hidden_dim must be even (two directions)".into(),
            ));
        }
        if self.significance_embed_dim != self.hidden_dim {
            return Err(Error::InvalidConfig(
                "significance_embed_dim must equal hidden_dim".into(),
            ));
        }
        if self.cnn_kernel_sizes.is_empty() || self.cnn_kernel_sizes.contains(&0) {
            return Err(Error::InvalidConfig(
                "cnn_kernel_sizes must be non-empty and positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.gate_threshold) {
            return Err(Error::InvalidConfig(
                "gate_threshold must lie in [0, 1)".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn cnn_input_dim(&self) -> usize {
        match self.cnn_input {
            CnnInput::Embeddings => self.embed_dim,
            CnnInput::Hidden => self.hidden_dim,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = ModelConfig::default();
        c.validate().unwrap();
        assert_eq!(c.cnn_kernel_sizes, [1, 3, 5]);
        assert_eq!(
            (c.cnn_channels, c.significance_embed_dim, c.hidden_dim),
            (100, 300, 300)
        );
    }

    #[test]
    fn rejects_mismatched_significance_width() {
        let c = ModelConfig {
            significance_embed_dim: 10,
            ..ModelConfig::tiny(20, 8)
        };
        assert!(c.validate().is_err());
        assert!(ModelConfig {
            hidden_dim: 7,
            significance_embed_dim: 7,
            ..ModelConfig::tiny(20, 8)
        }
        .validate()
        .is_err());
    }
}
