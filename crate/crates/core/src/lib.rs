//! Keyphrase generation with a sentence-selective encoder.
//!
//! The crate covers the whole pipeline: text normalization and vocabulary
//! building ([`corpus`]), present / semi-present / absent keyphrase labeling
//! with per-sentence weak labels ([`labeling`]), the sequence-to-sequence
//! network with a binarized sentence gate and a copy mechanism ([`model`]),
//! straight-through training with an auxiliary sentence loss ([`training`]),
//! and F1@5 / F1@M evaluation ([`metrics`]).

pub mod config;
pub mod corpus;
pub mod error;
pub mod io;
pub mod labeling;
pub mod metrics;
pub mod model;
pub mod synthetic;
pub mod training;

pub use config::RunConfig;
pub use corpus::{Document, RawRecord, Span, TokenizedExample, Vocab};
pub use error::{Error, Result};
pub use labeling::{KeyphraseCategory, LabeledExample};
pub use metrics::{MatchConfig, MetricsReport};
pub use model::{EncoderState, GateMode, ModelConfig, ModelParams, Tensor};
pub use training::{TrainConfig, TrainOutcome};
