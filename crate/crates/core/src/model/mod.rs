//! The sentence-selective sequence-to-sequence network.
//!
//! A bidirectional GRU produces token states `H`. A CNN over each sentence
//! feeds an MLP whose sigmoid output `η_i` is thresholded into a hard gate
//! `z_i`; the gate selects one of two significance embeddings that is added to
//! every token of the sentence, giving `F = H + G`. An attention GRU decoder
//! reads `F` and mixes vocabulary generation with copying from the source.

mod config;
mod decode;
mod decoder;
mod encoder;
mod params;
pub mod tape;
mod tensor;

pub use config::{CnnInput, EncoderKind, ModelConfig};
pub use decode::{greedy_decode, greedy_trace, split_prediction, DecodeTrace, Decoded, Prediction};
pub use encoder::{EncoderState, GateMode};
pub use params::{ConvSlots, GruSlots, Layout, ModelParams, ParamSpec};
pub use tensor::{sigmoid, Tensor};

use crate::corpus::{TokenizedExample, Vocab};
use crate::error::{Error, Result};
use decoder::DecoderContext;
use encoder::Encoded;
use tape::{Tape, Var};

pub(crate) fn bind<'p>(tape: &mut Tape<'p>, params: &'p ModelParams) -> Layout<Var> {
    params
        .layout()
        .map(|&id| tape.param(id, &params.tensors[id]))
}

/// Runs the encoder for one example.
pub fn encode(
    example: &TokenizedExample,
    params: &ModelParams,
    config: &ModelConfig,
    mode: &GateMode,
) -> Result<EncoderState> {
    let mut tape = Tape::new();
    let p = bind(&mut tape, params);
    let enc = encoder::encode_on_tape(&mut tape, &p, config, example, mode)?;
    Ok(enc.to_state(&tape, example))
}

/// Additive attention of decoder state `state` (`1 × d`) over the rows of `fused`.
///
/// Returns the context vector `u` and the attention weights `α`.
pub fn attend(params: &ModelParams, fused: &Tensor, state: &Tensor) -> (Tensor, Vec<f64>) {
    let mut tape = Tape::new();
    let p = bind(&mut tape, params);
    let f = tape.constant(fused.clone());
    let keys = tape.matmul_nt(f, p.att_feat);
    let s = tape.constant(state.clone());
    let query = tape.matmul_nt(s, p.att_state);
    let query = tape.add_row(query, p.att_bias);
    let energy = tape.add_row(keys, query);
    let energy = tape.tanh(energy);
    let scores = tape.matmul_nt(energy, p.att_v);
    let scores = tape.reshape(scores, 1, fused.rows);
    let alpha = tape.softmax_rows(scores);
    let context = tape.matmul(alpha, f);
    (tape.value(context).clone(), tape.value(alpha).data.clone())
}

/// Output of one decoder step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub state: Tensor,
    pub attention: Vec<f64>,
    /// Distribution over the extended vocabulary (`vocab ∪ example OOVs`).
    pub probs: Vec<f64>,
}

/// Runs the encoder, then one decoder step from `prev_state` (or the bridged
/// encoder summary when `None`) fed with `prev_token`.
pub fn decode_step(
    example: &TokenizedExample,
    params: &ModelParams,
    config: &ModelConfig,
    mode: &GateMode,
    prev_token: usize,
    prev_state: Option<&Tensor>,
) -> Result<StepResult> {
    let mut tape = Tape::new();
    let p = bind(&mut tape, params);
    let enc = encoder::encode_on_tape(&mut tape, &p, config, example, mode)?;
    let ctx = DecoderContext::new(&mut tape, &p, config, &enc, example);
    let state = match prev_state {
        Some(t) => tape.constant(t.clone()),
        None => enc.init_state,
    };
    let out = ctx.step(&mut tape, &p, prev_token, state);
    Ok(StepResult {
        state: tape.value(out.state).clone(),
        attention: tape.value(out.attention).data.clone(),
        probs: tape.value(out.probs).data.clone(),
    })
}

pub(crate) struct TeacherForced {
    pub encoded: Encoded,
    /// `log p(y_t | y_<t, F)` per target step, each `1 × 1`.
    pub step_logps: Vec<Var>,
}

pub(crate) fn teacher_forced_on_tape(
    tape: &mut Tape<'_>,
    p: &Layout<Var>,
    config: &ModelConfig,
    example: &TokenizedExample,
    mode: &GateMode,
) -> Result<TeacherForced> {
    if example.target_ids.is_empty() {
        return Err(Error::InvalidExample(format!(
            "example {} has no target",
            example.id
        )));
    }
    let encoded = encoder::encode_on_tape(tape, p, config, example, mode)?;
    let ctx = DecoderContext::new(tape, p, config, &encoded, example);
    if let Some(&bad) = example
        .target_ids
        .iter()
        .find(|&&y| y >= ctx.extended_len())
    {
        return Err(Error::InvalidExample(format!(
            "example {} target id {bad} is outside the extended vocabulary",
            example.id
        )));
    }
    let mut state = encoded.init_state;
    let mut prev = Vocab::BOS;
    let mut step_logps = Vec::with_capacity(example.target_ids.len());
    for &y in &example.target_ids {
        let out = ctx.step(tape, p, prev, state);
        let picked = tape.slice_cols(out.probs, y, 1);
        step_logps.push(tape.ln(picked));
        state = out.state;
        prev = y;
    }
    Ok(TeacherForced {
        encoded,
        step_logps,
    })
}

/// Teacher-forced pass: per-step target log-probabilities and the selector's `η`.
pub fn forward_loss_path(
    example: &TokenizedExample,
    params: &ModelParams,
    config: &ModelConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut tape = Tape::new();
    let p = bind(&mut tape, params);
    let tf = teacher_forced_on_tape(&mut tape, &p, config, example, &GateMode::Natural)?;
    let logps = tf.step_logps.iter().map(|&v| tape.scalar(v)).collect();
    Ok((logps, tape.value(tf.encoded.eta).data.clone()))
}
