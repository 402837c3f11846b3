//! Bidirectional GRU encoder, CNN sentence selector, binary gate and
//! significance-embedding fusion.

use serde::{Deserialize, Serialize};

use super::config::{CnnInput, ModelConfig};
use super::params::{GruSlots, Layout};
use super::tape::{Tape, Var};
use super::tensor::Tensor;
use crate::corpus::TokenizedExample;
use crate::error::{Error, Result};

/// How sentence gates are produced during a forward pass.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum GateMode {
    /// `z = 1[η > threshold]` with straight-through gradients.
    #[default]
    Natural,
    /// Gates fixed from outside (one flag per sentence); no gradient reaches η.
    Forced(Vec<bool>),
    /// `z = z0 + (η − η0)` fed through ordinary differentiable ops.
    ///
    /// With `z0`/`η0` taken from a natural pass at the same parameters the
    /// forward values coincide with that pass, and the exact derivative equals
    /// the straight-through gradient. Used to verify gradients numerically.
    Linearized { z0: Vec<f64>, eta0: Vec<f64> },
}

/// Values produced by the encoder for one example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderState {
    /// Per-token hidden states, `|x| × d`.
    pub hidden: Tensor,
    /// Pooled CNN features per sentence.
    pub sentence_reprs: Tensor,
    /// Selector probabilities, one per sentence.
    pub eta: Vec<f64>,
    pub z: Vec<u8>,
    /// Token-level copy of `z`.
    pub token_gates: Vec<u8>,
    /// Per-token significance embeddings.
    pub significance: Tensor,
    /// `hidden + significance`.
    pub fused: Tensor,
}

pub(crate) struct Encoded {
    pub hidden: Var,
    pub sentence_reprs: Var,
    pub eta: Var,
    pub z: Var,
    pub significance: Var,
    pub fused: Var,
    pub init_state: Var,
}

pub(crate) fn check_example(ex: &TokenizedExample, config: &ModelConfig) -> Result<()> {
    if ex.source_ids.is_empty() {
        return Err(Error::InvalidExample(format!(
            "example {} has an empty source",
            ex.id
        )));
    }
    let mut cursor = 0;
    for span in &ex.sentence_spans {
        if span.start != cursor || span.is_empty() {
            return Err(Error::InvalidExample(format!(
                "example {} has invalid sentence spans",
                ex.id
            )));
        }
        cursor = span.end;
    }
    if cursor != ex.source_ids.len() || ex.source_extended_ids.len() != ex.source_ids.len() {
        return Err(Error::InvalidExample(format!(
            "example {} spans do not cover the source",
            ex.id
        )));
    }
    if ex.source_ids.iter().any(|&id| id >= config.vocab_size) {
        return Err(Error::InvalidExample(format!(
            "example {} has ids outside the vocabulary",
            ex.id
        )));
    }
    Ok(())
}

/// One GRU step: `gi` is the precomputed input projection `x W_ihᵀ + b_ih`.
pub(crate) fn gru_step(
    tape: &mut Tape<'_>,
    gru: &GruSlots<Var>,
    gi: Var,
    h_prev: Var,
    hidden: usize,
) -> Var {
    let hh = tape.matmul_nt(h_prev, gru.w_hh);
    let gh = tape.add_row(hh, gru.b_hh);
    let (gi_r, gh_r) = (
        tape.slice_cols(gi, 0, hidden),
        tape.slice_cols(gh, 0, hidden),
    );
    let (gi_z, gh_z) = (
        tape.slice_cols(gi, hidden, hidden),
        tape.slice_cols(gh, hidden, hidden),
    );
    let (gi_n, gh_n) = (
        tape.slice_cols(gi, 2 * hidden, hidden),
        tape.slice_cols(gh, 2 * hidden, hidden),
    );
    let r_pre = tape.add(gi_r, gh_r);
    let reset = tape.sigmoid(r_pre);
    let z_pre = tape.add(gi_z, gh_z);
    let update = tape.sigmoid(z_pre);
    let gated = tape.mul(reset, gh_n);
    let n_pre = tape.add(gi_n, gated);
    let candidate = tape.tanh(n_pre);
    // h' = n + z ⊙ (h − n)
    let delta = tape.sub(h_prev, candidate);
    let kept = tape.mul(update, delta);
    tape.add(candidate, kept)
}

fn run_direction(
    tape: &mut Tape<'_>,
    gru: &GruSlots<Var>,
    embeddings: Var,
    hidden: usize,
    reverse: bool,
) -> Vec<Var> {
    let proj = tape.matmul_nt(embeddings, gru.w_ih);
    let proj = tape.add_row(proj, gru.b_ih);
    let len = tape.value(embeddings).rows;
    let mut state = tape.constant(Tensor::zeros(1, hidden));
    let mut states = vec![state; len];
    let order: Box<dyn Iterator<Item = usize>> = if reverse {
        Box::new((0..len).rev())
    } else {
        Box::new(0..len)
    };
    for t in order {
        let gi = tape.slice_rows(proj, t, 1);
        state = gru_step(tape, gru, gi, state, hidden);
        states[t] = state;
    }
    states
}

/// Encodes one example onto `tape`.
pub(crate) fn encode_on_tape(
    tape: &mut Tape<'_>,
    p: &Layout<Var>,
    config: &ModelConfig,
    ex: &TokenizedExample,
    mode: &GateMode,
) -> Result<Encoded> {
    check_example(ex, config)?;
    let num_sentences = ex.num_sentences();
    match mode {
        GateMode::Forced(z) if z.len() != num_sentences => {
            return Err(Error::InvalidExample(format!(
                "forced gates have {} entries for {num_sentences} sentences",
                z.len()
            )))
        }
        GateMode::Linearized { z0, eta0 }
            if z0.len() != num_sentences || eta0.len() != num_sentences =>
        {
            return Err(Error::InvalidExample(
                "linearization point has the wrong length".into(),
            ))
        }
        _ => {}
    }

    let embeddings = tape.gather_rows(p.embedding, &ex.source_ids);
    let half = config.hidden_dim / 2;
    let fwd = run_direction(tape, &p.enc_fwd, embeddings, half, false);
    let bwd = run_direction(tape, &p.enc_bwd, embeddings, half, true);
    let fwd_all = tape.concat_rows(&fwd);
    let bwd_all = tape.concat_rows(&bwd);
    let hidden = tape.concat_cols(&[fwd_all, bwd_all]);

    let summary = tape.concat_cols(&[fwd[fwd.len() - 1], bwd[0]]);
    let bridged = tape.matmul_nt(summary, p.bridge_w);
    let bridged = tape.add_row(bridged, p.bridge_b);
    let init_state = tape.tanh(bridged);

    let cnn_source = match config.cnn_input {
        CnnInput::Embeddings => embeddings,
        CnnInput::Hidden => hidden,
    };
    let mut pooled_rows = Vec::with_capacity(num_sentences);
    for span in &ex.sentence_spans {
        let sentence = tape.slice_rows(cnn_source, span.start, span.len());
        let mut features = Vec::with_capacity(p.conv.len());
        for conv in &p.conv {
            let k = conv.kernel;
            let input = if span.len() < k {
                let pad = k - span.len();
                tape.pad_rows(sentence, pad / 2, pad - pad / 2)
            } else {
                sentence
            };
            let windows = tape.unfold(input, k);
            let maps = tape.matmul_nt(windows, conv.weight);
            let maps = tape.add_row(maps, conv.bias);
            let maps = tape.tanh(maps);
            features.push(tape.column_max(maps));
        }
        pooled_rows.push(tape.concat_cols(&features));
    }
    let sentence_reprs = tape.concat_rows(&pooled_rows);
    let mlp = tape.matmul_nt(sentence_reprs, p.mlp_w);
    let mlp = tape.add_row(mlp, p.mlp_b);
    let mlp = tape.tanh(mlp);
    let logits = tape.matmul_nt(mlp, p.head);
    let eta_col = tape.sigmoid(logits);
    let eta = tape.reshape(eta_col, 1, num_sentences);

    let owner = ex.sentence_of_tokens();
    let (z, significance) = match mode {
        GateMode::Natural => {
            let z = tape.straight_through(eta, config.gate_threshold);
            (z, tape.gate_lookup(z, p.significance, &owner))
        }
        GateMode::Forced(flags) => {
            let values = flags.iter().map(|&f| if f { 1.0 } else { 0.0 }).collect();
            let z = tape.constant(Tensor::row_vector(values));
            (z, tape.gate_lookup(z, p.significance, &owner))
        }
        GateMode::Linearized { z0, eta0 } => {
            let offset = z0.iter().zip(eta0).map(|(z, e)| z - e).collect();
            let offset = tape.constant(Tensor::row_vector(offset));
            let z = tape.add(eta, offset);
            let d0 = tape.slice_rows(p.significance, 0, 1);
            let d1 = tape.slice_rows(p.significance, 1, 1);
            let diff = tape.sub(d1, d0);
            let z_col = tape.reshape(z, num_sentences, 1);
            let per_sentence = tape.matmul(z_col, diff);
            let per_sentence = tape.add_row(per_sentence, d0);
            (z, tape.gather_rows(per_sentence, &owner))
        }
    };
    let fused = tape.add(hidden, significance);
    Ok(Encoded {
        hidden,
        sentence_reprs,
        eta,
        z,
        significance,
        fused,
        init_state,
    })
}

impl Encoded {
    pub(crate) fn to_state(&self, tape: &Tape<'_>, ex: &TokenizedExample) -> EncoderState {
        let z: Vec<u8> = tape
            .value(self.z)
            .data
            .iter()
            .map(|&v| u8::from(v > 0.5))
            .collect();
        let token_gates = ex.sentence_of_tokens().iter().map(|&s| z[s]).collect();
        EncoderState {
            hidden: tape.value(self.hidden).clone(),
            sentence_reprs: tape.value(self.sentence_reprs).clone(),
            eta: tape.value(self.eta).data.clone(),
            z,
            token_gates,
            significance: tape.value(self.significance).clone(),
            fused: tape.value(self.fused).clone(),
        }
    }
}
