//! Additive attention over the fused encoder states, GRU decoder and the
//! generate/copy output distribution.

use super::config::ModelConfig;
use super::encoder::{gru_step, Encoded};
use super::params::Layout;
use super::tape::{Tape, Var};
use crate::corpus::{TokenizedExample, Vocab};

/// Per-example quantities shared by every decoding step.
pub(crate) struct DecoderContext {
    fused: Var,
    attention_keys: Var,
    copy_keys: Var,
    /// Extended-vocabulary slot of every entry of the joint `[vocab ; source]` softmax.
    slot_map: Vec<usize>,
    extended_len: usize,
    vocab_size: usize,
}

pub(crate) struct StepOutput {
    pub state: Var,
    pub attention: Var,
    pub probs: Var,
}

impl DecoderContext {
    pub fn new(
        tape: &mut Tape<'_>,
        p: &Layout<Var>,
        config: &ModelConfig,
        enc: &Encoded,
        ex: &TokenizedExample,
    ) -> Self {
        let fused = enc.fused;
        let attention_keys = tape.matmul_nt(fused, p.att_feat);
        let copy_pre = tape.matmul(fused, p.copy_w);
        let copy_keys = tape.tanh(copy_pre);
        let vocab_size = config.vocab_size;
        let slot_map = (0..vocab_size)
            .chain(ex.source_extended_ids.iter().copied())
            .collect();
        DecoderContext {
            fused,
            attention_keys,
            copy_keys,
            slot_map,
            extended_len: ex.extended_vocab_len(vocab_size),
            vocab_size,
        }
    }

    pub fn extended_len(&self) -> usize {
        self.extended_len
    }

    /// Attention of the previous decoder state over source positions: `(u, α)`.
    pub fn attend(&self, tape: &mut Tape<'_>, p: &Layout<Var>, state: Var) -> (Var, Var) {
        let query = tape.matmul_nt(state, p.att_state);
        let query = tape.add_row(query, p.att_bias);
        let energy = tape.add_row(self.attention_keys, query);
        let energy = tape.tanh(energy);
        let scores = tape.matmul_nt(energy, p.att_v);
        let len = tape.value(scores).rows;
        let scores = tape.reshape(scores, 1, len);
        let alpha = tape.softmax_rows(scores);
        let context = tape.matmul(alpha, self.fused);
        (context, alpha)
    }

    /// Feeds `prev_token` (extended id) and returns the new state and output distribution.
    pub fn step(
        &self,
        tape: &mut Tape<'_>,
        p: &Layout<Var>,
        prev_token: usize,
        prev_state: Var,
    ) -> StepOutput {
        let input_id = if prev_token < self.vocab_size {
            prev_token
        } else {
            Vocab::UNK
        };
        let embedded = tape.gather_rows(p.embedding, &[input_id]);
        let (context, attention) = self.attend(tape, p, prev_state);

        let rnn_in = tape.concat_cols(&[embedded, context]);
        let gi = tape.matmul_nt(rnn_in, p.dec.w_ih);
        let gi = tape.add_row(gi, p.dec.b_ih);
        let width = tape.value(prev_state).cols;
        let state = gru_step(tape, &p.dec, gi, prev_state, width);

        let readout = tape.concat_cols(&[embedded, state, context]);
        let generate = tape.matmul_nt(readout, p.out_w);
        let generate = tape.add_row(generate, p.out_b);
        let copy = tape.matmul_nt(self.copy_keys, state);
        let source_len = tape.value(copy).rows;
        let copy = tape.reshape(copy, 1, source_len);
        let joint = tape.concat_cols(&[generate, copy]);
        let joint = tape.softmax_rows(joint);
        let probs = tape.scatter_cols(joint, &self.slot_map, self.extended_len);
        StepOutput {
            state,
            attention,
            probs,
        }
    }
}
