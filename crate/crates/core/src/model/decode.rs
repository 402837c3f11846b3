use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::decoder::DecoderContext;
use super::encoder::{encode_on_tape, GateMode};
use super::tape::Tape;
use super::{bind, ModelConfig, ModelParams};
use crate::corpus::{decode_ids, TokenizedExample, Vocab};
use crate::error::Result;
use crate::metrics::{normalize_phrase, MatchConfig};

/// Raw greedy-decoding record for one example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeTrace {
    /// Emitted extended-vocabulary ids, `<eos>` excluded.
    pub ids: Vec<usize>,
    /// Attention weights over source positions, one row per emitted step.
    pub attention: Vec<Vec<f64>>,
    pub eta: Vec<f64>,
    pub z: Vec<u8>,
}

/// Keyphrases split into the present and absent blocks after deduplication.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Prediction {
    pub present: Vec<Vec<String>>,
    pub absent: Vec<Vec<String>>,
}

impl Prediction {
    /// Present block first, then absent.
    pub fn all(&self) -> impl Iterator<Item = &Vec<String>> {
        self.present.iter().chain(&self.absent)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub prediction: Prediction,
    pub trace: DecodeTrace,
}

/// Argmax decoding until `<eos>` or `max_decode_len` steps.
///
/// `<pad>` and `<bos>` are never emitted; ties go to the lowest id.
pub fn greedy_trace(
    example: &TokenizedExample,
    params: &ModelParams,
    config: &ModelConfig,
    mode: &GateMode,
) -> Result<DecodeTrace> {
    let mut tape = Tape::new();
    let p = bind(&mut tape, params);
    let enc = encode_on_tape(&mut tape, &p, config, example, mode)?;
    let ctx = DecoderContext::new(&mut tape, &p, config, &enc, example);
    let state0 = enc.to_state(&tape, example);

    let mut ids = Vec::new();
    let mut attention = Vec::new();
    let mut state = enc.init_state;
    let mut prev = Vocab::BOS;
    for _ in 0..config.max_decode_len {
        let out = ctx.step(&mut tape, &p, prev, state);
        let probs = &tape.value(out.probs).data;
        let mut best = Vocab::UNK;
        for (id, &pr) in probs.iter().enumerate() {
            if id != Vocab::PAD && id != Vocab::BOS && pr > probs[best] {
                best = id;
            }
        }
        attention.push(tape.value(out.attention).data.clone());
        if best == Vocab::EOS {
            break;
        }
        ids.push(best);
        state = out.state;
        prev = best;
    }
    Ok(DecodeTrace {
        ids,
        attention,
        eta: state0.eta,
        z: state0.z,
    })
}

/// Splits decoded ids on `<peos>` (first one only) and `<sep>`, rendering OOV
/// ids through `oov_tokens`, and drops duplicates after normalization.
pub fn split_prediction(
    ids: &[usize],
    vocab: &Vocab,
    oov_tokens: &[String],
    matching: &MatchConfig,
) -> Prediction {
    let mut blocks: [Vec<Vec<usize>>; 2] = [vec![vec![]], vec![vec![]]];
    let mut block = 0;
    for &id in ids {
        match id {
            Vocab::PEOS if block == 0 => {
                block = 1;
            }
            Vocab::SEP | Vocab::PEOS => blocks[block].push(vec![]),
            Vocab::EOS => break,
            _ => blocks[block]
                .last_mut()
                .expect("block never empty")
                .push(id),
        }
    }
    let mut seen = HashSet::new();
    let mut render = |phrases: &[Vec<usize>]| -> Vec<Vec<String>> {
        phrases
            .iter()
            .filter(|p| !p.is_empty())
            .map(|p| decode_ids(p, vocab, oov_tokens))
            .filter(|p| seen.insert(normalize_phrase(p, matching)))
            .collect()
    };
    let present = render(&blocks[0]);
    let absent = render(&blocks[1]);
    Prediction { present, absent }
}

/// Greedy decoding followed by keyphrase splitting.
pub fn greedy_decode(
    example: &TokenizedExample,
    params: &ModelParams,
    config: &ModelConfig,
    vocab: &Vocab,
    matching: &MatchConfig,
) -> Result<Decoded> {
    let trace = greedy_trace(example, params, config, &GateMode::Natural)?;
    let prediction = split_prediction(&trace.ids, vocab, &example.oov_tokens, matching);
    Ok(Decoded { prediction, trace })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab() -> Vocab {
        Vocab::from_words(["a", "b", "y1"])
    }

    fn phrases(v: &[&str]) -> Vec<Vec<String>> {
        v.iter()
            .map(|p| p.split_whitespace().map(str::to_string).collect())
            .collect()
    }

    #[test]
    fn block_split() {
        let v = vocab();
        let y1 = v.get("y1").unwrap();
        let p = split_prediction(
            &[y1, Vocab::PEOS, Vocab::EOS],
            &v,
            &[],
            &MatchConfig::default(),
        );
        assert_eq!(p.present, phrases(&["y1"]));
        assert!(p.absent.is_empty());
    }

    #[test]
    fn duplicates_removed() {
        let v = vocab();
        let a = v.get("a").unwrap();
        let b = v.get("b").unwrap();
        let ids = [
            a,
            Vocab::SEP,
            a,
            Vocab::PEOS,
            a,
            b,
            Vocab::SEP,
            a,
            Vocab::EOS,
        ];
        let p = split_prediction(&ids, &v, &[], &MatchConfig::default());
        assert_eq!(p.present, phrases(&["a"]));
        assert_eq!(p.absent, phrases(&["a b"]));
    }

    #[test]
    fn oov_rendering_and_degenerate_input() {
        let v = vocab();
        let p = split_prediction(
            &[v.len()],
            &v,
            &["foo".to_string()],
            &MatchConfig::default(),
        );
        assert_eq!(p.present, phrases(&["foo"]));
        let empty = split_prediction(
            &[Vocab::SEP, Vocab::PEOS, Vocab::SEP],
            &v,
            &[],
            &MatchConfig::default(),
        );
        assert_eq!(empty, Prediction::default());
    }
}
