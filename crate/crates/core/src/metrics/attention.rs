use serde::{Deserialize, Serialize};

use crate::corpus::{decode_ids, TokenizedExample, Vocab};
use crate::error::Result;
use crate::model::{greedy_trace, GateMode, ModelConfig, ModelParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionStep {
    /// Token emitted at this step (`<eos>` on the final step when decoding stopped).
    pub token: String,
    pub alpha: Vec<f64>,
}

/// Greedy decoding under one gate setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionCondition {
    pub z: Vec<u8>,
    pub eta: Vec<f64>,
    pub steps: Vec<AttentionStep>,
    /// Column sums of the attention matrix, one per source token.
    pub attention_sum: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionDump {
    pub version: u32,
    pub id: usize,
    pub source_tokens: Vec<String>,
    pub sentence_spans: Vec<crate::corpus::Span>,
    pub natural: AttentionCondition,
    /// Every gate forced open.
    pub significant: AttentionCondition,
    /// Every gate forced closed.
    pub irrelevant: AttentionCondition,
}

fn condition(
    example: &TokenizedExample,
    params: &ModelParams,
    config: &ModelConfig,
    vocab: &Vocab,
    mode: &GateMode,
) -> Result<AttentionCondition> {
    let trace = greedy_trace(example, params, config, mode)?;
    let mut attention_sum = vec![0.0; example.source_len()];
    let mut steps = Vec::with_capacity(trace.attention.len());
    for (i, alpha) in trace.attention.into_iter().enumerate() {
        for (acc, a) in attention_sum.iter_mut().zip(&alpha) {
            *acc += a;
        }
        let id = trace.ids.get(i).copied().unwrap_or(Vocab::EOS);
        let token = decode_ids(&[id], vocab, &example.oov_tokens).remove(0);
        steps.push(AttentionStep { token, alpha });
    }
    Ok(AttentionCondition {
        z: trace.z,
        eta: trace.eta,
        steps,
        attention_sum,
    })
}

/// Per-step attention for the natural gates and for all-open / all-closed gates.
pub fn attention_dump(
    example: &TokenizedExample,
    params: &ModelParams,
    config: &ModelConfig,
    vocab: &Vocab,
) -> Result<AttentionDump> {
    let n = example.num_sentences();
    let source_tokens = decode_ids(&example.source_extended_ids, vocab, &example.oov_tokens);
    Ok(AttentionDump {
        version: super::report::REPORT_VERSION,
        id: example.id,
        source_tokens,
        sentence_spans: example.sentence_spans.clone(),
        natural: condition(example, params, config, vocab, &GateMode::Natural)?,
        significant: condition(
            example,
            params,
            config,
            vocab,
            &GateMode::Forced(vec![true; n]),
        )?,
        irrelevant: condition(
            example,
            params,
            config,
            vocab,
            &GateMode::Forced(vec![false; n]),
        )?,
    })
}
