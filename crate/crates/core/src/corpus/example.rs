use serde::{Deserialize, Serialize};

use super::{Document, Span, Vocab};
use crate::labeling::{first_occurrence, KeyphraseCategory};

/// Index-encoded example with per-example extended vocabulary for copying.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenizedExample {
    pub id: usize,
    pub source_ids: Vec<usize>,
    /// Like `source_ids`, but OOV tokens get `vocab.len() + k` for the k-th distinct OOV.
    pub source_extended_ids: Vec<usize>,
    pub oov_tokens: Vec<String>,
    pub target_ids: Vec<usize>,
    pub sentence_spans: Vec<Span>,
}

impl TokenizedExample {
    pub fn source_len(&self) -> usize {
        self.source_ids.len()
    }

    pub fn num_sentences(&self) -> usize {
        self.sentence_spans.len()
    }

    pub fn extended_vocab_len(&self, vocab_len: usize) -> usize {
        vocab_len + self.oov_tokens.len()
    }

    pub fn sentence_of_tokens(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.source_len());
        for (i, span) in self.sentence_spans.iter().enumerate() {
            out.extend(std::iter::repeat_n(i, span.len()));
        }
        out
    }
}

/// Builds the concatenated target sequence.
///
/// Present keyphrases come first, ordered by where they first occur in the
/// source and joined by `<sep>`; `<peos>` always follows; then the absent
/// (including semi-present) keyphrases in gold order; then `<eos>`.
pub fn format_target(doc: &Document, categories: &[KeyphraseCategory]) -> Vec<String> {
    let mut present: Vec<(usize, usize)> = Vec::new();
    let mut absent: Vec<usize> = Vec::new();
    for (k, (kp, cat)) in doc.keyphrases.iter().zip(categories).enumerate() {
        match cat {
            KeyphraseCategory::Present => {
                let pos = first_occurrence(&doc.tokens, kp).unwrap_or(usize::MAX);
                present.push((pos, k));
            }
            _ => absent.push(k),
        }
    }
    present.sort();

    let sep = || Vocab::token_str(Vocab::SEP);
    let mut out = Vec::new();
    for (i, &(_, k)) in present.iter().enumerate() {
        if i > 0 {
            out.push(sep());
        }
        out.extend(doc.keyphrases[k].iter().cloned());
    }
    out.push(Vocab::token_str(Vocab::PEOS));
    for (i, &k) in absent.iter().enumerate() {
        if i > 0 {
            out.push(sep());
        }
        out.extend(doc.keyphrases[k].iter().cloned());
    }
    out.push(Vocab::token_str(Vocab::EOS));
    out
}

/// Maps source and target tokens to ids, assigning extended ids to source OOVs.
///
/// Target tokens in the vocabulary keep their id; OOV target tokens that also
/// occur in the source get the matching extended id, and everything else
/// becomes `<unk>`.
pub fn encode_example(doc: &Document, target: &[String], vocab: &Vocab) -> TokenizedExample {
    let mut oov_tokens: Vec<String> = Vec::new();
    let mut source_ids = Vec::with_capacity(doc.tokens.len());
    let mut source_extended_ids = Vec::with_capacity(doc.tokens.len());
    for tok in &doc.tokens {
        match vocab.get(tok) {
            Some(id) => {
                source_ids.push(id);
                source_extended_ids.push(id);
            }
            None => {
                let slot = match oov_tokens.iter().position(|t| t == tok) {
                    Some(slot) => slot,
                    None => {
                        oov_tokens.push(tok.clone());
                        oov_tokens.len() - 1
                    }
                };
                source_ids.push(Vocab::UNK);
                source_extended_ids.push(vocab.len() + slot);
            }
        }
    }
    let target_ids = target
        .iter()
        .map(|tok| match vocab.get(tok) {
            Some(id) => id,
            None => oov_tokens
                .iter()
                .position(|t| t == tok)
                .map_or(Vocab::UNK, |slot| vocab.len() + slot),
        })
        .collect();
    TokenizedExample {
        id: doc.id,
        source_ids,
        source_extended_ids,
        oov_tokens,
        target_ids,
        sentence_spans: doc.sentence_spans.clone(),
    }
}

/// Renders extended-vocabulary ids back into tokens.
pub fn decode_ids(ids: &[usize], vocab: &Vocab, oov_tokens: &[String]) -> Vec<String> {
    ids.iter()
        .map(|&id| match vocab.token(id) {
            Some(tok) => tok.to_string(),
            None => oov_tokens
                .get(id - vocab.len())
                .cloned()
                .unwrap_or_else(|| Vocab::token_str(Vocab::UNK)),
        })
        .collect()
}
