//! Raw record ingestion, normalization, sentence splitting, vocabulary and
//! index encoding of training examples.

mod example;
mod record;
mod tokenize;
mod vocab;

use serde::{Deserialize, Serialize};

pub use example::{decode_ids, encode_example, format_target, TokenizedExample};
pub use record::{build_document, preprocess_records, read_raw_records, CorpusConfig, RawRecord};
pub use tokenize::{tokenize, ABBREVIATIONS, DIGIT_TOKEN};
pub use vocab::{build_vocab, Vocab, SPECIAL_TOKENS};

/// Half-open token range `[start, end)` of one sentence. Serialized as `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "(usize, usize)", into = "(usize, usize)")]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.end
    }
}

impl From<(usize, usize)> for Span {
    fn from((start, end): (usize, usize)) -> Self {
        Span { start, end }
    }
}

impl From<Span> for (usize, usize) {
    fn from(span: Span) -> Self {
        (span.start, span.end)
    }
}

/// A tokenized source document with its sentence partition and gold keyphrases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    #[serde(default)]
    pub id: usize,
    pub tokens: Vec<String>,
    pub sentence_spans: Vec<Span>,
    #[serde(default)]
    pub keyphrases: Vec<Vec<String>>,
}

impl Document {
    /// Checks that the spans partition `[0, tokens.len())` into non-empty, ordered pieces.
    pub fn validate(&self) -> Result<(), String> {
        if self.tokens.is_empty() {
            return Err("document has no tokens".into());
        }
        let mut cursor = 0;
        for (i, span) in self.sentence_spans.iter().enumerate() {
            if span.start != cursor {
                return Err(format!(
                    "sentence {i} starts at {} but expected {cursor}",
                    span.start
                ));
            }
            if span.is_empty() {
                return Err(format!("sentence {i} is empty"));
            }
            cursor = span.end;
        }
        if cursor != self.tokens.len() {
            return Err(format!(
                "sentence spans cover {cursor} of {} tokens",
                self.tokens.len()
            ));
        }
        Ok(())
    }

    pub fn num_sentences(&self) -> usize {
        self.sentence_spans.len()
    }

    /// Sentence index of every token.
    pub fn sentence_of_tokens(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.tokens.len());
        for (i, span) in self.sentence_spans.iter().enumerate() {
            out.extend(std::iter::repeat_n(i, span.len()));
        }
        out
    }

    pub fn sentence(&self, i: usize) -> &[String] {
        &self.tokens[self.sentence_spans[i].range()]
    }
}

/// Splits a token list into sentences ending at each `"."` token.
///
/// Abbreviation tokens such as `"e.g."` never end a sentence because the
/// tokenizer keeps them whole. A trailing fragment without a period forms the
/// last sentence.
pub fn split_sentences(tokens: &[String]) -> Vec<Span> {
    let mut spans = Vec::new();
    let mut start = 0;
    for (i, tok) in tokens.iter().enumerate() {
        if tok == "." {
            spans.push(Span::new(start, i + 1));
            start = i + 1;
        }
    }
    if start < tokens.len() {
        spans.push(Span::new(start, tokens.len()));
    }
    spans
}
