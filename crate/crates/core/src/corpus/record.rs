use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::tokenize::tokenize;
use super::{split_sentences, Document, Span};
use crate::error::{Error, Result};

/// One title/abstract/keyphrase record as supplied by the user.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawRecord {
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub keyphrases: Vec<String>,
}

/// Input line format: `keywords` is a `;`-separated string (a JSON list is accepted too).
#[derive(Deserialize)]
struct RawLine {
    title: String,
    #[serde(rename = "abstract")]
    abstract_text: String,
    #[serde(default)]
    keywords: Keywords,
}

#[derive(Deserialize, Default)]
#[serde(untagged)]
enum Keywords {
    #[default]
    Missing,
    Joined(String),
    List(Vec<String>),
}

impl Keywords {
    fn into_list(self) -> Vec<String> {
        let raw = match self {
            Keywords::Missing => Vec::new(),
            Keywords::Joined(s) => s.split(';').map(str::to_string).collect(),
            Keywords::List(v) => v,
        };
        raw.into_iter()
            .map(|k| k.trim().to_string())
            .filter(|k| !k.is_empty())
            .collect()
    }
}

impl RawRecord {
    pub fn new(title: &str, abstract_text: &str, keyphrases: &[&str]) -> Self {
        RawRecord {
            title: title.to_string(),
            abstract_text: abstract_text.to_string(),
            keyphrases: keyphrases.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Title and abstract joined so the title becomes the first sentence.
    pub fn source_text(&self) -> String {
        let title = self.title.trim();
        let title = title.strip_suffix('.').unwrap_or(title).trim_end();
        format!("{title} . {}", self.abstract_text.trim())
    }

    pub(crate) fn all_tokens(&self) -> impl Iterator<Item = String> + '_ {
        tokenize(&self.source_text())
            .into_iter()
            .chain(self.keyphrases.iter().flat_map(|k| tokenize(k)))
    }

    fn check(&self, require_keyphrases: bool) -> std::result::Result<(), String> {
        if self.title.trim().is_empty() {
            return Err("title is empty".into());
        }
        if self.abstract_text.trim().is_empty() {
            return Err("abstract is empty".into());
        }
        if require_keyphrases && self.keyphrases.is_empty() {
            return Err("record has no keyphrases".into());
        }
        Ok(())
    }
}

/// Reads the raw JSON-lines input, validating every record.
pub fn read_raw_records(path: &Path, require_keyphrases: bool) -> Result<Vec<RawRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawLine = serde_json::from_str(&line).map_err(|source| Error::Jsonl {
            path: path.to_path_buf(),
            line: idx + 1,
            source,
        })?;
        let record = RawRecord {
            title: raw.title,
            abstract_text: raw.abstract_text,
            keyphrases: raw.keywords.into_list(),
        };
        record
            .check(require_keyphrases)
            .map_err(|reason| Error::InvalidRecord {
                path: path.to_path_buf(),
                line: idx + 1,
                reason,
            })?;
        records.push(record);
    }
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusConfig {
    /// Maximum vocabulary size, reserved tokens excluded.
    pub vocab_size: usize,
    /// Source documents are cut at the last sentence boundary within this many tokens.
    pub max_source_len: usize,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            vocab_size: 50_000,
            max_source_len: 400,
        }
    }
}

/// Tokenizes, splits and truncates one record into a [`Document`].
pub fn build_document(id: usize, record: &RawRecord, max_source_len: usize) -> Document {
    let mut tokens = tokenize(&record.source_text());
    let mut spans = split_sentences(&tokens);
    truncate_at_sentence(&mut tokens, &mut spans, max_source_len);
    let keyphrases = record
        .keyphrases
        .iter()
        .map(|k| tokenize(k))
        .filter(|k| !k.is_empty())
        .collect();
    Document {
        id,
        tokens,
        sentence_spans: spans,
        keyphrases,
    }
}

fn truncate_at_sentence(tokens: &mut Vec<String>, spans: &mut Vec<Span>, max_len: usize) {
    if tokens.len() <= max_len || max_len == 0 {
        return;
    }
    let keep = spans.iter().take_while(|s| s.end <= max_len).count();
    if keep == 0 {
        // a single overlong first sentence is cut mid-sentence
        tokens.truncate(max_len);
        spans.truncate(1);
        spans[0].end = max_len;
    } else {
        spans.truncate(keep);
        tokens.truncate(spans[keep - 1].end);
    }
}

pub fn preprocess_records(records: &[RawRecord], config: &CorpusConfig) -> Vec<Document> {
    records
        .iter()
        .enumerate()
        .map(|(id, r)| build_document(id, r, config.max_source_len))
        .collect()
}
