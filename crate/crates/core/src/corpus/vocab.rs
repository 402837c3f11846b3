use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::record::RawRecord;
use super::tokenize::DIGIT_TOKEN;
use crate::error::{Error, Result};

/// Reserved tokens at fixed ids `0..SPECIAL_TOKENS.len()`.
pub const SPECIAL_TOKENS: [&str; 7] = [
    "<pad>",
    "<unk>",
    "<bos>",
    "<eos>",
    "<sep>",
    "<peos>",
    DIGIT_TOKEN,
];

/// Bijective token/id map with the reserved tokens first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabFile {
    version: u32,
    tokens: Vec<String>,
}

impl Vocab {
    pub const PAD: usize = 0;
    pub const UNK: usize = 1;
    pub const BOS: usize = 2;
    pub const EOS: usize = 3;
    pub const SEP: usize = 4;
    pub const PEOS: usize = 5;
    pub const DIGIT: usize = 6;

    /// Builds a vocabulary from `words` (specials are prepended, duplicates ignored).
    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Vocab {
            tokens: Vec::new(),
            index: HashMap::new(),
        };
        for special in SPECIAL_TOKENS {
            vocab.push(special.to_string());
        }
        for word in words {
            vocab.push(word.into());
        }
        vocab
    }

    fn push(&mut self, token: String) {
        if !self.index.contains_key(&token) {
            self.index.insert(token.clone(), self.tokens.len());
            self.tokens.push(token);
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn id_or_unk(&self, token: &str) -> usize {
        self.get(token).unwrap_or(Self::UNK)
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Reserved token text for one of the fixed special ids.
    pub fn token_str(id: usize) -> String {
        SPECIAL_TOKENS[id].to_string()
    }

    pub fn is_special(id: usize) -> bool {
        id < SPECIAL_TOKENS.len()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(VocabFile {
            version: 1,
            tokens: self.tokens.clone(),
        })
        .expect("vocab serializes")
    }

    /// Rebuilds a vocabulary from an id-ordered token list; the specials must lead.
    pub fn from_token_list(tokens: Vec<String>) -> Result<Self> {
        let leads = tokens.len() >= SPECIAL_TOKENS.len()
            && tokens.iter().zip(SPECIAL_TOKENS).all(|(t, s)| t == s);
        if !leads {
            return Err(Error::InvalidConfig(
                "vocabulary must start with the reserved tokens".into(),
            ));
        }
        let vocab = Vocab::from_words(tokens.iter().skip(SPECIAL_TOKENS.len()).cloned());
        if vocab.len() != tokens.len() {
            return Err(Error::InvalidConfig(
                "vocabulary contains duplicate tokens".into(),
            ));
        }
        Ok(vocab)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        crate::io::write_json(path, &self.to_json())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let file: VocabFile = crate::io::read_json(path)?;
        if file.version != 1 {
            return Err(Error::InvalidConfig(format!(
                "unsupported vocabulary version {}",
                file.version
            )));
        }
        Vocab::from_token_list(file.tokens)
    }
}

/// Ranks corpus words by frequency (ties lexicographic) and keeps the top `max_size`.
///
/// Counts cover titles, abstracts and keyphrases (after tokenization); the
/// reserved tokens never compete for a slot.
pub fn build_vocab<'a, I>(records: I, max_size: usize) -> Result<Vocab>
where
    I: IntoIterator<Item = &'a RawRecord>,
{
    let mut counts: HashMap<String, usize> = HashMap::new();
    let mut seen_any = false;
    for record in records {
        seen_any = true;
        for token in record.all_tokens() {
            *counts.entry(token).or_default() += 1;
        }
    }
    if !seen_any {
        return Err(Error::EmptyCorpus);
    }
    Ok(rank_counts(counts, max_size))
}

pub(crate) fn rank_counts(counts: HashMap<String, usize>, max_size: usize) -> Vocab {
    let mut ranked: Vec<(String, usize)> = counts
        .into_iter()
        .filter(|(tok, _)| !SPECIAL_TOKENS.contains(&tok.as_str()))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Vocab::from_words(ranked.into_iter().take(max_size).map(|(t, _)| t))
}
