use std::collections::HashSet;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Stemmer {
    None,
    #[default]
    Porter,
}

/// Phrase normalization used for matching and deduplication at evaluation time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatchConfig {
    pub stemmer: Stemmer,
    pub lowercase: bool,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            stemmer: Stemmer::Porter,
            lowercase: true,
        }
    }
}

fn is_special(token: &str) -> bool {
    token.len() > 2 && token.starts_with('<') && token.ends_with('>')
}

pub fn normalize_token(token: &str, config: &MatchConfig) -> String {
    if is_special(token) {
        return token.to_string();
    }
    let token = if config.lowercase {
        token.to_lowercase()
    } else {
        token.to_string()
    };
    match config.stemmer {
        Stemmer::None => token,
        Stemmer::Porter => porter_stemmer::stem(&token),
    }
}

/// Lowercases and stems every token; reserved `<...>` tokens pass through.
pub fn normalize_phrase<S: AsRef<str>>(phrase: &[S], config: &MatchConfig) -> Vec<String> {
    phrase
        .iter()
        .map(|t| normalize_token(t.as_ref(), config))
        .collect()
}

/// Normalizes and drops repeats, keeping first occurrences in order.
pub fn normalize_and_dedup<S: AsRef<str>>(
    phrases: &[Vec<S>],
    config: &MatchConfig,
) -> Vec<Vec<String>> {
    let mut seen = HashSet::new();
    phrases
        .iter()
        .filter(|p| !p.is_empty())
        .map(|p| normalize_phrase(p, config))
        .filter(|p| seen.insert(p.clone()))
        .collect()
}
