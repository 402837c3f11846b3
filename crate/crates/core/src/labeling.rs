//! Present / semi-present / absent keyphrase taxonomy and the per-sentence
//! weak labels derived from it.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeyphraseCategory {
    /// Contiguous token subsequence of the source.
    Present,
    /// Not contiguous, but every word occurs in one sentence.
    SemiPresent,
    /// Neither of the above.
    AbsentOther,
}

impl KeyphraseCategory {
    pub fn is_present(self) -> bool {
        self == KeyphraseCategory::Present
    }

    /// Whether the keyphrase marks its supporting sentences as significant.
    pub fn is_supportive(self) -> bool {
        self != KeyphraseCategory::AbsentOther
    }
}

/// A document with its keyphrase categories and sentence weak labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    #[serde(flatten)]
    pub document: Document,
    pub categories: Vec<KeyphraseCategory>,
    pub sentence_labels: Vec<u8>,
    pub supporting_sentences: Vec<Vec<usize>>,
}

/// Start of the first contiguous occurrence of `needle` in `haystack`.
pub fn first_occurrence<T: PartialEq>(haystack: &[T], needle: &[T]) -> Option<usize> {
    occurrences(haystack, needle).next()
}

fn occurrences<'a, T: PartialEq>(
    haystack: &'a [T],
    needle: &'a [T],
) -> impl Iterator<Item = usize> + 'a {
    let windows = if needle.is_empty() || needle.len() > haystack.len() {
        0
    } else {
        haystack.len() - needle.len() + 1
    };
    (0..windows).filter(move |&i| haystack[i..i + needle.len()] == *needle)
}

/// Categorizes one keyphrase against `doc` and returns its supporting sentences.
///
/// Present keyphrases are supported by every sentence that a contiguous match
/// overlaps; semi-present ones by every sentence whose word set covers the
/// keyphrase's word set. Matching is exact token equality.
pub fn classify_keyphrase<T>(doc: &Document, kp: &[T]) -> Result<(KeyphraseCategory, Vec<usize>)>
where
    T: AsRef<str>,
{
    if kp.is_empty() {
        return Err(Error::EmptyKeyphrase);
    }
    let kp: Vec<&str> = kp.iter().map(AsRef::as_ref).collect();
    let tokens: Vec<&str> = doc.tokens.iter().map(String::as_str).collect();
    Ok(classify_tokens(&tokens, &doc.sentence_spans, &kp))
}

pub(crate) fn classify_tokens(
    tokens: &[&str],
    spans: &[crate::corpus::Span],
    kp: &[&str],
) -> (KeyphraseCategory, Vec<usize>) {
    if first_occurrence(tokens, kp).is_some() {
        let mut support = Vec::new();
        for start in occurrences(tokens, kp) {
            let end = start + kp.len();
            for (i, span) in spans.iter().enumerate() {
                if span.start < end && start < span.end && !support.contains(&i) {
                    support.push(i);
                }
            }
        }
        support.sort_unstable();
        return (KeyphraseCategory::Present, support);
    }
    let words: HashSet<&str> = kp.iter().copied().collect();
    let support: Vec<usize> = spans
        .iter()
        .enumerate()
        .filter(|(_, span)| {
            let sentence: HashSet<&str> = tokens[span.range()].iter().copied().collect();
            words.is_subset(&sentence)
        })
        .map(|(i, _)| i)
        .collect();
    if support.is_empty() {
        (KeyphraseCategory::AbsentOther, support)
    } else {
        (KeyphraseCategory::SemiPresent, support)
    }
}

/// `a_i = 1` for every sentence supporting a present or semi-present keyphrase.
pub fn weak_labels(doc: &Document, kps: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut labels = vec![0u8; doc.num_sentences()];
    for kp in kps {
        let (cat, support) = classify_keyphrase(doc, kp)?;
        if cat.is_supportive() {
            for i in support {
                labels[i] = 1;
            }
        }
    }
    Ok(labels)
}

/// Labels every gold keyphrase of `doc`.
pub fn label_document(doc: Document) -> Result<LabeledExample> {
    let mut categories = Vec::with_capacity(doc.keyphrases.len());
    let mut supporting_sentences = Vec::with_capacity(doc.keyphrases.len());
    let mut sentence_labels = vec![0u8; doc.num_sentences()];
    for kp in &doc.keyphrases {
        let (cat, support) = classify_keyphrase(&doc, kp)?;
        if cat.is_supportive() {
            for &i in &support {
                sentence_labels[i] = 1;
            }
        }
        categories.push(cat);
        supporting_sentences.push(support);
    }
    Ok(LabeledExample {
        document: doc,
        categories,
        sentence_labels,
        supporting_sentences,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub documents: usize,
    pub mean_sentences: f64,
    pub mean_significant_sentences: f64,
    /// Mean over documents of (significant sentences / sentences).
    pub significant_fraction: f64,
    /// Total significant sentences over total sentences.
    pub pooled_significant_fraction: f64,
    pub present_keyphrases: usize,
    pub semi_present_keyphrases: usize,
    pub absent_other_keyphrases: usize,
    /// Semi-present share of all absent (semi-present + other) keyphrases.
    pub semi_present_share_of_absent: f64,
}

pub fn corpus_stats(dataset: &[LabeledExample]) -> Result<CorpusStats> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset("no labeled examples"));
    }
    let n = dataset.len() as f64;
    let mut sentences = 0usize;
    let mut significant = 0usize;
    let mut fraction_sum = 0.0;
    let mut counts = [0usize; 3];
    for ex in dataset {
        let s = ex.sentence_labels.len();
        let sig = ex.sentence_labels.iter().filter(|&&a| a == 1).count();
        sentences += s;
        significant += sig;
        if s > 0 {
            fraction_sum += sig as f64 / s as f64;
        }
        for cat in &ex.categories {
            counts[*cat as usize] += 1;
        }
    }
    let absent = counts[1] + counts[2];
    Ok(CorpusStats {
        documents: dataset.len(),
        mean_sentences: sentences as f64 / n,
        mean_significant_sentences: significant as f64 / n,
        significant_fraction: fraction_sum / n,
        pooled_significant_fraction: if sentences == 0 {
            0.0
        } else {
            significant as f64 / sentences as f64
        },
        present_keyphrases: counts[0],
        semi_present_keyphrases: counts[1],
        absent_other_keyphrases: counts[2],
        semi_present_share_of_absent: if absent == 0 {
            0.0
        } else {
            counts[1] as f64 / absent as f64
        },
    })
}
