//! Generated corpora with planted keyphrases, used by tests, benchmarks and
//! the CLI fixture.
//!
//! Filler text and keyphrase words come from disjoint pools of made-up words
//! that are fixed points of the Porter stemmer, so every keyphrase relation
//! to the source is known by construction. Each document plants present
//! keyphrases contiguously and semi-present ones scattered inside a single
//! sentence; those sentences are the designated significant ones. Absent
//! keyphrases use pool words that never occur in the document. Optionally one
//! present keyphrase per document carries a word unique to that document and
//! left out of the vocabulary.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{split_sentences, Document, RawRecord, Vocab};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub documents: usize,
    pub min_sentences: usize,
    pub max_sentences: usize,
    /// Filler words per sentence, before planting.
    pub min_sentence_len: usize,
    pub max_sentence_len: usize,
    pub present_per_doc: usize,
    pub semi_present_per_doc: usize,
    pub absent_per_doc: usize,
    pub keyphrase_len: usize,
    pub keyphrase_pool: usize,
    pub filler_pool: usize,
    /// Put a document-unique, out-of-vocabulary word in the first present keyphrase.
    pub plant_oov: bool,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            documents: 32,
            min_sentences: 3,
            max_sentences: 6,
            min_sentence_len: 4,
            max_sentence_len: 7,
            present_per_doc: 2,
            semi_present_per_doc: 1,
            absent_per_doc: 1,
            keyphrase_len: 2,
            keyphrase_pool: 60,
            filler_pool: 40,
            plant_oov: false,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDocument {
    pub document: Document,
    /// 1 for sentences holding a planted present or semi-present keyphrase.
    pub significant: Vec<u8>,
    pub oov_word: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub documents: Vec<SyntheticDocument>,
    /// Every pool word plus `.`; planted OOV words are excluded.
    pub vocab: Vocab,
}

impl SyntheticCorpus {
    pub fn docs(&self) -> Vec<Document> {
        self.documents.iter().map(|d| d.document.clone()).collect()
    }

    /// Title is the first sentence, abstract the rest; tokenizing
    /// `title . abstract` gives back the document tokens.
    pub fn raw_records(&self) -> Vec<RawRecord> {
        self.documents
            .iter()
            .map(|d| {
                let doc = &d.document;
                let sentence = |i: usize| {
                    let toks = doc.sentence(i);
                    let words = toks.strip_suffix(&[".".to_string()]).unwrap_or(toks);
                    words.join(" ")
                };
                let title = sentence(0);
                let rest: Vec<String> = (1..doc.num_sentences())
                    .map(|i| format!("{} .", sentence(i)))
                    .collect();
                RawRecord {
                    title,
                    abstract_text: rest.join(" "),
                    keyphrases: doc.keyphrases.iter().map(|k| k.join(" ")).collect(),
                }
            })
            .collect()
    }
}

const CONSONANTS: &[u8] = b"bdfgklmnprtvz";
const VOWELS: &[u8] = b"aiou";

/// Distinct pseudo-words that the Porter stemmer leaves unchanged.
pub fn stem_stable_words(
    count: usize,
    rng: &mut ChaCha8Rng,
    exclude: &HashSet<String>,
) -> Vec<String> {
    let mut seen: HashSet<String> = exclude.clone();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let syllables = rng.gen_range(2..=3);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push(*CONSONANTS.choose(rng).expect("non-empty") as char);
            w.push(*VOWELS.choose(rng).expect("non-empty") as char);
        }
        w.push(*CONSONANTS.choose(rng).expect("non-empty") as char);
        if porter_stemmer::stem(&w) == w && seen.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

pub fn generate(config: &SyntheticConfig) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let filler = stem_stable_words(config.filler_pool, &mut rng, &HashSet::new());
    let kp_words = stem_stable_words(
        config.keyphrase_pool,
        &mut rng,
        &filler.iter().cloned().collect(),
    );
    let mut taken: HashSet<String> = filler.iter().chain(&kp_words).cloned().collect();
    let oov_words = if config.plant_oov {
        stem_stable_words(config.documents, &mut rng, &taken)
    } else {
        vec![]
    };
    taken.extend(oov_words.iter().cloned());

    let per_doc = config.present_per_doc + config.semi_present_per_doc + config.absent_per_doc;
    assert!(
        per_doc * config.keyphrase_len <= kp_words.len(),
        "keyphrase pool too small for the requested keyphrases per document"
    );
    assert!(
        config.present_per_doc + config.semi_present_per_doc <= config.min_sentences,
        "more planted keyphrases than sentences"
    );

    let mut documents = Vec::with_capacity(config.documents);
    for d in 0..config.documents {
        let n = rng.gen_range(config.min_sentences..=config.max_sentences);
        let mut sentences: Vec<Vec<String>> = (0..n)
            .map(|_| {
                let len = rng.gen_range(config.min_sentence_len..=config.max_sentence_len);
                (0..len)
                    .map(|_| filler.choose(&mut rng).expect("non-empty").clone())
                    .collect()
            })
            .collect();

        let mut words: Vec<String> = kp_words
            .choose_multiple(&mut rng, per_doc * config.keyphrase_len)
            .cloned()
            .collect();
        let mut next_phrase = |len: usize| -> Vec<String> { words.drain(..len).collect() };
        let mut hosts: Vec<usize> = (0..n).collect();
        hosts.shuffle(&mut rng);
        let mut significant = vec![0u8; n];
        let mut present = Vec::new();
        let mut semi = Vec::new();
        let mut oov_word = None;
        for k in 0..config.present_per_doc {
            let mut phrase = next_phrase(config.keyphrase_len);
            if k == 0 && config.plant_oov {
                let w = oov_words[d].clone();
                *phrase.last_mut().expect("keyphrase_len > 0") = w.clone();
                oov_word = Some(w);
            }
            let host = hosts[k];
            let s = &mut sentences[host];
            let at = rng.gen_range(0..=s.len());
            s.splice(at..at, phrase.iter().cloned());
            significant[host] = 1;
            present.push(phrase);
        }
        for k in 0..config.semi_present_per_doc {
            let phrase = next_phrase(config.keyphrase_len);
            let host = hosts[config.present_per_doc + k];
            let s = &mut sentences[host];
            // reversed order with filler in between keeps it non-contiguous
            for w in &phrase {
                s.insert(0, filler.choose(&mut rng).expect("non-empty").clone());
                s.insert(0, w.clone());
            }
            significant[host] = 1;
            semi.push(phrase);
        }
        let absent: Vec<Vec<String>> = (0..config.absent_per_doc)
            .map(|_| next_phrase(config.keyphrase_len))
            .collect();

        let mut tokens = Vec::new();
        for s in &sentences {
            tokens.extend(s.iter().cloned());
            tokens.push(".".to_string());
        }
        let sentence_spans = split_sentences(&tokens);
        let keyphrases = present.into_iter().chain(semi).chain(absent).collect();
        documents.push(SyntheticDocument {
            document: Document {
                id: d,
                tokens,
                sentence_spans,
                keyphrases,
            },
            significant,
            oov_word,
        });
    }
    let vocab = Vocab::from_words(
        std::iter::once(".".to_string())
            .chain(filler)
            .chain(kp_words),
    );
    SyntheticCorpus { documents, vocab }
}
