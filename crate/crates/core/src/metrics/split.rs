use serde::{Deserialize, Serialize};

use super::normalize::{normalize_and_dedup, normalize_phrase, MatchConfig};
use crate::corpus::Document;
use crate::labeling::{classify_tokens, KeyphraseCategory};

/// Normalized gold and predictions for one split of one document.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SplitPair {
    pub predictions: Vec<Vec<String>>,
    pub gold: Vec<Vec<String>>,
}

/// Per-split scoring inputs of one document.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SplitInputs {
    pub present: SplitPair,
    pub absent: SplitPair,
    pub semi_present: SplitPair,
    pub absent_without_semi: SplitPair,
}

impl SplitInputs {
    pub fn iter(&self) -> impl Iterator<Item = (&'static str, &SplitPair)> {
        [
            ("present", &self.present),
            ("absent", &self.absent),
            ("semi_present", &self.semi_present),
            ("absent_without_semi", &self.absent_without_semi),
        ]
        .into_iter()
    }
}

/// Routes gold and predicted phrases into the four evaluation splits.
///
/// Everything is compared in normalized (lowercased, stemmed) form, and both
/// gold and predictions are routed by their relation to the source text, so
/// the model's own present/absent block placement does not matter.
pub fn split_eval<S: AsRef<str>, G: AsRef<str>>(
    doc: &Document,
    predictions: &[Vec<S>],
    gold: &[Vec<G>],
    matching: &MatchConfig,
) -> SplitInputs {
    let source = normalize_phrase(&doc.tokens, matching);
    let source: Vec<&str> = source.iter().map(String::as_str).collect();
    let classify = |phrase: &Vec<String>| {
        let kp: Vec<&str> = phrase.iter().map(String::as_str).collect();
        classify_tokens(&source, &doc.sentence_spans, &kp).0
    };

    let mut out = SplitInputs::default();
    for phrase in normalize_and_dedup(gold, matching) {
        route(&mut out, classify(&phrase), phrase, true);
    }
    for phrase in normalize_and_dedup(predictions, matching) {
        route(&mut out, classify(&phrase), phrase, false);
    }
    out
}

fn route(out: &mut SplitInputs, category: KeyphraseCategory, phrase: Vec<String>, is_gold: bool) {
    let (main, sub) = match category {
        KeyphraseCategory::Present => {
            push(&mut out.present, phrase, is_gold);
            return;
        }
        KeyphraseCategory::SemiPresent => (&mut out.absent, &mut out.semi_present),
        KeyphraseCategory::AbsentOther => (&mut out.absent, &mut out.absent_without_semi),
    };
    push(main, phrase.clone(), is_gold);
    push(sub, phrase, is_gold);
}

fn push(pair: &mut SplitPair, phrase: Vec<String>, is_gold: bool) {
    if is_gold {
        pair.gold.push(phrase);
    } else {
        pair.predictions.push(phrase);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::split_sentences;

    fn doc(text: &str) -> Document {
        let tokens: Vec<String> = text.split_whitespace().map(str::to_string).collect();
        let sentence_spans = split_sentences(&tokens);
        Document {
            id: 0,
            tokens,
            sentence_spans,
            keyphrases: vec![],
        }
    }

    fn ph(v: &[&str]) -> Vec<Vec<String>> {
        v.iter()
            .map(|p| p.split_whitespace().map(str::to_string).collect())
            .collect()
    }

    #[test]
    fn routes_by_source_relation() {
        let d = doc("deep neural networks learn . graphs are sparse matrices .");
        // "neural network" matches after stemming; "sparse graphs" is semi-present.
        let gold = ph(&[
            "neural network",
            "sparse graphs",
            "quantum",
            "deep networks",
        ]);
        let preds = ph(&["neural networks", "quantum", "graphs sparse", "deep learn"]);
        let s = split_eval(&d, &preds, &gold, &MatchConfig::default());
        assert_eq!(s.present.gold, ph(&["neural network"]));
        assert_eq!(s.present.predictions, ph(&["neural network"]));
        assert_eq!(s.absent.gold.len(), 3);
        assert_eq!(s.semi_present.gold, ph(&["spars graph", "deep network"]));
        assert_eq!(s.absent_without_semi.gold, ph(&["quantum"]));
        assert_eq!(
            s.semi_present.predictions,
            ph(&["graph spars", "deep learn"])
        );
        assert_eq!(s.absent_without_semi.predictions, ph(&["quantum"]));
    }

    #[test]
    fn partitions_are_exhaustive_and_disjoint() {
        let d = doc("a b c . d e f .");
        let gold = ph(&["a b", "c a", "b d", "x", "A B"]);
        let s = split_eval(&d, &gold, &gold, &MatchConfig::default());
        assert_eq!(s.present.gold.len() + s.absent.gold.len(), 4);
        assert_eq!(
            s.semi_present.gold.len() + s.absent_without_semi.gold.len(),
            s.absent.gold.len()
        );
    }
}
