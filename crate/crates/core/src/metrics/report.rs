use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::buckets::{bucket_summaries, SentenceBucket};
use super::normalize::{normalize_and_dedup, MatchConfig};
use super::score::{f1_at_5, f1_at_m, Prf, Scored};
use super::split::{split_eval, SplitPair};
use crate::corpus::Document;
use crate::error::{Error, Result};

pub const REPORT_VERSION: u32 = 1;

/// One line of `predict` output.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: usize,
    pub present: Vec<Vec<String>>,
    pub absent: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eta: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub z: Vec<u8>,
}

impl PredictionRecord {
    /// Present block first, then absent, in emission order.
    pub fn ordered(&self) -> Vec<Vec<String>> {
        self.present.iter().chain(&self.absent).cloned().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DocSplitScore {
    pub gold: usize,
    pub predictions: usize,
    pub at_5: Scored,
    pub at_m: Scored,
}

impl DocSplitScore {
    fn new(pair: &SplitPair) -> Self {
        DocSplitScore {
            gold: pair.gold.len(),
            predictions: pair.predictions.len(),
            at_5: f1_at_5(&pair.predictions, &pair.gold),
            at_m: f1_at_m(&pair.predictions, &pair.gold),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Splits<T> {
    pub present: T,
    pub absent: T,
    pub semi_present: T,
    pub absent_without_semi: T,
}

impl<T> Splits<T> {
    pub fn by_name(&self, name: &str) -> Option<&T> {
        match name {
            "present" => Some(&self.present),
            "absent" => Some(&self.absent),
            "semi_present" => Some(&self.semi_present),
            "absent_without_semi" => Some(&self.absent_without_semi),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocScores {
    pub id: usize,
    pub num_sentences: usize,
    pub splits: Splits<DocSplitScore>,
}

/// Corpus-level figures for one split. P/R/F1 are macro averages over the
/// documents whose gold set for this split is non-empty.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SplitSummary {
    pub at_5: Prf,
    pub at_m: Prf,
    pub correct_at_5: usize,
    pub correct_at_m: usize,
    pub gold_count: usize,
    pub prediction_count: usize,
    pub scored_documents: usize,
    /// correct_at_m / gold_count over the whole split.
    pub micro_recall_at_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub version: u32,
    pub matching: MatchConfig,
    pub documents: usize,
    pub raw_prediction_count: usize,
    pub normalized_prediction_count: usize,
    pub splits: Splits<SplitSummary>,
    pub buckets: Vec<SentenceBucket>,
    pub bucket_notices: Vec<String>,
    pub per_document: Vec<DocScores>,
}

fn summarize(docs: &[&DocSplitScore]) -> SplitSummary {
    let mut s = SplitSummary::default();
    for d in docs {
        s.correct_at_5 += d.at_5.matched;
        s.correct_at_m += d.at_m.matched;
        s.gold_count += d.gold;
        s.prediction_count += d.predictions;
        if d.gold > 0 {
            s.scored_documents += 1;
            for (acc, x) in [(&mut s.at_5, &d.at_5.prf), (&mut s.at_m, &d.at_m.prf)] {
                acc.precision += x.precision;
                acc.recall += x.recall;
                acc.f1 += x.f1;
            }
        }
    }
    if s.scored_documents > 0 {
        let n = s.scored_documents as f64;
        for acc in [&mut s.at_5, &mut s.at_m] {
            acc.precision /= n;
            acc.recall /= n;
            acc.f1 /= n;
        }
    }
    if s.gold_count > 0 {
        s.micro_recall_at_m = s.correct_at_m as f64 / s.gold_count as f64;
    }
    s
}

/// Scores every gold document against the prediction with the same id.
pub fn evaluate(
    gold: &[Document],
    predictions: &[PredictionRecord],
    matching: &MatchConfig,
    num_buckets: usize,
) -> Result<MetricsReport> {
    if gold.is_empty() {
        return Err(Error::EmptyDataset("gold documents"));
    }
    let mut by_id: HashMap<usize, &PredictionRecord> = HashMap::new();
    for p in predictions {
        if by_id.insert(p.id, p).is_some() {
            return Err(Error::DocumentMismatch(format!(
                "duplicate prediction id {:?}",
                p.id
            )));
        }
    }
    let mut gold_ids = HashSet::new();
    let mut per_document = Vec::with_capacity(gold.len());
    let mut raw_prediction_count = 0;
    let mut normalized_prediction_count = 0;
    for doc in gold {
        if !gold_ids.insert(doc.id) {
            return Err(Error::DocumentMismatch(format!(
                "duplicate gold id {:?}",
                doc.id
            )));
        }
        let pred = by_id.get(&doc.id).ok_or_else(|| {
            Error::DocumentMismatch(format!("no prediction for document {:?}", doc.id))
        })?;
        let ordered = pred.ordered();
        raw_prediction_count += ordered.iter().filter(|p| !p.is_empty()).count();
        normalized_prediction_count += normalize_and_dedup(&ordered, matching).len();
        let inputs = split_eval(doc, &ordered, &doc.keyphrases, matching);
        per_document.push(DocScores {
            id: doc.id,
            num_sentences: doc.num_sentences(),
            splits: Splits {
                present: DocSplitScore::new(&inputs.present),
                absent: DocSplitScore::new(&inputs.absent),
                semi_present: DocSplitScore::new(&inputs.semi_present),
                absent_without_semi: DocSplitScore::new(&inputs.absent_without_semi),
            },
        });
    }
    if let Some(extra) = predictions.iter().find(|p| !gold_ids.contains(&p.id)) {
        return Err(Error::DocumentMismatch(format!(
            "prediction for unknown document {:?}",
            extra.id
        )));
    }

    let column = |f: fn(&Splits<DocSplitScore>) -> &DocSplitScore| {
        summarize(
            &per_document
                .iter()
                .map(|d| f(&d.splits))
                .collect::<Vec<_>>(),
        )
    };
    let splits = Splits {
        present: column(|s| &s.present),
        absent: column(|s| &s.absent),
        semi_present: column(|s| &s.semi_present),
        absent_without_semi: column(|s| &s.absent_without_semi),
    };
    let (buckets, bucket_notices) = bucket_summaries(&per_document, num_buckets);
    Ok(MetricsReport {
        version: REPORT_VERSION,
        matching: *matching,
        documents: per_document.len(),
        raw_prediction_count,
        normalized_prediction_count,
        splits,
        buckets,
        bucket_notices,
        per_document,
    })
}
