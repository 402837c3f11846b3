use serde::{Deserialize, Serialize};

use super::report::{DocScores, MetricsReport};
use super::score::Scored;
use crate::error::{Error, Result};

/// Mean per-document F1 over the scorable documents of a bucket.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BucketMeans {
    pub present_f1_at_5: f64,
    pub present_f1_at_m: f64,
    pub absent_f1_at_5: f64,
    pub absent_f1_at_m: f64,
}

/// Documents with `min_sentences <= n < max_sentences`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceBucket {
    pub min_sentences: usize,
    pub max_sentences: usize,
    pub documents: usize,
    pub means: BucketMeans,
}

/// Edges `e_0 <= ... <= e_n` such that bucket `i` is `[e_i, e_{i+1})` and
/// each holds about `1/n` of the documents. Repeated counts can make edges
/// coincide, which yields empty buckets.
pub fn quantile_edges(counts: &[usize], num_buckets: usize) -> Vec<usize> {
    let mut sorted = counts.to_vec();
    sorted.sort_unstable();
    if sorted.is_empty() || num_buckets == 0 {
        return vec![];
    }
    let n = sorted.len();
    let mut edges: Vec<usize> = (0..num_buckets)
        .map(|i| sorted[i * n / num_buckets])
        .collect();
    edges.push(sorted[n - 1] + 1);
    edges
}

fn mean_f1(docs: &[&DocScores], get: fn(&DocScores) -> &Scored) -> f64 {
    let vals: Vec<f64> = docs
        .iter()
        .map(|d| get(d))
        .filter(|s| !s.undefined)
        .map(|s| s.prf.f1)
        .collect();
    if vals.is_empty() {
        0.0
    } else {
        vals.iter().sum::<f64>() / vals.len() as f64
    }
}

fn bucket_means(docs: &[&DocScores]) -> BucketMeans {
    BucketMeans {
        present_f1_at_5: mean_f1(docs, |d| &d.splits.present.at_5),
        present_f1_at_m: mean_f1(docs, |d| &d.splits.present.at_m),
        absent_f1_at_5: mean_f1(docs, |d| &d.splits.absent.at_5),
        absent_f1_at_m: mean_f1(docs, |d| &d.splits.absent.at_m),
    }
}

fn members(docs: &[DocScores], lo: usize, hi: usize) -> Vec<&DocScores> {
    docs.iter()
        .filter(|d| (lo..hi).contains(&d.num_sentences))
        .collect()
}

fn empty_notice(lo: usize, hi: usize) -> String {
    format!("bucket [{lo}, {hi}) has no documents and is omitted")
}

/// Buckets `docs` by sentence count using explicit edges.
pub fn bucketize(docs: &[DocScores], edges: &[usize]) -> (Vec<SentenceBucket>, Vec<String>) {
    let mut buckets = Vec::new();
    let mut notices = Vec::new();
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let m = members(docs, lo, hi);
        if m.is_empty() {
            notices.push(empty_notice(lo, hi));
            continue;
        }
        buckets.push(SentenceBucket {
            min_sentences: lo,
            max_sentences: hi,
            documents: m.len(),
            means: bucket_means(&m),
        });
    }
    (buckets, notices)
}

pub(crate) fn bucket_summaries(
    docs: &[DocScores],
    num_buckets: usize,
) -> (Vec<SentenceBucket>, Vec<String>) {
    let counts: Vec<usize> = docs.iter().map(|d| d.num_sentences).collect();
    bucketize(docs, &quantile_edges(&counts, num_buckets))
}

/// `(treatment - baseline) / baseline`; `None` when the baseline is zero.
pub fn relative_gain(baseline: f64, treatment: f64) -> Option<f64> {
    (baseline != 0.0).then(|| (treatment - baseline) / baseline)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BucketGains {
    pub present_f1_at_5: Option<f64>,
    pub present_f1_at_m: Option<f64>,
    pub absent_f1_at_5: Option<f64>,
    pub absent_f1_at_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketComparison {
    pub min_sentences: usize,
    pub max_sentences: usize,
    pub documents: usize,
    pub baseline: BucketMeans,
    pub treatment: BucketMeans,
    pub gain: BucketGains,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketAnalysis {
    pub version: u32,
    pub edges: Vec<usize>,
    pub buckets: Vec<BucketComparison>,
    pub notices: Vec<String>,
}

/// Compares two reports over the same documents, bucket by bucket.
///
/// When `edges` is `None`, `num_buckets` quantile edges are computed from the
/// documents' sentence counts.
pub fn bucket_analysis(
    baseline: &MetricsReport,
    treatment: &MetricsReport,
    edges: Option<&[usize]>,
    num_buckets: usize,
) -> Result<BucketAnalysis> {
    let base_docs = &baseline.per_document;
    let treat_docs = &treatment.per_document;
    if base_docs.len() != treat_docs.len() {
        return Err(Error::DocumentMismatch(format!(
            "baseline has {} documents, treatment has {}",
            base_docs.len(),
            treat_docs.len()
        )));
    }
    for (b, t) in base_docs.iter().zip(treat_docs) {
        if b.id != t.id || b.num_sentences != t.num_sentences {
            return Err(Error::DocumentMismatch(format!(
                "document {:?} does not line up with {:?}",
                b.id, t.id
            )));
        }
    }
    let edges = match edges {
        Some(e) => {
            if e.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::InvalidConfig(
                    "bucket edges must be non-decreasing".into(),
                ));
            }
            e.to_vec()
        }
        None => quantile_edges(
            &base_docs
                .iter()
                .map(|d| d.num_sentences)
                .collect::<Vec<_>>(),
            num_buckets,
        ),
    };

    let mut buckets = Vec::new();
    let mut notices = Vec::new();
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let b = members(base_docs, lo, hi);
        if b.is_empty() {
            notices.push(empty_notice(lo, hi));
            continue;
        }
        let t = members(treat_docs, lo, hi);
        let (bm, tm) = (bucket_means(&b), bucket_means(&t));
        buckets.push(BucketComparison {
            min_sentences: lo,
            max_sentences: hi,
            documents: b.len(),
            baseline: bm,
            treatment: tm,
            gain: BucketGains {
                present_f1_at_5: relative_gain(bm.present_f1_at_5, tm.present_f1_at_5),
                present_f1_at_m: relative_gain(bm.present_f1_at_m, tm.present_f1_at_m),
                absent_f1_at_5: relative_gain(bm.absent_f1_at_5, tm.absent_f1_at_5),
                absent_f1_at_m: relative_gain(bm.absent_f1_at_m, tm.absent_f1_at_m),
            },
        });
    }
    Ok(BucketAnalysis {
        version: super::report::REPORT_VERSION,
        edges,
        buckets,
        notices,
    })
}
