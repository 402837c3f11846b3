use std::collections::HashSet;

use serde::{Deserialize, Serialize};

/// Precision, recall and F1 for one document.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Scored {
    pub prf: Prf,
    pub matched: usize,
    /// Gold was empty: the scores are reported as zero but undefined.
    pub undefined: bool,
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

fn score(predictions: &[Vec<String>], gold: &[Vec<String>], denominator: usize) -> Scored {
    let gold_set: HashSet<&Vec<String>> = gold.iter().collect();
    let matched = predictions.iter().filter(|p| gold_set.contains(p)).count();
    if gold.is_empty() {
        return Scored {
            prf: Prf::default(),
            matched,
            undefined: true,
        };
    }
    if denominator == 0 {
        return Scored::default();
    }
    let precision = matched as f64 / denominator as f64;
    let recall = matched as f64 / gold.len() as f64;
    Scored {
        prf: Prf {
            precision,
            recall,
            f1: harmonic(precision, recall),
        },
        matched,
        undefined: false,
    }
}

/// F1 over every prediction. Inputs must already be normalized and deduplicated.
pub fn f1_at_m(predictions: &[Vec<String>], gold: &[Vec<String>]) -> Scored {
    score(predictions, gold, predictions.len())
}

/// F1 over exactly five predictions: the first five are kept, and shorter
/// lists count as if padded with wrong answers.
pub fn f1_at_k(predictions: &[Vec<String>], gold: &[Vec<String>], k: usize) -> Scored {
    let kept = &predictions[..predictions.len().min(k)];
    score(kept, gold, k)
}

pub fn f1_at_5(predictions: &[Vec<String>], gold: &[Vec<String>]) -> Scored {
    f1_at_k(predictions, gold, 5)
}
