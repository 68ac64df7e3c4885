use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Triplet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredExample {
    pub triplet: Triplet,
    pub score: f64,
    pub label: bool,
}

/// Exact ROC AUC of scored examples (ties count one half).
pub fn auc(examples: &[ScoredExample]) -> Result<f64> {
    let scores: Vec<f64> = examples.iter().map(|e| e.score).collect();
    let labels: Vec<bool> = examples.iter().map(|e| e.label).collect();
    auc_from_scores(&scores, &labels)
}

/// Fraction of (positive, negative) pairs ranked correctly, with ties
/// counted as one half. `O(n log n)` via a sort and tie groups.
pub fn auc_from_scores(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension {
            expected: scores.len(),
            actual: labels.len(),
        });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Numerical("AUC input contains a non-finite score".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let n_pos = labels.iter().filter(|&&y| y).count() as u64;
    let n_neg = labels.len() as u64 - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }

    // Counted in halves so the numerator stays an exact integer.
    let mut twice_correct: u64 = 0;
    let mut neg_below: u64 = 0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let (mut pos, mut neg) = (0u64, 0u64);
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] {
                pos += 1;
            } else {
                neg += 1;
            }
            i += 1;
        }
        twice_correct += pos * (2 * neg_below + neg);
        neg_below += neg;
    }
    Ok(twice_correct as f64 / (2 * n_pos * n_neg) as f64)
}
