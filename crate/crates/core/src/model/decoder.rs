use crate::error::{Error, Result};

/// Probability clamp used inside the logarithms of the loss.
pub const LOSS_EPSILON: f64 = 1e-12;

/// DistMult score `sum_i h_u[i] * r[i] * h_v[i]`.
pub fn score(h_u: &[f64], r: &[f64], h_v: &[f64]) -> Result<f64> {
    for len in [r.len(), h_v.len()] {
        if len != h_u.len() {
            return Err(Error::Dimension {
                expected: h_u.len(),
                actual: len,
            });
        }
    }
    Ok(h_u.iter().zip(r).zip(h_v).map(|((a, b), c)| a * b * c).sum())
}

/// Logistic sigmoid, evaluated without overflow for large `|x|`.
pub fn predict_prob(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Mean binary cross-entropy with probabilities clamped to
/// `[LOSS_EPSILON, 1 - LOSS_EPSILON]`.
pub fn bce_loss(probabilities: &[f64], labels: &[f64]) -> f64 {
    if probabilities.is_empty() {
        return 0.0;
    }
    let total: f64 = probabilities
        .iter()
        .zip(labels)
        .map(|(&p, &y)| {
            let p = p.clamp(LOSS_EPSILON, 1.0 - LOSS_EPSILON);
            -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
        })
        .sum();
    total / probabilities.len() as f64
}

/// [`bce_loss`] evaluated from raw scores. The log-probabilities come from a
/// stable softplus, so no precision is lost when a probability is close to 1.
pub fn bce_loss_from_scores(scores: &[f64], labels: &[f64]) -> f64 {
    if scores.is_empty() {
        return 0.0;
    }
    let (lo, hi) = (LOSS_EPSILON.ln(), (-LOSS_EPSILON).ln_1p());
    let total: f64 = scores
        .iter()
        .zip(labels)
        .map(|(&s, &y)| {
            let log_p = (-softplus(-s)).clamp(lo, hi);
            let log_q = (-softplus(s)).clamp(lo, hi);
            -(y * log_p + (1.0 - y) * log_q)
        })
        .sum();
    total / scores.len() as f64
}

/// `ln(1 + e^x)` without overflow or cancellation.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Derivative of [`bce_loss`] with respect to each raw score. Zero where
/// the probability is clamped.
pub fn loss_gradient(probabilities: &[f64], labels: &[f64]) -> Vec<f64> {
    let n = probabilities.len().max(1) as f64;
    probabilities
        .iter()
        .zip(labels)
        .map(|(&p, &y)| {
            if p > LOSS_EPSILON && p < 1.0 - LOSS_EPSILON {
                (p - y) / n
            } else {
                0.0
            }
        })
        .collect()
}
