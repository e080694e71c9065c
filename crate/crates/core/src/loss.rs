//! Weighted soft cross-entropy with inverse-frequency class weights.
//!
//! `L = -(1 / sum_i w_i) * sum_i w_i * y_i * ln(p_i)` for a predicted
//! distribution `p` and a soft target `y`. All arithmetic is `f64`.

use crate::error::{Error, Result};
use crate::mixer::SoftLabel;

/// Predicted probabilities are clamped to `[PROB_EPS, 1]` before the logarithm.
pub const PROB_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ClassWeights {
    w: Vec<f64>,
}

impl ClassWeights {
    pub const CONVENTION: &'static str = "N/(C·n_i)";

    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidParameter("class weights are empty".into()));
        }
        if let Some(x) = w.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::InvalidParameter(format!("class weight {x} is not positive and finite")));
        }
        Ok(Self { w })
    }

    pub fn uniform(num_classes: usize) -> Self {
        Self { w: vec![1.0; num_classes] }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.w.iter().map(|x| x * c).collect())
    }
}

/// `w_i = N / (C * n_i)` where `N` is the total sample count.
pub fn inverse_frequency_weights(counts: &[u64]) -> Result<ClassWeights> {
    if counts.is_empty() {
        return Err(Error::InvalidParameter("no class counts".into()));
    }
    if let Some(i) = counts.iter().position(|&n| n == 0) {
        return Err(Error::ZeroCount(i));
    }
    let total: u64 = counts.iter().sum();
    let c = counts.len() as f64;
    ClassWeights::new(counts.iter().map(|&n| total as f64 / (c * n as f64)).collect())
}

fn check_lengths(n: usize, y: &SoftLabel, w: &ClassWeights) -> Result<()> {
    if y.num_classes() != n {
        return Err(Error::ClassCountMismatch(n, y.num_classes()));
    }
    if w.len() != n {
        return Err(Error::ClassCountMismatch(n, w.len()));
    }
    Ok(())
}

pub fn soft_cross_entropy(y_hat: &[f64], y: &SoftLabel, w: &ClassWeights) -> Result<f64> {
    check_lengths(y_hat.len(), y, w)?;
    if let Some(p) = y_hat.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidParameter(format!("predicted probability {p} outside [0, 1]")));
    }
    let w = w.as_slice();
    let norm: f64 = w.iter().sum();
    let acc: f64 = y_hat
        .iter()
        .zip(y.probs())
        .zip(w)
        .map(|((&p, &t), &wi)| wi * t * -p.clamp(PROB_EPS, 1.0).ln())
        .sum();
    Ok(acc / norm)
}

/// Max-subtracted softmax.
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = z.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / sum).collect()
}

/// Gradient of `soft_cross_entropy(softmax(z), y, w)` with respect to the logits:
/// `(p_k * sum_i w_i y_i - w_k y_k) / sum_i w_i`.
pub fn soft_ce_grad_logits(z: &[f64], y: &SoftLabel, w: &ClassWeights) -> Result<Vec<f64>> {
    check_lengths(z.len(), y, w)?;
    let p = softmax(z);
    let w = w.as_slice();
    let norm: f64 = w.iter().sum();
    let wy: Vec<f64> = w.iter().zip(y.probs()).map(|(a, b)| a * b).collect();
    let total: f64 = wy.iter().sum();
    Ok(p.iter().zip(&wy).map(|(&pk, &wyk)| (pk * total - wyk) / norm).collect())
}
