//! GAN objectives on probabilities.
//!
//! Probabilities are clamped to `[1e-7, 1 - 1e-7]` before any logarithm.

use crate::error::{Error, Result};

pub const PROB_CLAMP: f64 = 1e-7;

fn clamp(p: f64) -> f64 {
    p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
}

fn mean(xs: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = xs.len();
    xs.sum::<f64>() / n as f64
}

/// `mean(-[(1 - s) ln d_real + ln(1 - d_fake)])`.
///
/// The two batches may differ in size; each term is averaged over its own.
pub fn discriminator_loss(d_real: &[f64], d_fake: &[f64], smoothing: f64) -> f64 {
    let real = mean(d_real.iter().map(|&p| -(1.0 - smoothing) * clamp(p).ln()));
    let fake = mean(d_fake.iter().map(|&p| -(1.0 - clamp(p)).ln()));
    real + fake
}

/// Non-saturating generator objective `mean(-ln d_fake)`.
pub fn generator_loss(d_fake: &[f64]) -> f64 {
    mean(d_fake.iter().map(|&p| -clamp(p).ln()))
}

/// `-ln p[true_type]`.
pub fn cross_entropy(class_probs: &[f64], true_type: usize) -> Result<f64> {
    let p = class_probs.get(true_type).ok_or_else(|| {
        Error::invalid(format!(
            "type index {true_type} out of range for {} classes",
            class_probs.len()
        ))
    })?;
    Ok(-clamp(*p).ln())
}

/// Multi-type objective: adversarial term plus the weighted auxiliary
/// classification cross-entropy. Used for both networks.
pub fn multi_type_loss(
    adversarial: f64,
    class_probs: &[f64],
    true_type: usize,
    lambda_cls: f64,
) -> Result<f64> {
    let ce = cross_entropy(class_probs, true_type)?;
    if lambda_cls == 0.0 {
        return Ok(adversarial);
    }
    Ok(adversarial + lambda_cls * ce)
}

/// Batch auxiliary term `lambda_cls * mean(-ln p_i[type_i])`; exactly zero
/// when `lambda_cls == 0`.
pub fn auxiliary_loss(class_probs: &[Vec<f64>], types: &[usize], lambda_cls: f64) -> Result<f64> {
    let mut total = 0.0;
    for (p, &t) in class_probs.iter().zip(types) {
        total += cross_entropy(p, t)?;
    }
    if lambda_cls == 0.0 {
        return Ok(0.0);
    }
    Ok(lambda_cls * total / class_probs.len() as f64)
}

/// Gradient of [`auxiliary_loss`] with respect to one sample's class
/// logits: `lambda_cls * (softmax - onehot) / batch`.
pub fn auxiliary_logit_grad(
    class_probs: &[f64],
    true_type: usize,
    lambda_cls: f64,
    batch: usize,
) -> Vec<f64> {
    let k = lambda_cls / batch as f64;
    class_probs
        .iter()
        .enumerate()
        .map(|(j, &p)| k * (p - if j == true_type { 1.0 } else { 0.0 }))
        .collect()
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}
