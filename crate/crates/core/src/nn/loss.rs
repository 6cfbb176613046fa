//! Loss functions with fused gradients.

use crate::error::{Error, Result};
use crate::nn::batch::Batch2;

/// Numerically stable fused softmax + cross-entropy for one sample.
/// Returns the loss and the gradient w.r.t. the logits,
/// `softmax(logits) − one_hot(target)`.
pub fn softmax_xent(logits: &[f64], target: usize) -> Result<(f64, Vec<f64>)> {
    let k = logits.len();
    if k < 2 {
        return Err(Error::ShapeError(format!("need at least 2 classes, got {k}")));
    }
    if target >= k {
        return Err(Error::InvalidLabel(format!("target class {target} out of range 0..{k}")));
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    let mut grad: Vec<f64> = logits
        .iter()
        .map(|&z| {
            let e = (z - max).exp();
            sum += e;
            e
        })
        .collect();
    let log_sum = sum.ln();
    let loss = log_sum - (logits[target] - max);
    for g in &mut grad {
        *g /= sum;
    }
    grad[target] -= 1.0;
    Ok((loss, grad))
}

/// Softmax probabilities for one sample (inference path).
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    for v in &mut out {
        *v /= sum;
    }
    out
}

/// Mean over the batch of per-sample cross-entropy; gradients carry the
/// 1/batch factor.
pub fn softmax_xent_batch(logits: &Batch2, targets: &[usize]) -> Result<(f64, Batch2)> {
    if targets.len() != logits.n {
        return Err(Error::InvalidData(format!(
            "targets ({}) do not match batch ({})",
            targets.len(),
            logits.n
        )));
    }
    let mut grad = Batch2::zeros(logits.n, logits.f);
    let mut total = 0.0;
    let inv_n = 1.0 / logits.n as f64;
    for s in 0..logits.n {
        let (loss, g) = softmax_xent(logits.row(s), targets[s])?;
        total += loss;
        for (dst, src) in grad.row_mut(s).iter_mut().zip(&g) {
            *dst = src * inv_n;
        }
    }
    Ok((total * inv_n, grad))
}

/// Per-sample MSE: mean over the outputs of the squared error;
/// gradient is `2(pred − target)/k`.
pub fn mse(pred: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>)> {
    if pred.len() != target.len() || pred.is_empty() {
        return Err(Error::ShapeError(format!(
            "mse shapes differ: {} vs {}",
            pred.len(),
            target.len()
        )));
    }
    let k = pred.len() as f64;
    let mut loss = 0.0;
    let grad = pred
        .iter()
        .zip(target)
        .map(|(&p, &t)| {
            let d = p - t;
            loss += d * d;
            2.0 * d / k
        })
        .collect();
    Ok((loss / k, grad))
}

/// Mean over the batch of per-sample MSE.
pub fn mse_batch(pred: &Batch2, target: &Batch2) -> Result<(f64, Batch2)> {
    if pred.n != target.n || pred.f != target.f {
        return Err(Error::ShapeError(format!(
            "mse batch shapes differ: {}x{} vs {}x{}",
            pred.n, pred.f, target.n, target.f
        )));
    }
    let mut grad = Batch2::zeros(pred.n, pred.f);
    let mut total = 0.0;
    let inv_n = 1.0 / pred.n as f64;
    for s in 0..pred.n {
        let (loss, g) = mse(pred.row(s), target.row(s))?;
        total += loss;
        for (dst, src) in grad.row_mut(s).iter_mut().zip(&g) {
            *dst = src * inv_n;
        }
    }
    Ok((total * inv_n, grad))
}
