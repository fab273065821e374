//! The four training losses.
//!
//! These are the pure value-level definitions; the per-step gradient
//! computations live in [`super::steps`] and are checked against these by
//! finite differences.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Reconstruction loss: mean over the batch of the squared L2 distance
/// between input and reconstruction.
pub fn loss_ae(batch_in: &Array2<f64>, batch_out: &Array2<f64>) -> Result<f64> {
    if batch_in.dim() != batch_out.dim() {
        return Err(Error::ShapeMismatch(format!(
            "{:?} vs {:?}",
            batch_in.dim(),
            batch_out.dim()
        )));
    }
    if batch_in.nrows() == 0 {
        return Err(Error::EmptyBatch);
    }
    let n = batch_in.nrows() as f64;
    Ok((batch_in - batch_out).mapv(|v| v * v).sum() / n)
}

/// Critic loss: E[D(fake)] - E[D(real)] + lambda * E[(|grad| - 1)^2].
pub fn loss_d(d_real: &[f64], d_fake: &[f64], grad_norms: &[f64], lambda: f64) -> Result<f64> {
    if d_real.is_empty() || d_fake.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if grad_norms.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("gradient norm".into()));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let penalty = if grad_norms.is_empty() {
        0.0
    } else {
        grad_norms.iter().map(|g| (g - 1.0) * (g - 1.0)).sum::<f64>() / grad_norms.len() as f64
    };
    Ok(mean(d_fake) - mean(d_real) + lambda * penalty)
}

/// Generator loss: -E[D(fake)] plus, when the classifier is enabled, the
/// cross entropy between its prediction and the synthetic rows' own decoded
/// target values.
pub fn loss_g(d_fake: &[f64], class_logits_targets: Option<(&Array2<f64>, &[usize])>) -> Result<f64> {
    if d_fake.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let adv = -d_fake.iter().sum::<f64>() / d_fake.len() as f64;
    let ce = match class_logits_targets {
        Some((logits, targets)) => cross_entropy_mean(logits, targets)?,
        None => 0.0,
    };
    Ok(adv + ce)
}

/// Classifier loss: cross entropy on reconstructed real rows plus cross
/// entropy on reconstructed synthetic rows.
pub fn loss_c(
    real_logits: &Array2<f64>,
    real_targets: &[usize],
    synth_logits: &Array2<f64>,
    synth_targets: &[usize],
) -> Result<f64> {
    Ok(cross_entropy_mean(real_logits, real_targets)?
        + cross_entropy_mean(synth_logits, synth_targets)?)
}

/// Row-wise softmax cross entropy, averaged over the batch.
pub fn cross_entropy_mean(logits: &Array2<f64>, targets: &[usize]) -> Result<f64> {
    if logits.nrows() == 0 {
        return Err(Error::EmptyBatch);
    }
    if logits.nrows() != targets.len() {
        return Err(Error::LengthMismatch {
            left: logits.nrows(),
            right: targets.len(),
        });
    }
    let mut total = 0.0;
    for (row, &t) in logits.rows().into_iter().zip(targets) {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let logsum = row.iter().map(|v| (v - max).exp()).sum::<f64>().ln() + max;
        total += logsum - row[t];
    }
    Ok(total / logits.nrows() as f64)
}

/// Gradient of [`cross_entropy_mean`] with respect to the logits:
/// (softmax - onehot) / batch.
pub fn cross_entropy_grad(logits: &Array2<f64>, targets: &[usize]) -> Array2<f64> {
    let n = logits.nrows() as f64;
    let mut grad = Array2::zeros(logits.dim());
    for (i, (row, &t)) in logits.rows().into_iter().zip(targets).enumerate() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = row.iter().map(|v| (v - max).exp()).collect();
        let sum: f64 = exps.iter().sum();
        for (j, e) in exps.iter().enumerate() {
            grad[(i, j)] = (e / sum - if j == t { 1.0 } else { 0.0 }) / n;
        }
    }
    grad
}
