use alloc::vec;

use super::CandidateBatch;
use crate::policy::PolicyParams;

/// Weighted maximum-likelihood fit followed by the smoothing step
/// `(1 − α)·θᵢ + α·θ*`.
///
/// Returns the new parameters and whether the batch was degenerate (every
/// weight zero), in which case `theta_i` is returned unchanged.
pub fn forward_update(
    theta_i: &PolicyParams,
    batch: &CandidateBatch,
    alpha: f64,
    sigma_floor: f64,
) -> (PolicyParams, bool) {
    let total: f64 = batch.weights.iter().sum();
    if !(total > 0.0) || batch.is_empty() {
        return (theta_i.clone(), true);
    }
    let len = theta_i.len();
    let mut mean = vec![0.0; len];
    for (seq, w) in batch.sequences.iter().zip(&batch.weights) {
        if *w == 0.0 {
            continue;
        }
        for (m, u) in mean.iter_mut().zip(seq.raw()) {
            *m += w * u;
        }
    }
    for m in &mut mean {
        *m /= total;
    }
    let mut var = vec![0.0; len];
    for (seq, w) in batch.sequences.iter().zip(&batch.weights) {
        if *w == 0.0 {
            continue;
        }
        for ((v, u), m) in var.iter_mut().zip(seq.raw()).zip(&mean) {
            let d = u - m;
            *v += w * d * d;
        }
    }
    let mut next = theta_i.clone();
    {
        let (mu, sigma) = next.parts_mut();
        for k in 0..len {
            let fit_sigma = libm::sqrt(var[k] / total);
            mu[k] = (1.0 - alpha) * mu[k] + alpha * mean[k];
            sigma[k] = (1.0 - alpha) * sigma[k] + alpha * fit_sigma;
        }
    }
    next.floor_sigma(sigma_floor);
    (next, false)
}
