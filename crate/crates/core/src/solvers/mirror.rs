//! Mirror-descent updates in the mirror space of the Gaussian KL divergence
//! anchored at the current parameters.

use alloc::vec::Vec;

use super::{CandidateBatch, Gradient, SolverState};
use crate::policy::{inverse_scale, ActionSequence, PolicyParams};
use crate::weighting::partition_clusters;

/// `g = (1/|C|) Σ_{n∈C} (−wₙ) ∇_θ ln π(Uⁿ; θ)` with
/// `∇_μ ln π = (U − μ)/σ²` and `∇_σ ln π = ((U − μ)² − σ²)/σ³`.
///
/// Returns `None` when `cluster` is empty.
pub fn md_gradient(
    theta: &PolicyParams,
    sequences: &[ActionSequence],
    weights: &[f64],
    cluster: &[usize],
) -> Option<Gradient> {
    if cluster.is_empty() {
        return None;
    }
    let mut g = Gradient::zeros(theta.len());
    let (mu, sigma) = (theta.mu(), theta.sigma());
    for &n in cluster {
        let w = weights[n];
        if w == 0.0 {
            continue;
        }
        for (k, u) in sequences[n].raw().iter().enumerate() {
            let d = u - mu[k];
            let s2 = sigma[k] * sigma[k];
            g.mu[k] -= w * d / s2;
            g.sigma[k] -= w * (d * d - s2) / (s2 * sigma[k]);
        }
    }
    let inv = 1.0 / cluster.len() as f64;
    for v in g.mu.iter_mut().chain(g.sigma.iter_mut()) {
        *v *= inv;
    }
    Some(g)
}

/// `ψ⁻¹(ψ(start) − step·g)` with both maps anchored at `anchor`. The
/// result is not floored.
pub fn mirror_step(anchor: &PolicyParams, start: &PolicyParams, g: &Gradient, step: f64) -> PolicyParams {
    let len = anchor.len();
    let mut mu = Vec::with_capacity(len);
    let mut sigma = Vec::with_capacity(len);
    for k in 0..len {
        let sr = anchor.sigma()[k];
        let var_ref = sr * sr;
        let s = start.sigma()[k];
        let z_mu = start.mu()[k] / var_ref - step * g.mu[k];
        let z_sigma = s / var_ref - 1.0 / s - step * g.sigma[k];
        mu.push(var_ref * z_mu);
        sigma.push(inverse_scale(sr, z_sigma));
    }
    PolicyParams::from_parts_unchecked(anchor.action_dim(), anchor.horizon(), mu, sigma)
}

/// One mirror-descent step over all candidates with signed log-weights.
/// `None` when the batch is empty.
pub fn reverse_update(
    theta_i: &PolicyParams,
    batch: &CandidateBatch,
    alpha: f64,
    sigma_floor: f64,
) -> Option<PolicyParams> {
    let all: Vec<usize> = (0..batch.len()).collect();
    let g = md_gradient(theta_i, &batch.sequences, &batch.weights, &all)?;
    let mut next = mirror_step(theta_i, theta_i, &g, alpha);
    next.floor_sigma(sigma_floor);
    Some(next)
}

/// Which sides of a decomposed update had a non-empty cluster.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClusterUpdates {
    pub plus: bool,
    pub minus: bool,
}

pub(crate) fn minus_weights(ln_h: &[f64]) -> Vec<f64> {
    ln_h.iter().map(|w| w.abs()).collect()
}

/// Separate mirror-descent steps for the good policy over `C⁺` (weights
/// `ln H`) and the bad policy over `C⁻` (weights `|ln H|`), each in its own
/// mirror space. Empty clusters leave their side unchanged.
pub fn reject_update(state: &mut SolverState, batch: &CandidateBatch, alpha: f64, sigma_floor: f64) -> ClusterUpdates {
    let (plus, minus) = partition_clusters(&batch.weights);
    let mut done = ClusterUpdates::default();
    if let Some(g) = md_gradient(&state.theta_plus, &batch.sequences, &batch.weights, &plus) {
        let mut next = mirror_step(&state.theta_plus, &state.theta_plus, &g, alpha);
        next.floor_sigma(sigma_floor);
        state.theta_plus = next;
        done.plus = true;
    }
    if !minus.is_empty() {
        let w = minus_weights(&batch.weights);
        if let Some(g) = md_gradient(&state.theta_minus, &batch.sequences, &w, &minus) {
            let mut next = mirror_step(&state.theta_minus, &state.theta_minus, &g, alpha);
            next.floor_sigma(sigma_floor);
            state.theta_minus = next;
            done.minus = true;
        }
    }
    done
}
