//! Accelerated mirror descent on a dynamic mirror space, with a step size
//! that slows down when the cost samples look noisy.

use super::mirror::{md_gradient, minus_weights, mirror_step};
use super::{CandidateBatch, ClusterUpdates, Gradient, SolverState};
use crate::policy::PolicyParams;
use crate::weighting::partition_clusters;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseStrength {
    /// Noise strength sᵢ ∈ [0, 1].
    pub s: f64,
    /// Updated running maximum of the mean absolute deviation.
    pub sigma_max: f64,
    /// Population standard deviation of the costs.
    pub std: f64,
    /// Mean absolute deviation of the costs about their mean.
    pub mad: f64,
}

/// `s = (1 − σ_mad/σ_std) · σ_std/σ_max`, clamped to `[0, 1]`, where
/// `σ_max` is the running maximum of `σ_mad`.
///
/// Both deviations use the `1/N` normalisation, so a symmetric two-point
/// sample gives `σ_mad = σ_std` and `s = 0`.
pub fn noise_strength(costs: &[f64], sigma_max_running: f64) -> NoiseStrength {
    let n = costs.len();
    if n < 2 {
        return NoiseStrength {
            s: 0.0,
            sigma_max: sigma_max_running,
            std: 0.0,
            mad: 0.0,
        };
    }
    let inv = 1.0 / n as f64;
    let mean = costs.iter().sum::<f64>() * inv;
    let mut var = 0.0;
    let mut mad = 0.0;
    for j in costs {
        let d = j - mean;
        var += d * d;
        mad += d.abs();
    }
    let std = libm::sqrt(var * inv);
    let mad = mad * inv;
    let sigma_max = sigma_max_running.max(mad);
    let s = if std > 0.0 && sigma_max > 0.0 {
        ((1.0 - mad / std) * (std / sigma_max)).clamp(0.0, 1.0)
    } else {
        0.0
    };
    NoiseStrength { s, sigma_max, std, mad }
}

/// `a' = a + α / (1 + 5γs)`, `A' = A + a'`.
pub fn step_size_advance(a: f64, big_a: f64, s: f64, alpha: f64, gamma: f64) -> (f64, f64) {
    let next = a + alpha / (1.0 + 5.0 * gamma * s);
    (next, big_a + next)
}

/// One accelerated update of a single policy:
///
/// ```text
/// θ̃ᵢ   = ψ⁻¹(ψ(θ̃ᵢ₋₁) − aᵢ g)
/// θᵢ₊₁ = (Aᵢ/Aᵢ₊₁) θᵢ + (aᵢ₊₁/Aᵢ₊₁) θ̃ᵢ + (aᵢ/Aᵢ₊₁)(θ̃ᵢ − θ̃ᵢ₋₁)
/// ```
///
/// `ψ` is anchored at `anchor`, which is `θᵢ` in the solver. Returns
/// `(θᵢ₊₁, θ̃ᵢ)` without flooring.
#[allow(clippy::too_many_arguments)]
pub fn accel_side_step(
    theta: &PolicyParams,
    tilde_prev: &PolicyParams,
    anchor: &PolicyParams,
    g: &Gradient,
    a: f64,
    a_next: f64,
    big_a: f64,
    big_a_next: f64,
) -> (PolicyParams, PolicyParams) {
    let tilde = mirror_step(anchor, tilde_prev, g, a);
    let keep = big_a / big_a_next;
    let take = a_next / big_a_next;
    let momentum = a / big_a_next;
    let mut next = theta.clone();
    {
        let (mu, sigma) = next.parts_mut();
        for k in 0..mu.len() {
            mu[k] = keep * mu[k] + take * tilde.mu()[k] + momentum * (tilde.mu()[k] - tilde_prev.mu()[k]);
            sigma[k] =
                keep * sigma[k] + take * tilde.sigma()[k] + momentum * (tilde.sigma()[k] - tilde_prev.sigma()[k]);
        }
    }
    (next, tilde)
}

/// Accelerated update of both decomposed policies from one batch.
///
/// The step accumulators advance once, using the noise strength of the
/// batch costs. Sides with an empty cluster are left as they are.
pub fn accel_update(
    state: &mut SolverState,
    batch: &CandidateBatch,
    alpha: f64,
    gamma: f64,
    sigma_floor: f64,
) -> (ClusterUpdates, NoiseStrength) {
    let noise = noise_strength(&batch.costs, state.sigma_max);
    state.sigma_max = noise.sigma_max;
    let (a, big_a) = (state.a, state.big_a);
    let (a_next, big_a_next) = step_size_advance(a, big_a, noise.s, alpha, gamma);

    let (plus, minus) = partition_clusters(&batch.weights);
    let mut done = ClusterUpdates::default();

    if let Some(g) = md_gradient(&state.theta_plus, &batch.sequences, &batch.weights, &plus) {
        let (mut next, mut tilde) = accel_side_step(
            &state.theta_plus,
            &state.tilde_plus,
            &state.theta_plus,
            &g,
            a,
            a_next,
            big_a,
            big_a_next,
        );
        next.floor_sigma(sigma_floor);
        tilde.floor_sigma(sigma_floor);
        state.theta_plus = next;
        state.tilde_plus = tilde;
        done.plus = true;
    }
    if !minus.is_empty() {
        let w = minus_weights(&batch.weights);
        if let Some(g) = md_gradient(&state.theta_minus, &batch.sequences, &w, &minus) {
            let (mut next, mut tilde) = accel_side_step(
                &state.theta_minus,
                &state.tilde_minus,
                &state.theta_minus,
                &g,
                a,
                a_next,
                big_a,
                big_a_next,
            );
            next.floor_sigma(sigma_floor);
            tilde.floor_sigma(sigma_floor);
            state.theta_minus = next;
            state.tilde_minus = tilde;
            done.minus = true;
        }
    }
    state.a = a_next;
    state.big_a = big_a_next;
    (done, noise)
}
