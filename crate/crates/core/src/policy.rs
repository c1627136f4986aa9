//! Diagonal-Gaussian action-sequence policy.
//!
//! Parameters are stored time-major: entry `(t, a)` of an
//! `action_dim × horizon` grid lives at index `t * action_dim + a`, so the
//! first control action is the leading `action_dim` slice.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand_core::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{CoreError, Result};
use crate::rng::{Lane, StreamKey};

/// Smallest scale any solver update may produce unless configured otherwise.
pub const DEFAULT_SIGMA_FLOOR: f64 = 1e-6;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Above this magnitude of `sigma_ref * z_sigma` the inverse scale map
/// avoids squaring its argument.
const OVERFLOW_GUARD: f64 = 1e6;

/// Location/scale parameters of a diagonal Gaussian over an
/// `action_dim × horizon` grid of pre-squash actions.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    action_dim: usize,
    horizon: usize,
    mu: Vec<f64>,
    sigma: Vec<f64>,
}

impl PolicyParams {
    pub fn new(action_dim: usize, horizon: usize, mu: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        if action_dim == 0 || horizon == 0 {
            return Err(CoreError::InvalidConfig("action_dim and horizon must be at least 1"));
        }
        let len = action_dim * horizon;
        for v in [&mu, &sigma] {
            if v.len() != len {
                return Err(CoreError::ShapeMismatch {
                    expected: len,
                    found: v.len(),
                });
            }
        }
        if mu.iter().any(|m| !m.is_finite()) {
            return Err(CoreError::NonFinite("mu"));
        }
        if sigma.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(CoreError::InvalidSigma);
        }
        Ok(Self {
            action_dim,
            horizon,
            mu,
            sigma,
        })
    }

    /// The standard-normal prior `(0, I)`.
    pub fn standard(action_dim: usize, horizon: usize) -> Self {
        Self::uniform(action_dim, horizon, 0.0, 1.0)
    }

    /// Every entry has the same location and scale.
    ///
    /// # Panics
    /// If either dimension is zero or `sigma` is not positive and finite.
    pub fn uniform(action_dim: usize, horizon: usize, mu: f64, sigma: f64) -> Self {
        let len = action_dim * horizon;
        Self::new(action_dim, horizon, alloc::vec![mu; len], alloc::vec![sigma; len])
            .expect("uniform policy parameters must be valid")
    }

    pub(crate) fn from_parts_unchecked(action_dim: usize, horizon: usize, mu: Vec<f64>, sigma: Vec<f64>) -> Self {
        debug_assert_eq!(mu.len(), action_dim * horizon);
        debug_assert_eq!(sigma.len(), action_dim * horizon);
        Self {
            action_dim,
            horizon,
            mu,
            sigma,
        }
    }

    pub fn action_dim(&self) -> usize {
        self.action_dim
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Number of Gaussian components, `action_dim * horizon`.
    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// Location of the first control action.
    pub fn first_mu(&self) -> &[f64] {
        &self.mu[..self.action_dim]
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.action_dim == other.action_dim && self.horizon == other.horizon
    }

    pub(crate) fn check_shape(&self, other: &Self) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(CoreError::ShapeMismatch {
                expected: self.len(),
                found: other.len(),
            })
        }
    }

    /// Clamp every scale to at least `floor`; non-finite scales are reset to
    /// `floor` as well.
    pub fn floor_sigma(&mut self, floor: f64) {
        for s in &mut self.sigma {
            if !(s.is_finite() && *s >= floor) {
                *s = floor;
            }
        }
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.mu, &mut self.sigma)
    }

    /// Draw a single action sequence `mu + sigma ⊙ ε`.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> ActionSequence {
        let raw = self
            .mu
            .iter()
            .zip(&self.sigma)
            .map(|(m, s)| {
                let eps: f64 = StandardNormal.sample(rng);
                m + s * eps
            })
            .collect();
        ActionSequence {
            action_dim: self.action_dim,
            raw,
        }
    }
}

/// A pre-squash action sequence, time-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionSequence {
    action_dim: usize,
    raw: Vec<f64>,
}

impl ActionSequence {
    pub fn new(action_dim: usize, raw: Vec<f64>) -> Result<Self> {
        if action_dim == 0 || raw.is_empty() || !raw.len().is_multiple_of(action_dim) {
            return Err(CoreError::ShapeMismatch {
                expected: action_dim.max(1),
                found: raw.len(),
            });
        }
        Ok(Self { action_dim, raw })
    }

    pub fn action_dim(&self) -> usize {
        self.action_dim
    }

    pub fn horizon(&self) -> usize {
        self.raw.len() / self.action_dim
    }

    pub fn raw(&self) -> &[f64] {
        &self.raw
    }

    /// Pre-squash action at time `t`.
    pub fn column(&self, t: usize) -> &[f64] {
        &self.raw[t * self.action_dim..(t + 1) * self.action_dim]
    }
}

/// Draw `count` independent sequences. Candidate `n` always uses the stream
/// `key.stream(n, Lane::Sample)`, whatever the evaluation order.
pub fn sample_batch(params: &PolicyParams, count: usize, key: &StreamKey) -> Vec<ActionSequence> {
    (0..count)
        .map(|n| params.sample(&mut key.stream(n as u64, Lane::Sample)))
        .collect()
}

/// Per-dimension action box `[low, high]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionBounds {
    low: Vec<f64>,
    high: Vec<f64>,
}

impl ActionBounds {
    pub fn new(low: Vec<f64>, high: Vec<f64>) -> Result<Self> {
        if low.is_empty() || low.len() != high.len() {
            return Err(CoreError::ShapeMismatch {
                expected: low.len().max(1),
                found: high.len(),
            });
        }
        if low
            .iter()
            .zip(&high)
            .any(|(l, h)| !(l.is_finite() && h.is_finite() && l < h))
        {
            return Err(CoreError::InvalidBounds);
        }
        Ok(Self { low, high })
    }

    /// The same interval on every dimension.
    pub fn symmetric(dim: usize, limit: f64) -> Result<Self> {
        Self::new(alloc::vec![-limit; dim], alloc::vec![limit; dim])
    }

    pub fn dim(&self) -> usize {
        self.low.len()
    }

    pub fn low(&self) -> &[f64] {
        &self.low
    }

    pub fn high(&self) -> &[f64] {
        &self.high
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        u.len() == self.dim()
            && u.iter()
                .enumerate()
                .all(|(a, v)| *v >= self.low[a] && *v <= self.high[a])
    }

    /// Squash a time-major pre-squash grid into the box, one action at a time.
    pub fn squash(&self, raw: &[f64]) -> Result<Vec<f64>> {
        if !raw.len().is_multiple_of(self.dim()) {
            return Err(CoreError::ShapeMismatch {
                expected: self.dim(),
                found: raw.len(),
            });
        }
        raw.iter()
            .enumerate()
            .map(|(k, &u)| {
                let a = k % self.dim();
                squash(u, self.low[a], self.high[a])
            })
            .collect()
    }

    /// Squash one action without validation; used on hot rollout paths where
    /// the sequence was produced by a policy and is finite by construction.
    pub(crate) fn squash_into(&self, raw: &[f64], out: &mut [f64]) {
        for (a, (u, o)) in raw.iter().zip(out.iter_mut()).enumerate() {
            *o = squash_unchecked(*u, self.low[a], self.high[a]);
        }
    }

    /// Inverse of [`squash`] on dimension `a`; values on the boundary map to
    /// `±inf`.
    pub fn unsquash(&self, a: usize, u: f64) -> f64 {
        let mid = 0.5 * (self.low[a] + self.high[a]);
        let half = 0.5 * (self.high[a] - self.low[a]);
        libm::atanh((u - mid) / half)
    }
}

/// Map a pre-squash value onto `[low, high]` with
/// `mid + half_width * tanh(u)`.
pub fn squash(u: f64, low: f64, high: f64) -> Result<f64> {
    if !u.is_finite() {
        return Err(CoreError::NonFinite("pre-squash action"));
    }
    if !(low < high) {
        return Err(CoreError::InvalidBounds);
    }
    Ok(squash_unchecked(u, low, high))
}

#[inline]
fn squash_unchecked(u: f64, low: f64, high: f64) -> f64 {
    let mid = 0.5 * (low + high);
    let half = 0.5 * (high - low);
    (mid + half * libm::tanh(u)).clamp(low, high)
}

/// Joint log-density of a sequence, summed per entry in pre-squash space.
pub fn log_density(params: &PolicyParams, seq: &ActionSequence) -> Result<f64> {
    if seq.raw.len() != params.len() {
        return Err(CoreError::ShapeMismatch {
            expected: params.len(),
            found: seq.raw.len(),
        });
    }
    Ok(log_density_raw(params, &seq.raw))
}

pub(crate) fn log_density_raw(params: &PolicyParams, raw: &[f64]) -> f64 {
    raw.iter()
        .zip(params.mu.iter().zip(&params.sigma))
        .map(|(u, (m, s))| {
            let z = (u - m) / s;
            -LN_SQRT_2PI - libm::log(*s) - 0.5 * z * z
        })
        .sum()
}

/// Closed-form `KL(π(·; theta) ‖ π(·; theta_ref))` for diagonal Gaussians.
pub fn kl_divergence(theta: &PolicyParams, theta_ref: &PolicyParams) -> Result<f64> {
    theta.check_shape(theta_ref)?;
    let total: f64 = theta
        .mu
        .iter()
        .zip(&theta.sigma)
        .zip(theta_ref.mu.iter().zip(&theta_ref.sigma))
        .map(|((m, s), (mr, sr))| {
            let var = s * s;
            let var_ref = sr * sr;
            let d = mr - m;
            libm::log(var_ref / var) + var / var_ref + d * d / var_ref - 1.0
        })
        .sum();
    Ok((0.5 * total).max(0.0))
}

/// A point in the mirror space anchored at `reference`.
#[derive(Debug, Clone, PartialEq)]
pub struct MirrorPoint {
    pub z_mu: Vec<f64>,
    pub z_sigma: Vec<f64>,
    pub reference: PolicyParams,
}

/// Gradient of `KL(π(·; theta) ‖ π(·; theta_ref))` with respect to `theta`,
/// up to an additive constant on the location part:
/// `z_mu = mu / sigma_ref²`, `z_sigma = sigma / sigma_ref² - 1 / sigma`.
pub fn mirror_map(theta: &PolicyParams, theta_ref: &PolicyParams) -> Result<MirrorPoint> {
    theta.check_shape(theta_ref)?;
    let mut z_mu = Vec::with_capacity(theta.len());
    let mut z_sigma = Vec::with_capacity(theta.len());
    for k in 0..theta.len() {
        let var_ref = theta_ref.sigma[k] * theta_ref.sigma[k];
        z_mu.push(theta.mu[k] / var_ref);
        z_sigma.push(theta.sigma[k] / var_ref - 1.0 / theta.sigma[k]);
    }
    Ok(MirrorPoint {
        z_mu,
        z_sigma,
        reference: theta_ref.clone(),
    })
}

/// Inverse of [`mirror_map`]. The returned scales are strictly positive for
/// any finite input that does not underflow.
pub fn mirror_inverse(z: &MirrorPoint) -> Result<PolicyParams> {
    let reference = &z.reference;
    let n = reference.len();
    for v in [&z.z_mu, &z.z_sigma] {
        if v.len() != n {
            return Err(CoreError::ShapeMismatch {
                expected: n,
                found: v.len(),
            });
        }
    }
    if z.z_mu.iter().chain(&z.z_sigma).any(|v| !v.is_finite()) {
        return Err(CoreError::NonFinite("mirror point"));
    }
    let mut mu = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    for k in 0..n {
        let sr = reference.sigma[k];
        mu.push(sr * sr * z.z_mu[k]);
        sigma.push(inverse_scale(sr, z.z_sigma[k]));
    }
    Ok(PolicyParams::from_parts_unchecked(
        reference.action_dim,
        reference.horizon,
        mu,
        sigma,
    ))
}

/// `½(σr² z + σr √(σr² z² + 4))`, evaluated without overflow for large
/// `|σr z|` and without cancellation for negative `z`.
#[inline]
pub(crate) fn inverse_scale(sigma_ref: f64, z: f64) -> f64 {
    let t = sigma_ref * z;
    let root = if t.abs() > OVERFLOW_GUARD {
        t.abs() * libm::sqrt(1.0 + 4.0 / (t * t))
    } else {
        libm::sqrt(t * t + 4.0)
    };
    if z >= 0.0 {
        0.5 * sigma_ref * (t + root)
    } else {
        // conjugate form: (root + t) = 4 / (root - t)
        2.0 * sigma_ref / (root - t)
    }
}

/// `-½ ln(2π)`, the standard-normal log-density at its mode.
pub fn standard_normal_log_mode() -> f64 {
    -0.5 * libm::log(2.0 * PI)
}
