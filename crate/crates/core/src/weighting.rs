//! Cost-to-weight maps.
//!
//! Forward solvers use nonnegative optimality weights `H` (CEM elite
//! indicators or MPPI exponentials) normalised to sum to `N`. Reverse,
//! reject and accelerated solvers use signed log-weights
//! `ln H = w₁(J) − w_β(−J)`, whose sum is `(1 − β)·N`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightBackend {
    /// Elite indicator at the λ-quantile of the costs.
    Cem,
    /// `exp(−J / T)`.
    Mppi,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightConfig {
    pub backend: WeightBackend,
    /// Elite fraction λ ∈ (0, 1).
    pub lambda: f64,
    /// MPPI temperature T > 0.
    pub temperature: f64,
    /// Negative ratio β ∈ [0, 1].
    pub beta: f64,
}

impl WeightConfig {
    pub fn new(backend: WeightBackend, lambda: f64, temperature: f64, beta: f64) -> Result<Self> {
        let cfg = Self {
            backend,
            lambda,
            temperature,
            beta,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn cem(lambda: f64, beta: f64) -> Result<Self> {
        Self::new(WeightBackend::Cem, lambda, 1.0, beta)
    }

    pub fn mppi(temperature: f64, beta: f64) -> Result<Self> {
        Self::new(WeightBackend::Mppi, 0.01, temperature, beta)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(CoreError::InvalidConfig("lambda must lie in (0, 1)"));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(CoreError::InvalidConfig("temperature must be positive"));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(CoreError::InvalidConfig("beta must lie in [0, 1]"));
        }
        Ok(())
    }
}

impl Default for WeightConfig {
    fn default() -> Self {
        Self {
            backend: WeightBackend::Mppi,
            lambda: 0.01,
            temperature: 1.0,
            beta: 1.0,
        }
    }
}

/// Signed log-weights `ln H`, one per candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedWeightVector(Vec<f64>);

impl SignedWeightVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn check_costs(costs: &[f64]) -> Result<()> {
    if costs.is_empty() {
        return Err(CoreError::EmptyCandidates);
    }
    if costs.iter().any(|j| !j.is_finite()) {
        return Err(CoreError::NonFinite("costs"));
    }
    Ok(())
}

/// Candidate indices ordered by ascending cost; ties go to the lower index.
fn rank_ascending(costs: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..costs.len()).collect();
    idx.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]).then(a.cmp(&b)));
    idx
}

/// Backend weights for `costs`, normalised to sum to `total`. `fraction` is
/// the elite fraction used by CEM.
fn backend_weights(costs: &[f64], cfg: &WeightConfig, fraction: f64, total: f64) -> Result<Vec<f64>> {
    let n = costs.len();
    match cfg.backend {
        WeightBackend::Cem => {
            let k = libm::ceil(fraction * n as f64) as usize;
            if k == 0 {
                return Err(CoreError::QuantileSelectsNone);
            }
            let k = k.min(n);
            let mut w = vec![0.0; n];
            let share = total / k as f64;
            for &i in rank_ascending(costs).iter().take(k) {
                w[i] = share;
            }
            Ok(w)
        }
        WeightBackend::Mppi => {
            let min = costs.iter().copied().fold(f64::INFINITY, f64::min);
            let mut w: Vec<f64> = costs.iter().map(|j| libm::exp(-(j - min) / cfg.temperature)).collect();
            // the minimum contributes exp(0) = 1, so the sum is at least 1
            let sum: f64 = w.iter().sum();
            let scale = total / sum;
            for v in &mut w {
                *v *= scale;
            }
            Ok(w)
        }
    }
}

/// Nonnegative optimality weights `H`, summing to `N`.
pub fn forward_weights(costs: &[f64], cfg: &WeightConfig) -> Result<Vec<f64>> {
    check_costs(costs)?;
    cfg.validate()?;
    backend_weights(costs, cfg, cfg.lambda, costs.len() as f64)
}

/// Signed log-weights `ln Hⁿ = w₁(Jⁿ) − w_β(−Jⁿ)`.
///
/// `w₁` is [`forward_weights`]. `w_β` applies the backend to the negated
/// costs with total mass `β·N`; for CEM it keeps the `⌈βλN⌉` worst
/// candidates. With `β = 0` the negative side vanishes.
pub fn signed_log_weights(costs: &[f64], cfg: &WeightConfig) -> Result<SignedWeightVector> {
    let mut ln_h = forward_weights(costs, cfg)?;
    if cfg.beta > 0.0 {
        let n = costs.len() as f64;
        let negated: Vec<f64> = costs.iter().map(|j| -j).collect();
        let penalty = backend_weights(&negated, cfg, cfg.beta * cfg.lambda, cfg.beta * n)?;
        for (w, p) in ln_h.iter_mut().zip(penalty) {
            *w -= p;
        }
    }
    Ok(SignedWeightVector(ln_h))
}

/// Indices with positive and negative log-weight. Zeros join neither.
pub fn partition_clusters(ln_h: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for (n, &w) in ln_h.iter().enumerate() {
        if w > 0.0 {
            plus.push(n);
        } else if w < 0.0 {
            minus.push(n);
        }
    }
    (plus, minus)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn config_validation() {
        assert!(WeightConfig::cem(0.0, 1.0).is_err());
        assert!(WeightConfig::cem(1.0, 1.0).is_err());
        assert!(WeightConfig::mppi(0.0, 1.0).is_err());
        assert!(WeightConfig::mppi(1.0, 1.5).is_err());
        assert!(WeightConfig::mppi(1.0, -0.1).is_err());
        assert!(WeightConfig::default().validate().is_ok());
    }

    #[test]
    fn mppi_equal_costs_give_unit_weights() {
        let w = forward_weights(&[3.0; 7], &WeightConfig::mppi(1.0, 1.0).unwrap()).unwrap();
        for v in w {
            assert!(close(v, 1.0, 1e-15));
        }
    }

    #[test]
    fn mppi_two_point_hand_value() {
        let t = 0.7;
        let cfg = WeightConfig::mppi(t, 0.0).unwrap();
        let w = forward_weights(&[0.0, t * libm::log(3.0)], &cfg).unwrap();
        assert!(close(w[0], 1.5, 1e-12) && close(w[1], 0.5, 1e-12));
    }

    #[test]
    fn cem_single_elite_matches_sort_oracle() {
        let costs: Vec<f64> = (0..100).map(|i| libm::sin(i as f64 * 1.7) + 2.0).collect();
        let best = (0..100)
            .min_by(|&a, &b| costs[a].partial_cmp(&costs[b]).unwrap())
            .unwrap();
        let w = forward_weights(&costs, &WeightConfig::cem(0.01, 1.0).unwrap()).unwrap();
        for (i, v) in w.iter().enumerate() {
            assert_eq!(*v, if i == best { 100.0 } else { 0.0 });
        }
    }

    #[test]
    fn cem_ties_break_towards_lower_index() {
        let w = forward_weights(&[1.0, 0.0, 0.0, 0.0], &WeightConfig::cem(0.5, 1.0).unwrap()).unwrap();
        assert_eq!(w, vec![0.0, 2.0, 2.0, 0.0]);
    }

    #[test]
    fn errors() {
        let cfg = WeightConfig::default();
        assert_eq!(forward_weights(&[], &cfg), Err(CoreError::EmptyCandidates));
        assert_eq!(
            forward_weights(&[0.0, f64::NAN], &cfg),
            Err(CoreError::NonFinite("costs"))
        );
        // λN rounds up to at least one elite, so only a zero fraction selects none
        let cfg = WeightConfig::cem(0.01, 1.0).unwrap();
        assert_eq!(
            backend_weights(&[1.0, 2.0], &cfg, 0.0, 2.0),
            Err(CoreError::QuantileSelectsNone)
        );
    }

    #[test]
    fn signed_weights_examples() {
        for cfg in [
            WeightConfig::mppi(1.0, 1.0).unwrap(),
            WeightConfig::cem(0.2, 1.0).unwrap(),
        ] {
            let ln_h = signed_log_weights(&[2.0; 10], &cfg).unwrap();
            for v in ln_h.as_slice() {
                assert!(v.abs() < 1e-12);
            }
        }

        let costs = [0.3, -1.0, 2.5, 0.0];
        for cfg in [
            WeightConfig::mppi(1.0, 0.0).unwrap(),
            WeightConfig::cem(0.3, 0.0).unwrap(),
        ] {
            let ln_h = signed_log_weights(&costs, &cfg).unwrap();
            assert_eq!(ln_h.as_slice(), forward_weights(&costs, &cfg).unwrap().as_slice());
        }

        // 3·softmax(−J) − 3·softmax(J) on J = [−1, 0, 1]
        let ln_h = signed_log_weights(&[-1.0, 0.0, 1.0], &WeightConfig::mppi(1.0, 1.0).unwrap()).unwrap();
        let e = libm::exp(1.0);
        let z = e + 1.0 + 1.0 / e;
        let soft = [e / z, 1.0 / z, 1.0 / (e * z)];
        let expected = [3.0 * (soft[0] - soft[2]), 0.0, 3.0 * (soft[2] - soft[0])];
        for (a, b) in ln_h.as_slice().iter().zip(expected) {
            assert!(close(*a, b, 1e-12), "{a} vs {b}");
        }
        assert!(ln_h.as_slice().iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn cem_negative_side_uses_tighter_quantile() {
        let costs: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let cfg = WeightConfig::cem(0.2, 0.5).unwrap();
        let ln_h = signed_log_weights(&costs, &cfg).unwrap();
        // 4 elites at +5, ⌈0.1·20⌉ = 2 worst at −5
        assert_eq!(&ln_h.as_slice()[..4], &[5.0; 4]);
        assert_eq!(&ln_h.as_slice()[18..], &[-5.0; 2]);
        assert!(ln_h.as_slice()[4..18].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn partition_examples() {
        let (p, m) = partition_clusters(&[0.5, -0.3, 0.0]);
        assert_eq!((p, m), (vec![0], vec![1]));
        let (p, m) = partition_clusters(&[0.1, 2.0]);
        assert_eq!(p, vec![0, 1]);
        assert!(m.is_empty());
        let ln_h = signed_log_weights(&[-1.0, 1.0], &WeightConfig::mppi(1.0, 1.0).unwrap()).unwrap();
        let (p, m) = partition_clusters(ln_h.as_slice());
        assert_eq!((p.len(), m.len()), (1, 1));
    }
}
