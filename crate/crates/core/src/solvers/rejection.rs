//! Pseudo-rejection sampling from the composition of the good policy and
//! the complement of the bad one.
//!
//! Ñ candidates are drawn from `π⁺`. Each gets the log-score
//! `−ln(π⁻(U) + κ·π⁺(μ⁻))`, and `N` of them are kept without replacement
//! with probability proportional to the score. Selection uses perturbed keys
//! (log-score plus standard Gumbel noise, keep the top `N`), so the
//! normalising constant is never needed.

use alloc::vec::Vec;

use rand_distr::{Distribution, Gumbel};

use crate::policy::{log_density_raw, sample_batch, ActionSequence, PolicyParams};
use crate::rng::{Lane, StreamKey};

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + libm::log1p(libm::exp(lo - hi))
}

/// Log of the unnormalised complementary density of `π⁻` for each candidate.
pub fn complement_log_scores(
    plus: &PolicyParams,
    minus: &PolicyParams,
    kappa: f64,
    candidates: &[ActionSequence],
) -> Vec<f64> {
    let offset = if kappa > 0.0 {
        libm::log(kappa) + log_density_raw(plus, minus.mu())
    } else {
        f64::NEG_INFINITY
    };
    candidates
        .iter()
        .map(|u| -log_add_exp(log_density_raw(minus, u.raw()), offset))
        .collect()
}

/// Selection probabilities `pⁿ = scoreⁿ / Σ score`, from log-scores.
pub fn selection_probabilities(log_scores: &[f64]) -> Vec<f64> {
    let max = log_scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = log_scores.iter().map(|s| libm::exp(s - max)).collect();
    let sum: f64 = p.iter().sum();
    for v in &mut p {
        *v /= sum;
    }
    p
}

/// Indices of `count` candidates drawn without replacement, proportional to
/// `exp(log_scores)`, returned in ascending order.
pub(crate) fn weighted_top_k(log_scores: &[f64], count: usize, key: &StreamKey) -> Vec<usize> {
    let gumbel = Gumbel::new(0.0, 1.0).expect("unit Gumbel");
    let keys: Vec<f64> = log_scores
        .iter()
        .enumerate()
        .map(|(n, s)| s + gumbel.sample(&mut key.stream(n as u64, Lane::Selection)))
        .collect();
    let mut idx: Vec<usize> = (0..log_scores.len()).collect();
    let count = count.min(idx.len());
    if count == 0 {
        return Vec::new();
    }
    let order = |a: &usize, b: &usize| keys[*b].total_cmp(&keys[*a]).then(a.cmp(b));
    if count < idx.len() {
        idx.select_nth_unstable_by(count - 1, order);
        idx.truncate(count);
    }
    idx.sort_unstable();
    idx
}

/// Draw `oversample` candidates from `plus` and keep `count` of them.
pub fn compose_and_sample(
    plus: &PolicyParams,
    minus: &PolicyParams,
    oversample: usize,
    count: usize,
    kappa: f64,
    key: &StreamKey,
) -> Vec<ActionSequence> {
    let pool = sample_batch(plus, oversample.max(count), key);
    if pool.len() == count {
        return pool;
    }
    let scores = complement_log_scores(plus, minus, kappa, &pool);
    let picked = weighted_top_k(&scores, count, key);
    let mut pool: Vec<Option<ActionSequence>> = pool.into_iter().map(Some).collect();
    picked
        .into_iter()
        .map(|n| pool[n].take().expect("indices are distinct"))
        .collect()
}
