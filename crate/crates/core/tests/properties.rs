use std::cell::Cell;

use proptest::prelude::*;
use rklmpc_core::envs::{Environment, QuadraticBowl, RolloutSummary};
use rklmpc_core::policy::{kl_divergence, mirror_inverse, mirror_map, sample_batch};
use rklmpc_core::solvers::{
    accel_side_step, begin_step, complement_log_scores, forward_update, iterate, md_gradient, selection_probabilities,
    solve, step_size_advance, CandidateBatch, Clock, Diagnostics, Gradient, Preset, RolloutEvaluator,
    SequentialEvaluator, SolverConfig, SolverKind,
};
use rklmpc_core::weighting::{forward_weights, signed_log_weights};
use rklmpc_core::{ActionSequence, MirrorPoint, PolicyParams, StreamKey, WeightConfig};

fn params(dim: usize, horizon: usize) -> impl Strategy<Value = PolicyParams> {
    let len = dim * horizon;
    (
        prop::collection::vec(-5.0..5.0f64, len),
        prop::collection::vec(0.05..4.0f64, len),
    )
        .prop_map(move |(mu, sigma)| PolicyParams::new(dim, horizon, mu, sigma).unwrap())
}

fn pair() -> impl Strategy<Value = (PolicyParams, PolicyParams)> {
    (1usize..3, 1usize..4).prop_flat_map(|(a, h)| (params(a, h), params(a, h)))
}

fn weight_config() -> impl Strategy<Value = WeightConfig> {
    (
        any::<bool>(),
        0.02..0.5f64,
        0.1..5.0f64,
        prop::sample::select(vec![0.0, 0.25, 0.5, 1.0]),
    )
        .prop_map(|(cem, lambda, t, beta)| {
            if cem {
                WeightConfig::cem(lambda, beta).unwrap()
            } else {
                WeightConfig::mppi(t, beta).unwrap()
            }
        })
}

proptest! {
    #[test]
    fn mirror_round_trip((theta, anchor) in pair()) {
        let back = mirror_inverse(&mirror_map(&theta, &anchor).unwrap()).unwrap();
        for (a, b) in back.mu().iter().zip(theta.mu()).chain(back.sigma().iter().zip(theta.sigma())) {
            prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
        }
    }

    #[test]
    fn mirror_inverse_scales_are_positive(
        z in prop::collection::vec(-1e8..1e8f64, 4),
        anchor in params(1, 4),
    ) {
        let point = MirrorPoint { z_mu: z.clone(), z_sigma: z, reference: anchor };
        let theta = mirror_inverse(&point).unwrap();
        prop_assert!(theta.sigma().iter().all(|s| *s > 0.0));
    }

    #[test]
    fn kl_is_nonnegative_and_zero_on_the_diagonal((a, b) in pair()) {
        prop_assert!(kl_divergence(&a, &b).unwrap() >= 0.0);
        prop_assert!(kl_divergence(&a, &a).unwrap().abs() < 1e-12);
    }

    #[test]
    fn signed_weights_sum_to_one_minus_beta(
        costs in prop::collection::vec(-50.0..50.0f64, 2..200),
        cfg in weight_config(),
    ) {
        let n = costs.len() as f64;
        let w = signed_log_weights(&costs, &cfg).unwrap();
        let sum: f64 = w.as_slice().iter().sum();
        prop_assert!((sum - (1.0 - cfg.beta) * n).abs() <= 1e-9 * n);
        let h = forward_weights(&costs, &cfg).unwrap();
        prop_assert!((h.iter().sum::<f64>() - n).abs() <= 1e-9 * n);
        prop_assert!(h.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn mppi_weights_ignore_cost_offsets_and_favour_low_costs(
        costs in prop::collection::vec(-10.0..10.0f64, 2..64),
        shift in -1e3..1e3f64,
        t in 0.1..5.0f64,
    ) {
        let cfg = WeightConfig::mppi(t, 1.0).unwrap();
        let w = forward_weights(&costs, &cfg).unwrap();
        let shifted: Vec<f64> = costs.iter().map(|c| c + shift).collect();
        for (a, b) in w.iter().zip(forward_weights(&shifted, &cfg).unwrap()) {
            prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
        }
        for i in 0..costs.len() {
            for j in 0..costs.len() {
                if costs[i] < costs[j] {
                    prop_assert!(w[i] >= w[j]);
                }
            }
        }
    }

    #[test]
    fn selection_probabilities_are_a_distribution(
        (plus, minus) in pair(),
        kappa in prop::sample::select(vec![0.0, 1.0, 1e5]),
        seed in 0u64..1000,
    ) {
        let pool = sample_batch(&plus, 40, &StreamKey::new(seed, 0, 0));
        let scores = complement_log_scores(&plus, &minus, kappa, &pool);
        let p = selection_probabilities(&scores);
        prop_assert!(p.iter().all(|v| *v >= 0.0 && v.is_finite()));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // a common factor on every density is a shift of every log-score
        let shifted: Vec<f64> = scores.iter().map(|s| s - 3.7).collect();
        for (a, b) in p.iter().zip(selection_probabilities(&shifted)) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn weighted_fit_is_a_stationary_point_without_negative_weights(
        seed in 0u64..500,
        t in 0.2..5.0f64,
    ) {
        let start = PolicyParams::new(1, 3, vec![0.3, -0.2, 0.0], vec![1.0, 0.7, 1.4]).unwrap();
        let seqs = sample_batch(&start, 64, &StreamKey::new(seed, 1, 2));
        let costs: Vec<f64> = seqs.iter().map(|s| s.raw().iter().map(|u| (u - 0.5) * (u - 0.5)).sum()).collect();
        let cfg = WeightConfig::mppi(t, 0.0).unwrap();
        let w = signed_log_weights(&costs, &cfg).unwrap().into_inner();
        let batch = CandidateBatch::new(seqs, costs, w).unwrap();
        let (fit, degenerate) = forward_update(&start, &batch, 1.0, 1e-9);
        prop_assert!(!degenerate);
        let all: Vec<usize> = (0..batch.len()).collect();
        let g = md_gradient(&fit, &batch.sequences, &batch.weights, &all).unwrap();
        for v in g.mu.iter().chain(&g.sigma) {
            prop_assert!(v.abs() < 1e-9, "{v}");
        }
    }
}

fn toy_gradient(theta: &PolicyParams) -> Gradient {
    Gradient {
        mu: theta
            .mu()
            .iter()
            .enumerate()
            .map(|(k, m)| 0.8 * (m - 0.3 * k as f64 - 0.5))
            .collect(),
        sigma: theta.sigma().iter().map(|s| 0.5 * (s - 0.4) + 0.1 * s * s).collect(),
    }
}

fn close(a: &PolicyParams, b: &PolicyParams, tol: f64) -> bool {
    a.mu()
        .iter()
        .zip(b.mu())
        .chain(a.sigma().iter().zip(b.sigma()))
        .all(|(x, y)| (x - y).abs() <= tol * y.abs().max(1.0))
}

fn combine(terms: &[(f64, &PolicyParams)]) -> PolicyParams {
    let first = terms[0].1;
    let mut mu = vec![0.0; first.len()];
    let mut sigma = vec![0.0; first.len()];
    for (c, p) in terms {
        for k in 0..first.len() {
            mu[k] += c * p.mu()[k];
            sigma[k] += c * p.sigma()[k];
        }
    }
    PolicyParams::new(first.action_dim(), first.horizon(), mu, sigma).unwrap()
}

fn sub(z: &MirrorPoint, step: f64, g: &Gradient) -> MirrorPoint {
    MirrorPoint {
        z_mu: z.z_mu.iter().zip(&g.mu).map(|(a, b)| a - step * b).collect(),
        z_sigma: z.z_sigma.iter().zip(&g.sigma).map(|(a, b)| a - step * b).collect(),
        reference: z.reference.clone(),
    }
}

/// Three forms of the accelerated recursion on a frozen mirror space.
#[test]
fn accelerated_recursion_matches_both_reference_forms() {
    let theta1 = PolicyParams::new(1, 3, vec![-0.4, 0.2, 1.0], vec![1.2, 0.6, 0.9]).unwrap();
    let alpha = 0.02;
    let psi = |p: &PolicyParams| mirror_map(p, &theta1).unwrap();
    let inv = |z: &MirrorPoint| mirror_inverse(z).unwrap();

    // recursion under test
    let (mut theta, mut tilde) = (theta1.clone(), theta1.clone());
    // momentum form
    let mut m_theta = theta1.clone();
    let mut m_z = psi(&theta1);
    let mut m_prev = theta1.clone();
    // three-variable form
    let mut t_theta = theta1.clone();
    let mut t_z = psi(&theta1);
    let mut t_y = theta1.clone();
    let (mut a, mut big_a) = (alpha, alpha);
    let mut big_a_prev = 0.0;

    for i in 1..=100 {
        let (a_next, big_a_next) = step_size_advance(a, big_a, 0.3, alpha, 0.0);
        assert!((a - alpha * i as f64).abs() < 1e-12);

        let g = toy_gradient(&theta);
        let (next, new_tilde) = accel_side_step(&theta, &tilde, &theta1, &g, a, a_next, big_a, big_a_next);

        let g = toy_gradient(&m_theta);
        m_z = sub(&m_z, a, &g);
        let x = inv(&m_z);
        let m_next = combine(&[
            (big_a / big_a_next, &m_theta),
            (a_next / big_a_next, &x),
            (a / big_a_next, &x),
            (-a / big_a_next, &m_prev),
        ]);
        m_prev = x;

        let g = toy_gradient(&t_theta);
        t_z = sub(&t_z, a, &g);
        let x = inv(&t_z);
        t_y = if big_a_prev == 0.0 {
            x.clone()
        } else {
            combine(&[(big_a_prev / big_a, &t_y), (a / big_a, &x)])
        };
        let t_next = combine(&[(big_a / big_a_next, &t_y), (a_next / big_a_next, &x)]);

        assert!(close(&next, &m_next, 1e-9), "iteration {i}: momentum form diverged");
        assert!(
            close(&next, &t_next, 1e-9),
            "iteration {i}: three-variable form diverged"
        );
        assert!(next.sigma().iter().all(|s| *s > 0.0));

        theta = next;
        tilde = new_tilde;
        m_theta = m_next;
        t_theta = t_next;
        big_a_prev = big_a;
        a = a_next;
        big_a = big_a_next;
    }
    // the toy objective pulls μ towards 0.5 + 0.3k
    assert!((theta.mu()[0] - 0.5).abs() < 0.05, "{:?}", theta.mu());
}

/// Simulated time that only passes while rollouts are evaluated.
struct SimTime {
    t: Cell<f64>,
    per_batch: f64,
}

impl Clock for SimTime {
    fn now(&self) -> f64 {
        self.t.get()
    }
}

impl RolloutEvaluator for SimTime {
    fn evaluate(&self, env: &dyn Environment, x: &[f64], sequences: &[ActionSequence]) -> Vec<RolloutSummary> {
        self.t.set(self.t.get() + self.per_batch);
        SequentialEvaluator.evaluate(env, x, sequences)
    }
}

#[test]
fn deadline_overshoot_is_at_most_one_iteration() {
    let env = QuadraticBowl::default();
    for deadline in [0.0, 0.5, 3.0, 7.5, 20.0] {
        let mut cfg = SolverConfig::preset(SolverKind::Accel, Preset::RealRobot);
        cfg.horizon = 3;
        cfg.deadline = Some(deadline);
        let sim = SimTime {
            t: Cell::new(0.0),
            per_batch: 0.25,
        };
        let (res, _) = solve(&env, &[0.0], None, &cfg, &sim, &sim).unwrap();
        let d = &res.diagnostics;
        assert!(d.iterations >= 1);
        assert_eq!(d.max_iteration_time, 0.25);
        assert!(
            d.wall_time <= deadline + d.max_iteration_time,
            "deadline {deadline}: {d:?}"
        );
        // an iteration starts only if it is expected to end before the deadline
        let expected = ((deadline / 0.25).ceil() as usize).saturating_sub(1).max(1);
        assert_eq!(d.iterations, expected, "deadline {deadline}");
    }
}

#[test]
fn best_cost_trends_down_on_a_bowl() {
    let env = QuadraticBowl::default();
    let iterations = 15;
    let mut mean_best = vec![0.0; iterations];
    for seed in 0..20 {
        let mut cfg = SolverConfig::preset(SolverKind::Accel, Preset::ComplexTasks);
        cfg.horizon = 1;
        cfg.seed = seed;
        cfg.deadline = None;
        let mut state = begin_step(&env, None, &cfg).unwrap();
        let mut diag = Diagnostics {
            best_cost: f64::INFINITY,
            ..Diagnostics::default()
        };
        for slot in mean_best.iter_mut() {
            // best cost of this iteration alone
            diag.best_cost = f64::INFINITY;
            iterate(&env, &[0.0], &mut state, &cfg, &SequentialEvaluator, &mut diag).unwrap();
            *slot += diag.best_cost / 20.0;
        }
    }
    let first = mean_best[..5].iter().sum::<f64>();
    let last = mean_best[iterations - 5..].iter().sum::<f64>();
    assert!(last <= first, "{mean_best:?}");
}
