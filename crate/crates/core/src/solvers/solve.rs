use alloc::vec::Vec;

use super::{
    accel_update, compose_and_sample, forward_update, reject_update, reverse_update, warm_start, CandidateBatch,
    SolverConfig, SolverKind, SolverState,
};
use crate::envs::{rollout_summary, Environment, RolloutSummary};
use crate::error::{CoreError, Result};
use crate::policy::{sample_batch, ActionSequence, PolicyParams};
use crate::rng::StreamKey;
use crate::weighting::{forward_weights, signed_log_weights};

/// Monotonic time source, in seconds from an arbitrary origin.
pub trait Clock {
    fn now(&self) -> f64;
}

/// A clock that never advances. With it, deadlines only stop a control step
/// when they are zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct FrozenClock;

impl Clock for FrozenClock {
    fn now(&self) -> f64 {
        0.0
    }
}

/// Evaluates the costs of a batch. Implementations may run in parallel but
/// must return results in candidate order.
pub trait RolloutEvaluator {
    fn evaluate(&self, env: &dyn Environment, x: &[f64], sequences: &[ActionSequence]) -> Vec<RolloutSummary>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SequentialEvaluator;

impl RolloutEvaluator for SequentialEvaluator {
    fn evaluate(&self, env: &dyn Environment, x: &[f64], sequences: &[ActionSequence]) -> Vec<RolloutSummary> {
        sequences.iter().map(|s| rollout_summary(env, x, s)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    pub iterations: usize,
    /// Lowest candidate cost seen during the control step.
    pub best_cost: f64,
    pub wall_time: f64,
    /// Longest single iteration.
    pub max_iteration_time: f64,
    /// Last noise strength sᵢ (accel only, otherwise 0).
    pub noise_strength: f64,
    /// Final step weight aᵢ.
    pub step_size: f64,
    /// Candidates whose cost was non-finite and got replaced.
    pub nonfinite_costs: usize,
    /// Iterations that updated the good (or only) policy.
    pub positive_updates: usize,
    /// Iterations that updated the bad policy.
    pub negative_updates: usize,
    /// Forward iterations whose weights were all zero.
    pub degenerate_batches: usize,
    /// No iteration updated the good policy; the action is the warm-started
    /// mean.
    pub fallback_to_warm_start: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlResult {
    /// First action of the optimized sequence, squashed into the bounds.
    pub action: Vec<f64>,
    pub diagnostics: Diagnostics,
}

/// Replace non-finite costs by the largest finite cost plus `penalty`.
fn sanitize_costs(summaries: &[RolloutSummary], penalty: f64) -> (Vec<f64>, usize) {
    let finite_max = summaries
        .iter()
        .map(|r| r.cost)
        .filter(|c| c.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    let fallback = if finite_max.is_finite() {
        finite_max + penalty
    } else {
        penalty
    };
    let mut flagged = 0;
    let costs = summaries
        .iter()
        .map(|r| {
            if r.non_finite {
                flagged += 1;
            }
            if r.cost.is_finite() {
                r.cost
            } else {
                if !r.non_finite {
                    flagged += 1;
                }
                fallback
            }
        })
        .collect();
    (costs, flagged)
}

/// State at the start of a control step: a cold start without `prev`,
/// otherwise the warm-started continuation of `prev`.
pub fn begin_step(env: &dyn Environment, prev: Option<&SolverState>, cfg: &SolverConfig) -> Result<SolverState> {
    cfg.validate()?;
    let prior = PolicyParams::standard(env.action_dim(), cfg.horizon);
    let Some(prev) = prev else {
        return Ok(SolverState::cold(&prior, cfg.alpha));
    };
    prev.theta_plus.check_shape(&prior)?;
    prev.theta_minus.check_shape(&prior)?;
    let plus = warm_start(&prev.theta_plus, &prior, prev.a, cfg.eta, cfg.alpha);
    let minus = warm_start(&prev.theta_minus, &prior, prev.a, cfg.eta, cfg.alpha);
    let mut theta_plus = plus.theta;
    let mut theta_minus = minus.theta;
    theta_plus.floor_sigma(cfg.sigma_floor);
    theta_minus.floor_sigma(cfg.sigma_floor);
    Ok(SolverState {
        control_step: prev.control_step + 1,
        tilde_plus: theta_plus.clone(),
        tilde_minus: theta_minus.clone(),
        theta_plus,
        theta_minus,
        a: plus.a,
        big_a: plus.big_a,
        sigma_max: 0.0,
        iteration: 0,
    })
}

/// One sample, evaluate, weight and update pass. Advances
/// `state.iteration` and accumulates into `diag`; timing fields are left to
/// the caller.
pub fn iterate(
    env: &dyn Environment,
    x: &[f64],
    state: &mut SolverState,
    cfg: &SolverConfig,
    evaluator: &dyn RolloutEvaluator,
    diag: &mut Diagnostics,
) -> Result<()> {
    let key = StreamKey::new(cfg.seed, state.control_step, state.iteration as u64);
    let sequences = if cfg.kind.uses_rejection() {
        compose_and_sample(
            &state.theta_plus,
            &state.theta_minus,
            cfg.oversample,
            cfg.candidates,
            cfg.kappa,
            &key,
        )
    } else {
        sample_batch(&state.theta_plus, cfg.candidates, &key)
    };
    let summaries = evaluator.evaluate(env, x, &sequences);
    if summaries.len() != sequences.len() {
        return Err(CoreError::ShapeMismatch {
            expected: sequences.len(),
            found: summaries.len(),
        });
    }
    let (costs, flagged) = sanitize_costs(&summaries, cfg.nonfinite_penalty);
    diag.nonfinite_costs += flagged;
    for c in &costs {
        diag.best_cost = diag.best_cost.min(*c);
    }

    let weights = match cfg.kind {
        SolverKind::Forward => forward_weights(&costs, &cfg.weights)?,
        _ => signed_log_weights(&costs, &cfg.weights)?.into_inner(),
    };
    let batch = CandidateBatch {
        sequences,
        costs,
        weights,
    };
    match cfg.kind {
        SolverKind::Forward => {
            let (next, degenerate) = forward_update(&state.theta_plus, &batch, cfg.alpha, cfg.sigma_floor);
            if degenerate {
                diag.degenerate_batches += 1;
            } else {
                diag.positive_updates += 1;
            }
            state.theta_plus = next;
        }
        SolverKind::Reverse => {
            if let Some(next) = reverse_update(&state.theta_plus, &batch, cfg.alpha, cfg.sigma_floor) {
                state.theta_plus = next;
                diag.positive_updates += 1;
            }
        }
        SolverKind::Reject => {
            let done = reject_update(state, &batch, cfg.alpha, cfg.sigma_floor);
            diag.positive_updates += usize::from(done.plus);
            diag.negative_updates += usize::from(done.minus);
        }
        SolverKind::Accel => {
            let (done, noise) = accel_update(state, &batch, cfg.alpha, cfg.gamma, cfg.sigma_floor);
            diag.positive_updates += usize::from(done.plus);
            diag.negative_updates += usize::from(done.minus);
            diag.noise_strength = noise.s;
        }
    }
    state.iteration += 1;
    diag.iterations += 1;
    diag.step_size = state.a;
    Ok(())
}

/// Optimize the action sequence for state `x` and return the first action.
///
/// Iterations run until `max_iterations` or until the next one would be
/// expected to overrun the deadline (elapsed time plus the mean iteration
/// time so far). The first iteration always runs.
pub fn solve(
    env: &dyn Environment,
    x: &[f64],
    prev: Option<&SolverState>,
    cfg: &SolverConfig,
    evaluator: &dyn RolloutEvaluator,
    clock: &dyn Clock,
) -> Result<(ControlResult, SolverState)> {
    let start = clock.now();
    if x.len() != env.state_dim() {
        return Err(CoreError::ShapeMismatch {
            expected: env.state_dim(),
            found: x.len(),
        });
    }
    let mut state = begin_step(env, prev, cfg)?;
    let mut diag = Diagnostics {
        best_cost: f64::INFINITY,
        step_size: state.a,
        ..Diagnostics::default()
    };
    let mut busy = 0.0;

    while diag.iterations < cfg.max_iterations {
        if diag.iterations > 0 {
            if let Some(deadline) = cfg.deadline {
                let mean = busy / diag.iterations as f64;
                if clock.now() - start + mean >= deadline {
                    break;
                }
            }
        }
        let iter_start = clock.now();
        iterate(env, x, &mut state, cfg, evaluator, &mut diag)?;
        let elapsed = clock.now() - iter_start;
        busy += elapsed;
        diag.max_iteration_time = diag.max_iteration_time.max(elapsed);
    }

    diag.fallback_to_warm_start = diag.positive_updates == 0;
    let action = env.bounds().squash(state.theta_plus.first_mu())?;
    diag.wall_time = clock.now() - start;
    Ok((
        ControlResult {
            action,
            diagnostics: diag,
        },
        state,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{QuadraticBowl, TrapCorridor};
    use crate::policy::ActionBounds;
    use crate::weighting::WeightConfig;
    use alloc::vec;
    use core::cell::Cell;

    /// Advances by `tick` seconds on every read.
    struct TickClock {
        t: Cell<f64>,
        tick: f64,
    }

    impl Clock for TickClock {
        fn now(&self) -> f64 {
            let t = self.t.get();
            self.t.set(t + self.tick);
            t
        }
    }

    struct Flat {
        bounds: ActionBounds,
    }

    impl Environment for Flat {
        fn name(&self) -> &'static str {
            "flat"
        }
        fn state_dim(&self) -> usize {
            1
        }
        fn bounds(&self) -> &ActionBounds {
            &self.bounds
        }
        fn dt(&self) -> f64 {
            0.1
        }
        fn initial_state(&self) -> Vec<f64> {
            vec![0.0]
        }
        fn dynamics(&self, _x: &[f64], _u: &[f64], next: &mut [f64]) {
            next[0] = 0.0;
        }
        fn stage_cost(&self, _x: &[f64], _u: &[f64]) -> f64 {
            0.0
        }
        fn terminal_cost(&self, _x: &[f64]) -> f64 {
            0.0
        }
        fn constraint_penalty(&self) -> f64 {
            1.0
        }
    }

    fn config(kind: SolverKind) -> SolverConfig {
        SolverConfig {
            kind,
            candidates: 16,
            oversample: 64,
            horizon: 4,
            alpha: 0.2,
            deadline: None,
            max_iterations: 5,
            seed: 11,
            weights: WeightConfig::mppi(1.0, 1.0).unwrap(),
            ..SolverConfig::default()
        }
    }

    #[test]
    fn zero_cost_single_iteration_returns_warm_mean() {
        let env = Flat {
            bounds: ActionBounds::symmetric(2, 1.5).unwrap(),
        };
        for kind in SolverKind::ALL {
            let mut cfg = config(kind);
            cfg.max_iterations = 1;
            let (res, state) = solve(&env, &[0.0], None, &cfg, &SequentialEvaluator, &FrozenClock).unwrap();
            assert_eq!(res.diagnostics.iterations, 1);
            // equal costs: every weight is 1 (forward) or 0 (signed)
            if kind == SolverKind::Forward {
                assert_eq!(res.action, env.bounds().squash(state.theta_plus.first_mu()).unwrap());
            } else {
                assert_eq!(res.action, vec![0.0, 0.0]);
                // decomposed solvers see two empty clusters
                assert_eq!(res.diagnostics.fallback_to_warm_start, kind.uses_rejection());
            }
        }
    }

    #[test]
    fn deadline_zero_runs_exactly_one_iteration() {
        let env = QuadraticBowl::default();
        let mut cfg = config(SolverKind::Accel);
        cfg.deadline = Some(0.0);
        cfg.max_iterations = 100;
        let (res, _) = solve(&env, &[0.0], None, &cfg, &SequentialEvaluator, &FrozenClock).unwrap();
        assert_eq!(res.diagnostics.iterations, 1);
    }

    #[test]
    fn deadline_bounds_iterations_by_mean_duration() {
        let env = QuadraticBowl::default();
        let mut cfg = config(SolverKind::Reject);
        cfg.max_iterations = 1000;
        // each iteration reads the clock twice (start, end) plus one deadline
        // check, so an iteration costs 1 tick and the check adds another
        cfg.deadline = Some(10.0);
        let clock = TickClock {
            t: Cell::new(0.0),
            tick: 1.0,
        };
        let (res, _) = solve(&env, &[0.0], None, &cfg, &SequentialEvaluator, &clock).unwrap();
        let d = &res.diagnostics;
        assert!(d.iterations >= 1 && d.iterations < 10);
        assert!(d.wall_time <= 10.0 + d.max_iteration_time + 1.0);
    }

    #[test]
    fn warm_start_chains_control_steps() {
        let env = TrapCorridor::default();
        let mut cfg = config(SolverKind::Accel);
        cfg.eta = 0.5;
        let x = env.initial_state();
        let (_, s1) = solve(&env, &x, None, &cfg, &SequentialEvaluator, &FrozenClock).unwrap();
        let (_, s2) = solve(&env, &x, Some(&s1), &cfg, &SequentialEvaluator, &FrozenClock).unwrap();
        assert_eq!((s1.control_step, s2.control_step), (0, 1));
        assert!(s2.a > s1.a * 0.5);
    }

    #[test]
    fn identical_inputs_give_identical_results() {
        let env = TrapCorridor::default();
        let x = env.initial_state();
        for kind in SolverKind::ALL {
            let cfg = config(kind);
            let a = solve(&env, &x, None, &cfg, &SequentialEvaluator, &FrozenClock).unwrap();
            let b = solve(&env, &x, None, &cfg, &SequentialEvaluator, &FrozenClock).unwrap();
            assert_eq!(a, b);
            assert!(env.bounds().contains(&a.0.action));
        }
    }

    #[test]
    fn non_finite_costs_are_replaced_and_flagged() {
        let summaries = [
            RolloutSummary {
                cost: 1.0,
                violations: 0,
                non_finite: false,
            },
            RolloutSummary {
                cost: f64::NAN,
                violations: 0,
                non_finite: false,
            },
            RolloutSummary {
                cost: 4.0,
                violations: 0,
                non_finite: true,
            },
        ];
        let (costs, flagged) = sanitize_costs(&summaries, 10.0);
        assert_eq!(costs, vec![1.0, 14.0, 4.0]);
        assert_eq!(flagged, 2);
    }

    #[test]
    fn mismatched_state_is_rejected() {
        let env = TrapCorridor::default();
        let err = solve(
            &env,
            &[0.0],
            None,
            &config(SolverKind::Forward),
            &SequentialEvaluator,
            &FrozenClock,
        );
        assert!(matches!(err, Err(CoreError::ShapeMismatch { .. })));
    }
}
