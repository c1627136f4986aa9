//! Analytic control tasks and rollout evaluation.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::policy::{ActionBounds, ActionSequence};

mod builtin;

pub use builtin::{BimodalValley, PendulumSwingup, PointReacher, QuadraticBowl, TrapCorridor};

/// Dynamics, costs and constraints of a control task.
///
/// All methods must be pure: the same inputs always give the same outputs,
/// and implementations are shared across rollout threads.
pub trait Environment: Send + Sync {
    fn name(&self) -> &'static str;
    fn state_dim(&self) -> usize;
    fn bounds(&self) -> &ActionBounds;
    /// Control period in seconds.
    fn dt(&self) -> f64;
    fn initial_state(&self) -> Vec<f64>;
    /// `next = f(x, u)` for a squashed action `u`.
    fn dynamics(&self, x: &[f64], u: &[f64], next: &mut [f64]);
    fn stage_cost(&self, x: &[f64], u: &[f64]) -> f64;
    fn terminal_cost(&self, x: &[f64]) -> f64;
    /// Feasible when `≤ 0`.
    fn constraint(&self, _x: &[f64], _u: &[f64]) -> f64 {
        -1.0
    }
    fn constraint_penalty(&self) -> f64;

    fn action_dim(&self) -> usize {
        self.bounds().dim()
    }
}

/// Stage cost plus the constraint penalty, as paid by the real system.
pub fn realized_stage_cost(env: &dyn Environment, x: &[f64], u: &[f64]) -> f64 {
    env.stage_cost(x, u) + env.constraint_penalty() * env.constraint(x, u).max(0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RolloutResult {
    pub cost: f64,
    /// `horizon + 1` states, flattened with stride `state_dim`.
    pub states: Vec<f64>,
    pub violations: usize,
    /// A state or cost went non-finite; `cost` holds the fallback value.
    pub non_finite: bool,
}

/// Cost-only summary of a rollout, used on the solver's hot path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RolloutSummary {
    pub cost: f64,
    pub violations: usize,
    pub non_finite: bool,
}

/// Roll `seq` out from `x0` and accumulate
/// `φ(x_H) + Σ_h [L(x_h, u_h) + penalty · max(0, c(x_h, u_h))]`,
/// squashing each action into the environment bounds first.
pub fn rollout_cost(env: &dyn Environment, x0: &[f64], seq: &ActionSequence) -> RolloutResult {
    let mut states = Vec::with_capacity((seq.horizon() + 1) * env.state_dim());
    let summary = rollout_inner(env, x0, seq, Some(&mut states));
    RolloutResult {
        cost: summary.cost,
        states,
        violations: summary.violations,
        non_finite: summary.non_finite,
    }
}

pub fn rollout_summary(env: &dyn Environment, x0: &[f64], seq: &ActionSequence) -> RolloutSummary {
    rollout_inner(env, x0, seq, None)
}

fn rollout_inner(
    env: &dyn Environment,
    x0: &[f64],
    seq: &ActionSequence,
    mut record: Option<&mut Vec<f64>>,
) -> RolloutSummary {
    let horizon = seq.horizon();
    let bounds = env.bounds();
    let penalty = env.constraint_penalty();
    let mut x = x0.to_vec();
    let mut next = vec![0.0; x0.len()];
    let mut u = vec![0.0; bounds.dim()];
    let mut cost = 0.0;
    let mut violations = 0;
    let mut non_finite = x.iter().any(|v| !v.is_finite());
    if let Some(r) = record.as_deref_mut() {
        r.extend_from_slice(&x);
    }
    for t in 0..horizon {
        if non_finite {
            break;
        }
        bounds.squash_into(seq.column(t), &mut u);
        let c = env.constraint(&x, &u);
        if c > 0.0 {
            violations += 1;
        }
        cost += env.stage_cost(&x, &u) + penalty * c.max(0.0);
        env.dynamics(&x, &u, &mut next);
        core::mem::swap(&mut x, &mut next);
        non_finite = x.iter().any(|v| !v.is_finite()) || !cost.is_finite();
        if let Some(r) = record.as_deref_mut() {
            r.extend_from_slice(&x);
        }
    }
    if !non_finite {
        cost += env.terminal_cost(&x);
        non_finite = !cost.is_finite();
    }
    if non_finite {
        cost = penalty * (horizon + 1) as f64;
    }
    RolloutSummary {
        cost,
        violations,
        non_finite,
    }
}

/// Names accepted by [`builtin`].
pub const BUILTIN_ENVIRONMENTS: &[&str] = &[
    "point_reacher",
    "bimodal_valley",
    "trap_corridor",
    "overlap_trap",
    "pendulum_swingup",
    "quadratic",
];

/// Look up a built-in environment by name.
pub fn builtin(name: &str) -> Option<Box<dyn Environment>> {
    Some(match name {
        "point_reacher" => Box::new(PointReacher::default()),
        "bimodal_valley" => Box::new(BimodalValley::default()),
        "trap_corridor" => Box::new(TrapCorridor::default()),
        "overlap_trap" => Box::new(TrapCorridor::overlapping()),
        "pendulum_swingup" => Box::new(PendulumSwingup::default()),
        "quadratic" => Box::new(QuadraticBowl::default()),
        _ => return None,
    })
}
