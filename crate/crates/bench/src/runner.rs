//! Closed-loop episodes: solve, apply the first action, step the model.

use std::time::Instant;

use rayon::prelude::*;
use rklmpc_core::envs::{realized_stage_cost, rollout_summary, Environment, RolloutSummary};
use rklmpc_core::solvers::{solve, Clock, RolloutEvaluator, SolverConfig, SolverState};
use rklmpc_core::ActionSequence;

use crate::config::{ConfigError, ExperimentConfig};

/// Evaluates candidates on a rayon pool. Results keep candidate order, so
/// the thread count never changes the outcome.
pub struct ParallelEvaluator {
    pool: Option<rayon::ThreadPool>,
}

impl ParallelEvaluator {
    /// `threads == 0` uses the global pool.
    pub fn new(threads: usize) -> Self {
        let pool = (threads > 0).then(|| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .expect("rollout thread pool")
        });
        Self { pool }
    }
}

impl RolloutEvaluator for ParallelEvaluator {
    fn evaluate(&self, env: &dyn Environment, x: &[f64], sequences: &[ActionSequence]) -> Vec<RolloutSummary> {
        let run = || sequences.par_iter().map(|s| rollout_summary(env, x, s)).collect();
        match &self.pool {
            Some(pool) => pool.install(run),
            None => run(),
        }
    }
}

/// Seconds since construction, from `Instant`.
pub struct MonotonicClock {
    origin: Instant,
}

impl Default for MonotonicClock {
    fn default() -> Self {
        Self { origin: Instant::now() }
    }
}

impl Clock for MonotonicClock {
    fn now(&self) -> f64 {
        self.origin.elapsed().as_secs_f64()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRow {
    pub step: usize,
    /// Seconds spent in `solve`.
    pub wall_time: f64,
    /// Longest iteration of the step, seconds.
    pub max_iteration_time: f64,
    pub iterations: usize,
    pub action: Vec<f64>,
    /// Predicted cost of the optimized mean sequence.
    pub cost: f64,
    pub noise_strength: f64,
    pub step_size: f64,
    /// Realized stage cost of the step.
    pub stage_cost: f64,
    pub negative_updates: usize,
    pub nonfinite_costs: usize,
    /// The state after the step violates the environment constraint.
    pub violation: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub env: String,
    pub solver: String,
    pub seed: u64,
    pub rows: Vec<StepRow>,
    /// `−Σ` realized stage costs.
    pub total_reward: f64,
}

impl EpisodeRecord {
    pub fn violated(&self) -> bool {
        self.rows.iter().any(|r| r.violation)
    }
}

/// One closed-loop episode of `steps` control steps from the env's
/// initial state.
pub fn run_episode(
    env: &dyn Environment,
    cfg: &SolverConfig,
    steps: usize,
    evaluator: &dyn RolloutEvaluator,
) -> Result<EpisodeRecord, ConfigError> {
    let clock = MonotonicClock::default();
    let mut x = env.initial_state();
    let mut next = vec![0.0; x.len()];
    let mut prev: Option<SolverState> = None;
    let mut rows = Vec::with_capacity(steps);
    let mut total = 0.0;
    for step in 0..steps {
        let (result, state) = solve(env, &x, prev.as_ref(), cfg, evaluator, &clock)?;
        let d = &result.diagnostics;
        let mean = ActionSequence::new(env.action_dim(), state.theta_plus.mu().to_vec())?;
        let predicted = rollout_summary(env, &x, &mean).cost;
        let stage = realized_stage_cost(env, &x, &result.action);
        env.dynamics(&x, &result.action, &mut next);
        std::mem::swap(&mut x, &mut next);
        total -= stage;
        rows.push(StepRow {
            step,
            wall_time: d.wall_time,
            max_iteration_time: d.max_iteration_time,
            iterations: d.iterations,
            action: result.action.clone(),
            cost: predicted,
            noise_strength: d.noise_strength,
            step_size: d.step_size,
            stage_cost: stage,
            negative_updates: d.negative_updates,
            nonfinite_costs: d.nonfinite_costs,
            violation: env.constraint(&x, &result.action) > 0.0,
        });
        prev = Some(state);
    }
    Ok(EpisodeRecord {
        env: env.name().to_string(),
        solver: cfg.kind.to_string(),
        seed: cfg.seed,
        rows,
        total_reward: total,
    })
}

/// One episode per seed, seeds in parallel. Records come back in seed-list
/// order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<EpisodeRecord>, ConfigError> {
    let env = cfg.environment()?;
    cfg.solver.validate()?;
    let evaluator = ParallelEvaluator::new(cfg.threads);
    cfg.seeds
        .par_iter()
        .map(|&seed| {
            let mut solver = cfg.solver.clone();
            solver.seed = seed;
            run_episode(env.as_ref(), &solver, cfg.episode_length, &evaluator)
        })
        .collect()
}
