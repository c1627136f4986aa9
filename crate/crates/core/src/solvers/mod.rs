//! Per-control-step optimizers.
//!
//! * [`SolverKind::Forward`]: weighted maximum likelihood with smoothing.
//! * [`SolverKind::Reverse`]: mirror descent on signed log-weights.
//! * [`SolverKind::Reject`]: separate good/bad policies, composed by
//!   pseudo-rejection sampling.
//! * [`SolverKind::Accel`]: `Reject` with the accelerated dynamic-mirror
//!   update and a noise-adaptive step size.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{CoreError, Result};
use crate::policy::{ActionSequence, PolicyParams, DEFAULT_SIGMA_FLOOR};
use crate::weighting::{WeightBackend, WeightConfig};

mod accel;
mod forward;
mod mirror;
mod rejection;
mod solve;
mod warm;

pub use accel::{accel_side_step, accel_update, noise_strength, step_size_advance, NoiseStrength};
pub use forward::forward_update;
pub use mirror::{md_gradient, mirror_step, reject_update, reverse_update, ClusterUpdates};
pub use rejection::{complement_log_scores, compose_and_sample, selection_probabilities};
pub use solve::{
    begin_step, iterate, solve, Clock, ControlResult, Diagnostics, FrozenClock, RolloutEvaluator, SequentialEvaluator,
};
pub use warm::{warm_start, WarmStart};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Forward,
    Reverse,
    Reject,
    Accel,
}

impl SolverKind {
    pub const ALL: [SolverKind; 4] = [Self::Forward, Self::Reverse, Self::Reject, Self::Accel];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Forward => "forward",
            Self::Reverse => "reverse",
            Self::Reject => "reject",
            Self::Accel => "accel",
        }
    }

    /// Whether the solver keeps a second policy for bad candidates.
    pub fn uses_rejection(&self) -> bool {
        matches!(self, Self::Reject | Self::Accel)
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverKind {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forward" => Ok(Self::Forward),
            "reverse" => Ok(Self::Reverse),
            "reject" => Ok(Self::Reject),
            "accel" => Ok(Self::Accel),
            _ => Err(CoreError::InvalidConfig(
                "unknown solver (expected forward, reverse, reject or accel)",
            )),
        }
    }
}

/// Published hyperparameter rows: many candidates on a GPU, few candidates
/// on a CPU, and an embedded 50 Hz controller.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// CEM, N = 4096, α = 0.5, Ñ = 16N, η = 0.
    SimpleTasks,
    /// MPPI, N = 32, α = 0.05, Ñ = 4N, η = 0.25.
    ComplexTasks,
    /// MPPI, N = 32, α = 0.05, Ñ = 4N, η = 0.5, 20 ms period.
    RealRobot,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub kind: SolverKind,
    /// Candidates evaluated per iteration, N.
    pub candidates: usize,
    /// Candidates drawn before rejection, Ñ (reject/accel only).
    pub oversample: usize,
    pub horizon: usize,
    /// Base step size α ∈ (0, 1].
    pub alpha: f64,
    /// Slowdown gain γ ≥ 0 for the adaptive step.
    pub gamma: f64,
    /// Warm ratio η ∈ [0, 1].
    pub eta: f64,
    /// Blend κ ≥ 0 of the complementary distribution.
    pub kappa: f64,
    pub weights: WeightConfig,
    /// Wall-clock budget per control step in seconds; `None` disables it.
    pub deadline: Option<f64>,
    pub max_iterations: usize,
    pub sigma_floor: f64,
    /// Added to the batch maximum to replace non-finite costs.
    pub nonfinite_penalty: f64,
    pub seed: u64,
}

impl SolverConfig {
    pub fn preset(kind: SolverKind, preset: Preset) -> Self {
        let (backend, candidates, alpha, factor, eta, deadline) = match preset {
            Preset::SimpleTasks => (WeightBackend::Cem, 4096, 0.5, 16, 0.0, 0.1),
            Preset::ComplexTasks => (WeightBackend::Mppi, 32, 0.05, 4, 0.25, 0.1),
            Preset::RealRobot => (WeightBackend::Mppi, 32, 0.05, 4, 0.5, 0.02),
        };
        Self {
            kind,
            candidates,
            oversample: factor * candidates,
            horizon: 12,
            alpha,
            gamma: 0.5,
            eta,
            kappa: 1.0,
            weights: WeightConfig {
                backend,
                lambda: 0.01,
                temperature: 1.0,
                beta: 1.0,
            },
            deadline: Some(deadline),
            max_iterations: 10_000,
            sigma_floor: DEFAULT_SIGMA_FLOOR,
            nonfinite_penalty: 1e3,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.candidates < 2 {
            return Err(CoreError::InvalidConfig("at least two candidates are required"));
        }
        if self.oversample < self.candidates {
            return Err(CoreError::InvalidConfig(
                "oversample count must be at least the candidate count",
            ));
        }
        if self.horizon == 0 {
            return Err(CoreError::InvalidConfig("horizon must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(CoreError::InvalidConfig("alpha must lie in (0, 1]"));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(CoreError::InvalidConfig("gamma must be nonnegative"));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(CoreError::InvalidConfig("eta must lie in [0, 1]"));
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(CoreError::InvalidConfig("kappa must be nonnegative"));
        }
        if self.max_iterations == 0 {
            return Err(CoreError::InvalidConfig("max_iterations must be at least 1"));
        }
        if !(self.sigma_floor > 0.0 && self.sigma_floor.is_finite()) {
            return Err(CoreError::InvalidConfig("sigma_floor must be positive"));
        }
        if let Some(d) = self.deadline {
            if !(d >= 0.0) {
                return Err(CoreError::InvalidConfig("deadline must be nonnegative"));
            }
        }
        if !(self.nonfinite_penalty >= 0.0 && self.nonfinite_penalty.is_finite()) {
            return Err(CoreError::InvalidConfig(
                "nonfinite_penalty must be finite and nonnegative",
            ));
        }
        self.weights.validate()
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::preset(SolverKind::Accel, Preset::ComplexTasks)
    }
}

/// Optimizer state carried from one control step to the next.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    /// Index of the control step that produced this state.
    pub control_step: u64,
    /// Policy generating good candidates; the only policy for
    /// forward/reverse.
    pub theta_plus: PolicyParams,
    /// Policy modelling bad candidates (reject/accel).
    pub theta_minus: PolicyParams,
    /// Accelerated auxiliary points θ̃ for each side.
    pub tilde_plus: PolicyParams,
    pub tilde_minus: PolicyParams,
    /// Current step weight aᵢ; after a control step this is `a_prv`.
    pub a: f64,
    /// Accumulated step weight Aᵢ.
    pub big_a: f64,
    /// Running maximum of the cost mean absolute deviation.
    pub sigma_max: f64,
    /// Iterations completed in the control step.
    pub iteration: usize,
}

impl SolverState {
    /// Cold state: every policy at `prior`, `a = A = α`.
    pub fn cold(prior: &PolicyParams, alpha: f64) -> Self {
        Self {
            control_step: 0,
            theta_plus: prior.clone(),
            theta_minus: prior.clone(),
            tilde_plus: prior.clone(),
            tilde_minus: prior.clone(),
            a: alpha,
            big_a: alpha,
            sigma_max: 0.0,
            iteration: 0,
        }
    }
}

/// Evaluated candidates of one iteration.
///
/// `weights` holds nonnegative optimality weights for the forward solver
/// and signed log-weights `ln H` for the others.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateBatch {
    pub sequences: Vec<ActionSequence>,
    pub costs: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CandidateBatch {
    pub fn new(sequences: Vec<ActionSequence>, costs: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if sequences.len() != costs.len() || costs.len() != weights.len() {
            return Err(CoreError::ShapeMismatch {
                expected: sequences.len(),
                found: if costs.len() != sequences.len() {
                    costs.len()
                } else {
                    weights.len()
                },
            });
        }
        Ok(Self {
            sequences,
            costs,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }
}

/// Gradient with respect to `(mu, sigma)`, laid out like [`PolicyParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl Gradient {
    pub fn zeros(len: usize) -> Self {
        Self {
            mu: alloc::vec![0.0; len],
            sigma: alloc::vec![0.0; len],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_follow_the_published_table() {
        let simple = SolverConfig::preset(SolverKind::Reject, Preset::SimpleTasks);
        assert_eq!(
            (simple.candidates, simple.oversample, simple.horizon),
            (4096, 16 * 4096, 12)
        );
        assert_eq!(simple.alpha, 0.5);
        assert_eq!(simple.weights.backend, WeightBackend::Cem);
        assert_eq!(simple.eta, 0.0);
        let cpu = SolverConfig::preset(SolverKind::Accel, Preset::ComplexTasks);
        assert_eq!(
            (cpu.candidates, cpu.oversample, cpu.alpha, cpu.eta),
            (32, 128, 0.05, 0.25)
        );
        let robot = SolverConfig::preset(SolverKind::Accel, Preset::RealRobot);
        assert_eq!((robot.eta, robot.deadline), (0.5, Some(0.02)));
        for c in [simple, cpu, robot] {
            assert_eq!(
                (c.weights.beta, c.gamma, c.weights.lambda, c.weights.temperature),
                (1.0, 0.5, 0.01, 1.0)
            );
            assert!(c.validate().is_ok());
        }
    }

    #[test]
    fn validation_rejects_bad_values() {
        let base = SolverConfig::default();
        let cases: [fn(&mut SolverConfig); 8] = [
            |c| c.candidates = 1,
            |c| c.oversample = 3,
            |c| c.alpha = 0.0,
            |c| c.alpha = 1.5,
            |c| c.eta = 2.0,
            |c| c.kappa = -1.0,
            |c| c.max_iterations = 0,
            |c| c.deadline = Some(-1.0),
        ];
        for f in cases {
            let mut c = base.clone();
            f(&mut c);
            assert!(c.validate().is_err());
        }
    }

    #[test]
    fn solver_names_round_trip() {
        for k in SolverKind::ALL {
            assert_eq!(k.as_str().parse::<SolverKind>().unwrap(), k);
        }
        assert!("mppi".parse::<SolverKind>().is_err());
    }
}
