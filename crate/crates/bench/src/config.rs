//! Experiment configuration: a TOML file with `[experiment]`, `[solver]` and
//! `[weights]` sections, overridden field by field from the command line.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use rklmpc_core::envs::{self, Environment, BUILTIN_ENVIRONMENTS};
use rklmpc_core::solvers::{Preset, SolverConfig, SolverKind};
use rklmpc_core::{CoreError, WeightBackend, WeightConfig};
use serde::Deserialize;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed config {path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error("unknown environment `{0}` (available: {list})", list = BUILTIN_ENVIRONMENTS.join(", "))]
    UnknownEnvironment(String),
    #[error("unknown solver `{0}` (expected forward, reverse, reject or accel)")]
    UnknownSolver(String),
    #[error("unknown preset `{0}` (expected simple, complex or robot)")]
    UnknownPreset(String),
    #[error("unknown weight backend `{0}` (expected cem or mppi)")]
    UnknownBackend(String),
    #[error("unknown sweep parameter `{0}` (expected kappa, gamma, beta or alpha)")]
    UnknownSweepParameter(String),
    #[error("seed list is empty")]
    EmptySeeds,
    #[error("episode length must be at least 1")]
    EmptyEpisode,
    #[error("sweep has no values")]
    EmptySweep,
    #[error("invalid solver settings: {0}")]
    Solver(#[from] CoreError),
}

pub type Result<T> = std::result::Result<T, ConfigError>;

pub fn parse_solver(name: &str) -> Result<SolverKind> {
    SolverKind::from_str(name).map_err(|_| ConfigError::UnknownSolver(name.to_string()))
}

pub fn parse_preset(name: &str) -> Result<Preset> {
    match name {
        "simple" => Ok(Preset::SimpleTasks),
        "complex" => Ok(Preset::ComplexTasks),
        "robot" => Ok(Preset::RealRobot),
        other => Err(ConfigError::UnknownPreset(other.to_string())),
    }
}

pub fn parse_backend(name: &str) -> Result<WeightBackend> {
    match name {
        "cem" => Ok(WeightBackend::Cem),
        "mppi" => Ok(WeightBackend::Mppi),
        other => Err(ConfigError::UnknownBackend(other.to_string())),
    }
}

pub fn environment(name: &str) -> Result<Box<dyn Environment>> {
    envs::builtin(name).ok_or_else(|| ConfigError::UnknownEnvironment(name.to_string()))
}

/// Raw file contents. Every field is optional; missing values fall back to
/// the preset.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub experiment: ExperimentSection,
    pub solver: SolverSection,
    pub weights: WeightsSection,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub env: Option<String>,
    pub solver: Option<String>,
    pub preset: Option<String>,
    pub episode_length: Option<usize>,
    pub seeds: Option<Vec<u64>>,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub horizon: Option<usize>,
    pub candidates: Option<usize>,
    pub oversample: Option<usize>,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub eta: Option<f64>,
    pub kappa: Option<f64>,
    /// Absent or negative means no deadline.
    pub deadline_ms: Option<f64>,
    pub max_iterations: Option<usize>,
    pub sigma_floor: Option<f64>,
    pub nonfinite_penalty: Option<f64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightsSection {
    pub backend: Option<String>,
    pub lambda: Option<f64>,
    pub temperature: Option<f64>,
    pub beta: Option<f64>,
}

impl FileConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    /// Field-wise merge; values in `over` win.
    pub fn merge(mut self, over: FileConfig) -> Self {
        macro_rules! take {
            ($sec:ident: $($f:ident),*) => {
                $(if over.$sec.$f.is_some() { self.$sec.$f = over.$sec.$f; })*
            };
        }
        take!(experiment: env, solver, preset, episode_length, seeds, output, threads);
        take!(solver: horizon, candidates, oversample, alpha, gamma, eta, kappa, deadline_ms,
            max_iterations, sigma_floor, nonfinite_penalty);
        take!(weights: backend, lambda, temperature, beta);
        self
    }

    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let e = &self.experiment;
        let env = e.env.clone().unwrap_or_else(|| "point_reacher".to_string());
        environment(&env)?;
        let kind = parse_solver(e.solver.as_deref().unwrap_or("accel"))?;
        let preset = parse_preset(e.preset.as_deref().unwrap_or("complex"))?;
        let mut solver = SolverConfig::preset(kind, preset);

        let s = &self.solver;
        if let Some(v) = s.horizon {
            solver.horizon = v;
        }
        if let Some(v) = s.candidates {
            solver.candidates = v;
            if s.oversample.is_none() {
                solver.oversample = solver.oversample.max(v);
            }
        }
        if let Some(v) = s.oversample {
            solver.oversample = v;
        }
        if let Some(v) = s.alpha {
            solver.alpha = v;
        }
        if let Some(v) = s.gamma {
            solver.gamma = v;
        }
        if let Some(v) = s.eta {
            solver.eta = v;
        }
        if let Some(v) = s.kappa {
            solver.kappa = v;
        }
        if let Some(ms) = s.deadline_ms {
            solver.deadline = (ms >= 0.0).then_some(ms * 1e-3);
        }
        if let Some(v) = s.max_iterations {
            solver.max_iterations = v;
        }
        if let Some(v) = s.sigma_floor {
            solver.sigma_floor = v;
        }
        if let Some(v) = s.nonfinite_penalty {
            solver.nonfinite_penalty = v;
        }

        let w = &self.weights;
        let backend = match &w.backend {
            Some(name) => parse_backend(name)?,
            None => solver.weights.backend,
        };
        solver.weights = WeightConfig::new(
            backend,
            w.lambda.unwrap_or(solver.weights.lambda),
            w.temperature.unwrap_or(solver.weights.temperature),
            w.beta.unwrap_or(solver.weights.beta),
        )?;
        solver.validate()?;

        let seeds = e.seeds.clone().unwrap_or_else(|| (0..20).collect());
        if seeds.is_empty() {
            return Err(ConfigError::EmptySeeds);
        }
        let episode_length = e.episode_length.unwrap_or(50);
        if episode_length == 0 {
            return Err(ConfigError::EmptyEpisode);
        }
        Ok(ExperimentConfig {
            env,
            solver,
            episode_length,
            seeds,
            output: e.output.clone(),
            threads: e.threads.unwrap_or(0),
        })
    }
}

/// A validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub env: String,
    pub solver: SolverConfig,
    pub episode_length: usize,
    pub seeds: Vec<u64>,
    pub output: Option<PathBuf>,
    /// Rollout worker threads; 0 uses the rayon default.
    pub threads: usize,
}

impl ExperimentConfig {
    pub fn new(env: &str, solver: SolverConfig, episode_length: usize, seeds: Vec<u64>) -> Result<Self> {
        environment(env)?;
        solver.validate()?;
        if seeds.is_empty() {
            return Err(ConfigError::EmptySeeds);
        }
        if episode_length == 0 {
            return Err(ConfigError::EmptyEpisode);
        }
        Ok(Self {
            env: env.to_string(),
            solver,
            episode_length,
            seeds,
            output: None,
            threads: 0,
        })
    }

    pub fn environment(&self) -> Result<Box<dyn Environment>> {
        environment(&self.env)
    }
}
