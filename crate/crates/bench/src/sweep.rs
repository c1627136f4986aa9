//! One-parameter ablation sweeps over a base experiment.

use std::fmt;
use std::str::FromStr;

use crate::config::{ConfigError, ExperimentConfig};
use crate::runner::{run_experiment, EpisodeRecord};
use crate::scores::{summarize, Summary};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    Kappa,
    Gamma,
    Beta,
    Alpha,
}

impl SweepParameter {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepParameter::Kappa => "kappa",
            SweepParameter::Gamma => "gamma",
            SweepParameter::Beta => "beta",
            SweepParameter::Alpha => "alpha",
        }
    }

    fn apply(&self, cfg: &mut ExperimentConfig, value: f64) {
        let s = &mut cfg.solver;
        match self {
            SweepParameter::Kappa => s.kappa = value,
            SweepParameter::Gamma => s.gamma = value,
            SweepParameter::Beta => s.weights.beta = value,
            SweepParameter::Alpha => s.alpha = value,
        }
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepParameter {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "kappa" => Ok(SweepParameter::Kappa),
            "gamma" => Ok(SweepParameter::Gamma),
            "beta" => Ok(SweepParameter::Beta),
            "alpha" => Ok(SweepParameter::Alpha),
            other => Err(ConfigError::UnknownSweepParameter(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub totals: Summary,
    /// Negative-side updates summed over all steps and episodes.
    pub negative_updates: usize,
    pub records: Vec<EpisodeRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub parameter: SweepParameter,
    pub points: Vec<SweepPoint>,
}

/// Run `base` once per sweep value.
pub fn ablation_sweep(base: &ExperimentConfig, spec: &SweepSpec) -> Result<SweepTable, ConfigError> {
    if spec.values.is_empty() {
        return Err(ConfigError::EmptySweep);
    }
    let mut points = Vec::with_capacity(spec.values.len());
    for &value in &spec.values {
        let mut cfg = base.clone();
        spec.parameter.apply(&mut cfg, value);
        cfg.solver.validate()?;
        let records = run_experiment(&cfg)?;
        let totals: Vec<f64> = records.iter().map(|r| r.total_reward).collect();
        let negative_updates = records
            .iter()
            .flat_map(|r| r.rows.iter())
            .map(|row| row.negative_updates)
            .sum();
        points.push(SweepPoint {
            value,
            totals: summarize(&totals),
            negative_updates,
            records,
        });
    }
    Ok(SweepTable {
        parameter: spec.parameter,
        points,
    })
}
