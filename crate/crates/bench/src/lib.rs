//! Experiment runner for the sampling-based MPC solvers: configuration
//! files, seeded closed-loop episodes, score normalisation, ablation sweeps
//! and CSV or gnuplot output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod runner;
pub mod scores;
pub mod sweep;

pub use config::{ConfigError, ExperimentConfig, FileConfig};
pub use runner::{run_episode, run_experiment, EpisodeRecord, MonotonicClock, ParallelEvaluator, StepRow};
pub use scores::{normalize_scores, summarize, NormalizedScores, Summary};
pub use sweep::{ablation_sweep, SweepParameter, SweepSpec, SweepTable};
