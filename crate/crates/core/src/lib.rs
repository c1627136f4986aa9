//! Sampling-based model predictive control with forward-KL, reverse-KL
//! (mirror descent), rejection-composed and accelerated solvers.
//!
//! The crate is `no_std` and only needs `alloc`. Wall-clock time and
//! parallel rollout evaluation are injected through the [`solvers::Clock`]
//! and [`solvers::RolloutEvaluator`] traits, so the same solver code runs on
//! a desktop benchmark or an embedded controller.
//!
//! Policies are diagonal Gaussians over a pre-squash action grid of shape
//! `action_dim × horizon` (stored time-major). The prior `(0, I)` therefore
//! lives in pre-squash space and is centred on the middle of the action
//! range after squashing.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod envs;
pub mod error;
pub mod policy;
pub mod rng;
pub mod solvers;
pub mod weighting;

pub use error::{CoreError, Result};
pub use policy::{ActionBounds, ActionSequence, MirrorPoint, PolicyParams};
pub use rng::StreamKey;
pub use weighting::{SignedWeightVector, WeightBackend, WeightConfig};
