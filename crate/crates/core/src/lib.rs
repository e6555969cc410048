//! Proximal Newton adaptive importance sampling (PNAIS).
//!
//! The sampler targets densities of the form `π(x) ∝ exp(-f(x) - g(x))` where
//! `f` is twice differentiable and `g` is convex, possibly non-smooth, and
//! possibly an indicator function. A population of Gaussian proposals is
//! adapted by resampling followed by one scaled proximal Newton step per
//! proposal; samples are weighted with the deterministic mixture (DM-MIS)
//! scheme and combined into self-normalized moment estimates and an
//! unbiased estimate of the normalization constant.
//!
//! Module map:
//!
//! - [`spd`], [`proposal`], [`config`], [`sample`], [`rng`]: shared data model.
//! - [`prox`]: proximity operators and the metric prox (dual forward-backward).
//! - [`targets`]: the benchmark targets and ground-truth integration.
//! - [`engine`]: weighting, resampling, adaptation, the sampler loop and estimators.

pub mod config;
pub mod engine;
pub mod error;
pub mod proposal;
pub mod prox;
pub mod rng;
pub mod sample;
pub mod spd;
pub mod targets;

pub use config::{
    AdaptationMode, BacktrackingConfig, CovarianceMode, DfbConfig, ResamplingMode, SamplerConfig,
};
pub use engine::{run_sampler, RunResult, RunSummary};
pub use error::{Error, Result};
pub use proposal::{gaussian_log_density, gaussian_sample, Proposal, StaticParams};
pub use prox::ProxFn;
pub use sample::WeightedSample;
pub use spd::SpdMatrix;
pub use targets::{GroundTruth, SmoothFn, TargetModel};

/// Dense column vector used for points in the sample space.
pub type Point = nalgebra::DVector<f64>;
