//! The adaptive importance sampling loop and its building blocks.

pub mod adapt;
pub mod estimate;
pub mod resample;
pub mod sampler;
pub mod weighting;

pub use adapt::{
    adapt_proposal_grad, adapt_proposal_newton, backtrack_theta, newton_scaling,
    robust_covariance, Adapted, Backtrack, ScalingSource,
};
pub use estimate::{
    estimate, relative_mse, relative_mse_per_coord, snis_mean, snis_second_moment, z_hat,
};
pub use resample::{
    is_global_step, resample_global, resample_glocal, resample_local, ResampledProposal,
    ResampledSet,
};
pub use sampler::{run_sampler, run_sampler_with, RunDiagnostics, RunResult, RunSummary};
pub use weighting::{dm_weights, standard_mis_weights, weight_samples};
