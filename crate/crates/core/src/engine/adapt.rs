//! Mean and covariance adaptation for one resampled proposal.
//!
//! The proximal Newton update moves a resampled location `μ̃` to
//!
//! ```text
//! μ⁺ = prox_{A⁻¹, g}(μ̃ - A ∇f(μ̃)),   A = θ Γ(μ̃)
//! ```
//!
//! where `Γ = (∇²f(μ̃))⁻¹` when the Hessian is positive definite and the
//! scale of the generating proposal otherwise. `θ` starts at 1 and shrinks by
//! `τ` until the unnormalized log target strictly increases.

use nalgebra::{DMatrix, DVector};

use crate::config::{CovarianceMode, SamplerConfig};
use crate::error::Result;
use crate::proposal::Proposal;
use crate::prox::prox_in_metric;
use crate::spd::{checked_cholesky, SpdMatrix};
use crate::targets::TargetModel;

/// Regularization added to the weighted empirical covariance.
pub const ROBUST_COV_JITTER: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingSource {
    InverseHessian,
    /// The Hessian was not positive definite; the proposal scale was used.
    ProposalScale,
}

/// `Γ(μ̃)`: inverse Hessian if `∇²f(μ̃) ≻ 0`, else `Σ̃`.
pub fn newton_scaling(
    mu_tilde: &DVector<f64>,
    sigma_tilde: &SpdMatrix,
    target: &TargetModel,
) -> (SpdMatrix, ScalingSource) {
    let h = target.hess_f(mu_tilde);
    let h = (&h + h.transpose()) * 0.5;
    if checked_cholesky(&h).is_some() {
        if let Ok(hs) = SpdMatrix::new(h) {
            if let Ok(gamma) = SpdMatrix::new(hs.inverse().clone()) {
                return (gamma, ScalingSource::InverseHessian);
            }
        }
    }
    (sigma_tilde.clone(), ScalingSource::ProposalScale)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Backtrack {
    pub theta: f64,
    pub mean: DVector<f64>,
    pub accepted: bool,
    pub steps: usize,
    pub dfb_nonconverged: usize,
}

/// Tries `θ = 1, τ, τ², …` and accepts the first candidate with
/// `log π(μ⁺) > log π(μ̃)`. After `max_steps` rejections `μ̃` is returned
/// together with the last `θ` tried. A non-finite candidate counts as a
/// rejection.
pub fn backtrack<F>(
    mu_tilde: &DVector<f64>,
    target: &TargetModel,
    tau: f64,
    max_steps: usize,
    mut candidate: F,
) -> Result<Backtrack>
where
    F: FnMut(f64) -> Result<Option<(DVector<f64>, bool)>>,
{
    let reference = target.log_pi_unnorm(mu_tilde);
    let mut theta = 1.0;
    let mut last = theta;
    let mut nonconverged = 0;
    for step in 0..max_steps {
        last = theta;
        if let Some((mu_new, converged)) = candidate(theta)? {
            if !converged {
                nonconverged += 1;
            }
            if mu_new.iter().all(|v| v.is_finite()) && target.log_pi_unnorm(&mu_new) > reference {
                return Ok(Backtrack {
                    theta,
                    mean: mu_new,
                    accepted: true,
                    steps: step + 1,
                    dfb_nonconverged: nonconverged,
                });
            }
        }
        theta *= tau;
    }
    Ok(Backtrack {
        theta: last,
        mean: mu_tilde.clone(),
        accepted: false,
        steps: max_steps,
        dfb_nonconverged: nonconverged,
    })
}

/// Backtracked proximal Newton step with metric `A = θ Γ`, the metric prox
/// computed by dual forward-backward.
pub fn backtrack_theta(
    mu_tilde: &DVector<f64>,
    gamma: &SpdMatrix,
    target: &TargetModel,
    cfg: &SamplerConfig,
) -> Result<Backtrack> {
    let grad = target.grad_f(mu_tilde);
    let direction = gamma.matrix() * &grad;
    // the eigendecomposition is shared by every θ
    let _ = gamma.sqrt();
    let _ = gamma.inv_sqrt();
    backtrack(
        mu_tilde,
        target,
        cfg.backtracking.tau,
        cfg.backtracking.max_steps,
        |theta| {
            let xi = mu_tilde - &direction * theta;
            if xi.iter().any(|v| !v.is_finite()) {
                return Ok(None);
            }
            let a = gamma.scaled(theta)?;
            let out = prox_in_metric(
                target.nonsmooth(),
                &a,
                &xi,
                cfg.dfb.tolerance,
                cfg.dfb.max_iterations,
            )?;
            Ok(Some((out.point, out.converged)))
        },
    )
}

/// Backtracked identity-metric proximal gradient step,
/// `μ⁺ = prox_{θg}(μ̃ - θ ∇f(μ̃))`.
pub fn backtrack_grad(mu_tilde: &DVector<f64>, target: &TargetModel, cfg: &SamplerConfig) -> Result<Backtrack> {
    let grad = target.grad_f(mu_tilde);
    backtrack(
        mu_tilde,
        target,
        cfg.backtracking.tau,
        cfg.backtracking.max_steps,
        |theta| {
            let xi = mu_tilde - &grad * theta;
            if xi.iter().any(|v| !v.is_finite()) {
                return Ok(None);
            }
            Ok(Some((target.prox_g(&xi, theta), true)))
        },
    )
}

/// Weighted empirical covariance of a pool (weights normalized within the
/// pool) plus [`ROBUST_COV_JITTER`]` · I`.
pub fn robust_covariance(points: &[DVector<f64>], weights: &[f64]) -> Result<Option<SpdMatrix>> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) || points.is_empty() {
        return Ok(None);
    }
    let d = points[0].len();
    let mean = points
        .iter()
        .zip(weights)
        .fold(DVector::zeros(d), |acc, (x, w)| acc + x * (*w / total));
    let mut cov = DMatrix::<f64>::identity(d, d) * ROBUST_COV_JITTER;
    for (x, w) in points.iter().zip(weights) {
        let r = x - &mean;
        cov += &r * r.transpose() * (*w / total);
    }
    Ok(Some(SpdMatrix::new(cov)?))
}

/// Outcome of adapting one proposal.
#[derive(Debug, Clone, PartialEq)]
pub struct Adapted {
    pub proposal: Proposal,
    pub backtrack: Backtrack,
    pub scaling: Option<ScalingSource>,
}

/// The pool (samples and weights) of the proposal that generated `μ̃`.
pub type Pool<'a> = (&'a [DVector<f64>], &'a [f64]);

fn next_covariance(
    cfg: &SamplerConfig,
    dim: usize,
    theta: f64,
    gamma: Option<&SpdMatrix>,
    sigma_tilde: &SpdMatrix,
    pool: Pool<'_>,
) -> Result<SpdMatrix> {
    match cfg.covariance_mode {
        CovarianceMode::Fixed => SpdMatrix::scaled_identity(dim, cfg.init_sigma * cfg.init_sigma),
        CovarianceMode::Robust => Ok(robust_covariance(pool.0, pool.1)?.unwrap_or_else(|| sigma_tilde.clone())),
        CovarianceMode::Newton => gamma.expect("Newton covariance needs Γ").scaled(theta),
    }
}

/// Proximal Newton adaptation: mean from [`backtrack_theta`], covariance per
/// `cfg.covariance_mode` (`θΓ` for the Newton mode).
pub fn adapt_proposal_newton(
    mu_tilde: &DVector<f64>,
    sigma_tilde: &SpdMatrix,
    target: &TargetModel,
    cfg: &SamplerConfig,
    pool: Pool<'_>,
) -> Result<Adapted> {
    let (gamma, source) = newton_scaling(mu_tilde, sigma_tilde, target);
    let bt = backtrack_theta(mu_tilde, &gamma, target, cfg)?;
    let sigma = next_covariance(cfg, mu_tilde.len(), bt.theta, Some(&gamma), sigma_tilde, pool)?;
    Ok(Adapted {
        proposal: Proposal::new(bt.mean.clone(), sigma)?,
        backtrack: bt,
        scaling: Some(source),
    })
}

/// Proximal gradient adaptation. Under the Newton covariance mode the
/// covariance is `θ Γ(μ̃)` with the gradient step's accepted `θ`.
pub fn adapt_proposal_grad(
    mu_tilde: &DVector<f64>,
    sigma_tilde: &SpdMatrix,
    target: &TargetModel,
    cfg: &SamplerConfig,
    pool: Pool<'_>,
) -> Result<Adapted> {
    let bt = backtrack_grad(mu_tilde, target, cfg)?;
    let scaling = (cfg.covariance_mode == CovarianceMode::Newton)
        .then(|| newton_scaling(mu_tilde, sigma_tilde, target));
    let sigma = next_covariance(
        cfg,
        mu_tilde.len(),
        bt.theta,
        scaling.as_ref().map(|s| &s.0),
        sigma_tilde,
        pool,
    )?;
    Ok(Adapted {
        proposal: Proposal::new(bt.mean.clone(), sigma)?,
        backtrack: bt,
        scaling: scaling.map(|s| s.1),
    })
}
