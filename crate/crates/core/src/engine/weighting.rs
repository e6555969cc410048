//! Importance weights.
//!
//! DM-MIS divides the target by the equal-weight mixture of all proposals of
//! the iteration; s-MIS divides by the proposal that generated the sample.

use std::f64::consts::PI;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::proposal::{gaussian_log_density, Proposal};
use crate::targets::TargetModel;

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `log ψ(x)` with `ψ = (1/N) Σᵢ qᵢ`.
pub fn log_mixture_density(x: &DVector<f64>, proposals: &[Proposal]) -> Result<f64> {
    let logs = proposals
        .iter()
        .map(|p| gaussian_log_density(x, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(log_sum_exp(&logs) - (proposals.len() as f64).ln())
}

/// Same as [`log_mixture_density`] without per-call allocation; `consts`
/// holds `-½(d log 2π + log|Σᵢ|)` for each proposal.
fn log_mixture_density_fast(
    x: &DVector<f64>,
    proposals: &[Proposal],
    consts: &[f64],
    logs: &mut Vec<f64>,
    buf: &mut Vec<f64>,
) -> Result<f64> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("density argument"));
    }
    logs.clear();
    for (p, c) in proposals.iter().zip(consts) {
        if p.dim() != x.len() {
            return Err(Error::DimensionMismatch {
                expected: p.dim(),
                got: x.len(),
            });
        }
        logs.push(c - 0.5 * p.sigma.mahalanobis_sq(x, &p.mu, buf));
    }
    Ok(log_sum_exp(logs) - (proposals.len() as f64).ln())
}

fn ratio(log_pi: f64, log_q: f64) -> Result<f64> {
    if log_pi == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    let w = (log_pi - log_q).exp();
    if !w.is_finite() {
        return Err(Error::InvalidWeight(w));
    }
    Ok(w)
}

/// DM-MIS weights `π(x) / ψ(x)` for a flat list of points.
pub fn dm_weights(points: &[DVector<f64>], proposals: &[Proposal], target: &TargetModel) -> Result<Vec<f64>> {
    let consts: Vec<f64> = proposals
        .iter()
        .map(|p| -0.5 * (p.dim() as f64 * (2.0 * PI).ln() + p.sigma.log_det()))
        .collect();
    let mut logs = Vec::with_capacity(proposals.len());
    let mut buf = Vec::new();
    points
        .iter()
        .map(|x| {
            let lp = target.log_pi_unnorm(x);
            if lp == f64::NEG_INFINITY {
                return Ok(0.0);
            }
            ratio(lp, log_mixture_density_fast(x, proposals, &consts, &mut logs, &mut buf)?)
        })
        .collect()
}

/// DM-MIS weights for the `N × K` samples of one iteration; row `n` holds
/// the samples of proposal `n`.
pub fn weight_samples(
    samples: &[Vec<DVector<f64>>],
    proposals: &[Proposal],
    target: &TargetModel,
) -> Result<Vec<Vec<f64>>> {
    use rayon::prelude::*;
    let weights = samples
        .par_iter()
        .map(|row| dm_weights(row, proposals, target))
        .collect::<Result<Vec<_>>>()?;
    if weights.iter().flatten().all(|&w| w == 0.0) {
        return Err(Error::DegenerateWeights);
    }
    Ok(weights)
}

/// s-MIS weights `π(x) / q_n(x)`.
pub fn standard_mis_weights(
    samples: &[Vec<DVector<f64>>],
    proposals: &[Proposal],
    target: &TargetModel,
) -> Result<Vec<Vec<f64>>> {
    samples
        .iter()
        .zip(proposals)
        .map(|(row, p)| {
            row.iter()
                .map(|x| ratio(target.log_pi_unnorm(x), gaussian_log_density(x, p)?))
                .collect()
        })
        .collect()
}
