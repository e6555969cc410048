//! Global, local and glocal resampling of proposal locations.

use nalgebra::DVector;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Error, Result};
use crate::proposal::Proposal;
use crate::spd::SpdMatrix;

/// A resampled location together with the scale of the proposal that
/// generated it. `origin` and `sample` index the `N × K` pool (0-based).
#[derive(Debug, Clone, PartialEq)]
pub struct ResampledProposal {
    pub mean: DVector<f64>,
    pub sigma: SpdMatrix,
    pub origin: usize,
    pub sample: usize,
}

/// One slot per proposal. A slot is `None` when local resampling meets a
/// pool whose weights are all zero; that proposal is carried over unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct ResampledSet {
    pub slots: Vec<Option<ResampledProposal>>,
}

fn pick(
    samples: &[Vec<DVector<f64>>],
    proposals: &[Proposal],
    n: usize,
    k: usize,
) -> ResampledProposal {
    ResampledProposal {
        mean: samples[n][k].clone(),
        sigma: proposals[n].sigma.clone(),
        origin: n,
        sample: k,
    }
}

/// `N` multinomial draws from the pool of all `N K` samples.
pub fn resample_global<R: Rng + ?Sized>(
    samples: &[Vec<DVector<f64>>],
    weights: &[Vec<f64>],
    proposals: &[Proposal],
    rng: &mut R,
) -> Result<ResampledSet> {
    let k = samples.first().map_or(0, Vec::len);
    let flat: Vec<f64> = weights.iter().flatten().copied().collect();
    let dist = WeightedIndex::new(&flat).map_err(|_| Error::DegenerateWeights)?;
    let slots = (0..proposals.len())
        .map(|_| {
            let idx = dist.sample(rng);
            Some(pick(samples, proposals, idx / k, idx % k))
        })
        .collect();
    Ok(ResampledSet { slots })
}

/// One draw from each proposal's own pool of `K` samples.
pub fn resample_local<R: Rng + ?Sized>(
    samples: &[Vec<DVector<f64>>],
    weights: &[Vec<f64>],
    proposals: &[Proposal],
    rng: &mut R,
) -> Result<ResampledSet> {
    if weights.iter().flatten().all(|&w| w == 0.0) {
        return Err(Error::DegenerateWeights);
    }
    let slots = weights
        .iter()
        .enumerate()
        .map(|(n, row)| {
            if row.len() == 1 {
                return (row[0] > 0.0).then(|| pick(samples, proposals, n, 0));
            }
            WeightedIndex::new(row)
                .ok()
                .map(|dist| pick(samples, proposals, n, dist.sample(rng)))
        })
        .collect();
    Ok(ResampledSet { slots })
}

/// Glocal convention: the global step fires when `t mod Δ = 0` (1-based `t`).
pub fn is_global_step(iteration: usize, period: usize) -> bool {
    period > 0 && iteration % period == 0
}

/// Local resampling, except a global step every `period` iterations. Returns
/// the set and whether the global step was taken.
pub fn resample_glocal<R: Rng + ?Sized>(
    iteration: usize,
    period: usize,
    samples: &[Vec<DVector<f64>>],
    weights: &[Vec<f64>],
    proposals: &[Proposal],
    rng: &mut R,
) -> Result<(ResampledSet, bool)> {
    if period == 0 {
        return Err(Error::InvalidConfig("glr_period must be >= 1".into()));
    }
    if is_global_step(iteration, period) {
        Ok((resample_global(samples, weights, proposals, rng)?, true))
    } else {
        Ok((resample_local(samples, weights, proposals, rng)?, false))
    }
}
