//! The full adaptive loop: sample, weight, resample, adapt.

use std::time::Instant;

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adapt::{adapt_proposal_grad, adapt_proposal_newton, Adapted, ScalingSource};
use super::estimate::{snis_mean, snis_second_moment, z_hat};
use super::resample::{resample_global, resample_glocal, resample_local, ResampledSet};
use super::weighting::weight_samples;
use crate::config::{AdaptationMode, ResamplingMode, SamplerConfig};
use crate::error::{Error, Result};
use crate::proposal::{gaussian_sample, Proposal};
use crate::rng::{substream, StreamTag};
use crate::sample::WeightedSample;
use crate::spd::SpdMatrix;
use crate::targets::TargetModel;

/// Glocal convention recorded in every run summary.
pub const GLR_CONVENTION: &str = "global step when t mod glr_period == 0 (t is 1-based)";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunDiagnostics {
    /// Iterations whose `N K` weights were all zero.
    pub degenerate_iterations: usize,
    pub global_resampling_iterations: Vec<usize>,
    pub adaptations: usize,
    pub backtrack_exhausted: usize,
    pub hessian_fallbacks: usize,
    pub dfb_nonconverged: usize,
    /// Local-resampling slots skipped because their pool had zero weight.
    pub empty_pools: usize,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub samples: Vec<WeightedSample>,
    pub mean: DVector<f64>,
    pub second_moment: DVector<f64>,
    pub z: f64,
    pub final_proposals: Vec<Proposal>,
    pub diagnostics: RunDiagnostics,
    pub wall_time_s: f64,
}

/// JSON-friendly digest of a [`RunResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub target: String,
    pub config: SamplerConfig,
    pub mean: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub z: f64,
    pub n_samples: usize,
    #[serde(default)]
    pub wall_time_s: Option<f64>,
    pub degenerate_iterations: usize,
    pub diagnostics: RunDiagnostics,
    pub glr_convention: String,
}

impl RunResult {
    pub fn summary(&self, target: &TargetModel, cfg: &SamplerConfig, with_timing: bool) -> RunSummary {
        RunSummary {
            target: target.id.clone(),
            config: cfg.clone(),
            mean: self.mean.iter().copied().collect(),
            second_moment: self.second_moment.iter().copied().collect(),
            z: self.z,
            n_samples: self.samples.len(),
            wall_time_s: with_timing.then_some(self.wall_time_s),
            degenerate_iterations: self.diagnostics.degenerate_iterations,
            diagnostics: self.diagnostics.clone(),
            glr_convention: GLR_CONVENTION.into(),
        }
    }
}

pub fn initial_proposals(target: &TargetModel, cfg: &SamplerConfig) -> Result<Vec<Proposal>> {
    let d = target.dim();
    let (lo, hi) = cfg.init_box;
    let sigma = SpdMatrix::scaled_identity(d, cfg.init_sigma * cfg.init_sigma)?;
    (0..cfg.n_proposals)
        .map(|n| {
            let mut rng = substream(cfg.seed, StreamTag::Init, n as u64, 0, 0);
            let mu = DVector::from_fn(d, |_, _| rng.random_range(lo..hi));
            Proposal::new(mu, sigma.clone())
        })
        .collect()
}

fn draw_iteration(proposals: &[Proposal], cfg: &SamplerConfig, t: usize) -> Vec<Vec<DVector<f64>>> {
    proposals
        .par_iter()
        .enumerate()
        .map(|(n, p)| {
            (0..cfg.samples_per_proposal)
                .map(|k| {
                    let mut rng = substream(cfg.seed, StreamTag::Sample, t as u64, n as u64, k as u64);
                    gaussian_sample(p, &mut rng)
                })
                .collect()
        })
        .collect()
}

fn resample(
    cfg: &SamplerConfig,
    t: usize,
    samples: &[Vec<DVector<f64>>],
    weights: &[Vec<f64>],
    proposals: &[Proposal],
) -> Result<(ResampledSet, bool)> {
    let mut rng = substream(cfg.seed, StreamTag::Resample, t as u64, 0, 0);
    match cfg.resampling_mode {
        ResamplingMode::Global => Ok((resample_global(samples, weights, proposals, &mut rng)?, true)),
        ResamplingMode::Local => Ok((resample_local(samples, weights, proposals, &mut rng)?, false)),
        ResamplingMode::Glocal => resample_glocal(t, cfg.glr_period, samples, weights, proposals, &mut rng),
    }
}

/// Runs the sampler, calling `observer(t, proposals)` with the proposals
/// used at every iteration `t = 1..=T` and finally with `t = T + 1`.
pub fn run_sampler_with(
    target: &TargetModel,
    cfg: &SamplerConfig,
    observer: &mut dyn FnMut(usize, &[Proposal]),
) -> Result<RunResult> {
    cfg.validate()?;
    let start = Instant::now();
    let mut proposals = initial_proposals(target, cfg)?;
    let mut all = Vec::with_capacity(cfg.budget());
    let mut diag = RunDiagnostics::default();

    for t in 1..=cfg.n_iterations {
        observer(t, &proposals);
        let samples = draw_iteration(&proposals, cfg, t);
        let weights = match weight_samples(&samples, &proposals, target) {
            Ok(w) => Some(w),
            Err(Error::DegenerateWeights) => None,
            Err(e) => return Err(e),
        };
        for (n, row) in samples.iter().enumerate() {
            for (k, x) in row.iter().enumerate() {
                let w = weights.as_ref().map_or(0.0, |w| w[n][k]);
                all.push(WeightedSample::new(x.clone(), w, n + 1, t)?);
            }
        }
        // a degenerate iteration keeps the proposals and draws again
        let Some(weights) = weights else {
            diag.degenerate_iterations += 1;
            continue;
        };
        if cfg.adaptation_mode == AdaptationMode::None {
            continue;
        }

        let (set, global) = resample(cfg, t, &samples, &weights, &proposals)?;
        if global {
            diag.global_resampling_iterations.push(t);
        }
        let adapted: Vec<Option<Adapted>> = set
            .slots
            .par_iter()
            .map(|slot| {
                let Some(r) = slot else { return Ok(None) };
                let pool = (samples[r.origin].as_slice(), weights[r.origin].as_slice());
                let a = match cfg.adaptation_mode {
                    AdaptationMode::ProxNewton => adapt_proposal_newton(&r.mean, &r.sigma, target, cfg, pool)?,
                    AdaptationMode::ProxGrad => adapt_proposal_grad(&r.mean, &r.sigma, target, cfg, pool)?,
                    AdaptationMode::None => unreachable!(),
                };
                Ok(Some(a))
            })
            .collect::<Result<_>>()?;
        for (p, a) in proposals.iter_mut().zip(adapted) {
            match a {
                Some(a) => {
                    diag.adaptations += 1;
                    diag.backtrack_exhausted += usize::from(!a.backtrack.accepted);
                    diag.dfb_nonconverged += a.backtrack.dfb_nonconverged;
                    diag.hessian_fallbacks += usize::from(a.scaling == Some(ScalingSource::ProposalScale));
                    *p = a.proposal;
                }
                None => diag.empty_pools += 1,
            }
        }
    }
    observer(cfg.n_iterations + 1, &proposals);

    let mean = snis_mean(&all)?;
    let second_moment = snis_second_moment(&all)?;
    let z = z_hat(&all);
    Ok(RunResult {
        samples: all,
        mean,
        second_moment,
        z,
        final_proposals: proposals,
        diagnostics: diag,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

pub fn run_sampler(target: &TargetModel, cfg: &SamplerConfig) -> Result<RunResult> {
    run_sampler_with(target, cfg, &mut |_, _| {})
}
