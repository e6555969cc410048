//! Independent runs of every cell of a spec.

use std::time::Instant;

use pnais::{run_sampler, ResamplingMode, SamplerConfig, TargetModel};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};
use crate::spec::{cell_seed, Cell, ExperimentSpec};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "PNAIS_WORKERS";

/// A cell diverges when any run fails or has non-finite estimates, or when
/// more than this share of a run's iterations were degenerate.
pub const MAX_DEGENERATE_SHARE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub run_index: usize,
    pub seed: u64,
    pub mean: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub z: f64,
    pub degenerate_iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl RunOutcome {
    fn diverged(&self, n_iterations: usize) -> bool {
        self.error.is_some()
            || !self.z.is_finite()
            || self.mean.iter().chain(&self.second_moment).any(|v| !v.is_finite())
            || self.degenerate_iterations as f64 > MAX_DEGENERATE_SHARE * n_iterations as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub method: String,
    pub config: SamplerConfig,
    pub diverged: bool,
    pub runs: Vec<RunOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct SweepOptions {
    pub workers: Option<usize>,
    pub resampling: Option<ResamplingMode>,
    pub n_runs: Option<usize>,
    pub timing: bool,
}

pub fn worker_count(requested: Option<usize>) -> usize {
    requested
        .or_else(|| std::env::var(WORKERS_ENV).ok().and_then(|v| v.parse().ok()))
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn run_one(target: &TargetModel, spec: &ExperimentSpec, cell: &Cell, run_index: usize, timing: bool) -> RunOutcome {
    let seed = cell_seed(spec.base_seed, &cell.method, run_index);
    let cfg = SamplerConfig { seed, ..cell.config.clone() };
    let start = Instant::now();
    let res = run_sampler(target, &cfg);
    let wall = timing.then(|| start.elapsed().as_secs_f64());
    match res {
        Ok(r) => RunOutcome {
            run_index,
            seed,
            mean: r.mean.iter().copied().collect(),
            second_moment: r.second_moment.iter().copied().collect(),
            z: r.z,
            degenerate_iterations: r.diagnostics.degenerate_iterations,
            error: None,
            wall_time_s: wall,
        },
        Err(e) => RunOutcome {
            run_index,
            seed,
            mean: vec![],
            second_moment: vec![],
            z: f64::NAN,
            degenerate_iterations: cfg.n_iterations,
            error: Some(e.to_string()),
            wall_time_s: wall,
        },
    }
}

fn run_cell(target: &TargetModel, spec: &ExperimentSpec, cell: &Cell, n_runs: usize, timing: bool) -> CellResult {
    let start = Instant::now();
    let runs: Vec<RunOutcome> = (0..n_runs)
        .into_par_iter()
        .map(|r| run_one(target, spec, cell, r, timing))
        .collect();
    let diverged = runs.iter().any(|r| r.diverged(cell.config.n_iterations));
    CellResult {
        method: cell.method.clone(),
        config: cell.config.clone(),
        diverged,
        runs,
        wall_time_s: timing.then(|| start.elapsed().as_secs_f64()),
    }
}

/// Applies command-line overrides to a spec.
pub fn apply_overrides(spec: &ExperimentSpec, opts: &SweepOptions) -> ExperimentSpec {
    let mut spec = spec.clone();
    if let Some(mode) = opts.resampling {
        for c in &mut spec.cells {
            c.config.resampling_mode = mode;
        }
    }
    if let Some(n) = opts.n_runs {
        spec.n_runs = n;
    }
    spec
}

pub fn run_sweep(spec: &ExperimentSpec, opts: &SweepOptions) -> Result<Vec<CellResult>> {
    let spec = apply_overrides(spec, opts);
    spec.validate()?;
    let target = spec.target.build()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(opts.workers))
        .build()
        .map_err(|e| BenchError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        spec.cells
            .iter()
            .map(|c| run_cell(&target, &spec, c, spec.n_runs, opts.timing))
            .collect()
    }))
}
