//! Ground-truth resolution for a spec.

use std::path::Path;

use pnais::targets::{banana_reference, grid_ground_truth, BananaNll};
use pnais::GroundTruth;

use crate::error::{BenchError, Result};
use crate::spec::{ExperimentSpec, TargetSpec, TruthSource};

/// Fine enough that the O(h) edge bias on the simplex stays well below the
/// errors being measured.
pub const DEFAULT_GRID_RESOLUTION: usize = 4000;
pub const DEFAULT_BANANA_RESOLUTION: usize = 2000;

pub fn compute(target: &TargetSpec, resolution: Option<usize>) -> Result<GroundTruth> {
    let gt = match *target {
        TargetSpec::ExampleC { dim, b, eta } => {
            let banana = BananaNll::new(dim, b, eta)?;
            let mut gt = banana_reference(&banana, resolution.unwrap_or(DEFAULT_BANANA_RESOLUTION))?;
            gt.target = target.id();
            gt
        }
        _ => {
            let bounds = target.grid_bounds().expect("2-D target");
            grid_ground_truth(&target.build()?, bounds, resolution.unwrap_or(DEFAULT_GRID_RESOLUTION))?
        }
    };
    Ok(gt)
}

pub fn load(path: &Path) -> Result<GroundTruth> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| BenchError::Config(format!("{}: malformed ground truth: {e}", path.display())))
}

pub fn write(gt: &GroundTruth, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(gt).expect("ground truth serializes");
    std::fs::write(path, text + "\n").map_err(|e| BenchError::io(path, e))
}

pub fn resolve(spec: &ExperimentSpec) -> Result<GroundTruth> {
    let gt = match &spec.ground_truth {
        TruthSource::Grid => compute(&spec.target, spec.grid_resolution)?,
        TruthSource::File(p) => load(p)?,
    };
    let dim = spec.target.build()?.dim();
    if gt.mean.len() != dim || gt.second_moment.len() != dim {
        return Err(BenchError::Config(format!(
            "ground truth has dimension {}, target has {dim}",
            gt.mean.len()
        )));
    }
    Ok(gt)
}
