//! Experiment specifications (JSON).

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use pnais::rng::{derive_seed, hash_str};
use pnais::targets::{self, Bounds};
use pnais::{SamplerConfig, TargetModel};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TargetSpec {
    ExampleA,
    ExampleB,
    ExampleC {
        dim: usize,
        #[serde(default = "default_b")]
        b: f64,
        #[serde(default = "default_eta")]
        eta: f64,
    },
}

fn default_b() -> f64 {
    targets::BANANA_DEFAULT_B
}

fn default_eta() -> f64 {
    targets::BANANA_DEFAULT_ETA
}

impl TargetSpec {
    pub fn build(&self) -> pnais::Result<TargetModel> {
        match *self {
            Self::ExampleA => Ok(targets::make_example_a()),
            Self::ExampleB => Ok(targets::make_example_b()),
            Self::ExampleC { dim, b, eta } => targets::make_example_c(dim, b, eta),
        }
    }

    pub fn id(&self) -> String {
        match self {
            Self::ExampleA => "example-a".into(),
            Self::ExampleB => "example-b".into(),
            Self::ExampleC { dim, .. } => format!("example-c-d{dim}"),
        }
    }

    /// Integration box for the 2-D grid targets.
    pub fn grid_bounds(&self) -> Option<Bounds> {
        match self {
            Self::ExampleA => Some(Bounds::square(-0.5, 1.5)),
            Self::ExampleB => Some(Bounds::square(-2.0, 3.0)),
            Self::ExampleC { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruthSource {
    /// Deterministic integration (grid for 2-D targets, the two-variable
    /// reduction for the banana).
    Grid,
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Mean,
    SecondMoment,
    Z,
}

impl Quantity {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Mean => "mean",
            Self::SecondMoment => "second_moment",
            Self::Z => "z",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "mean" => Some(Self::Mean),
            "second_moment" => Some(Self::SecondMoment),
            "z" => Some(Self::Z),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cell {
    pub method: String,
    #[serde(default)]
    pub config: SamplerConfig,
}

fn default_runs() -> usize {
    100
}

fn default_quantities() -> Vec<Quantity> {
    vec![Quantity::Mean, Quantity::SecondMoment, Quantity::Z]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub name: String,
    pub target: TargetSpec,
    pub cells: Vec<Cell>,
    #[serde(default = "default_runs")]
    pub n_runs: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_truth")]
    pub ground_truth: TruthSource,
    /// Resolution of the deterministic ground truth; per-target default if unset.
    #[serde(default)]
    pub grid_resolution: Option<usize>,
    #[serde(default = "default_quantities")]
    pub quantities: Vec<Quantity>,
    /// Moment coordinates before this index are left out of the error.
    #[serde(default)]
    pub first_coordinate: usize,
}

fn default_truth() -> TruthSource {
    TruthSource::Grid
}

impl ExperimentSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| BenchError::Config(format!("malformed spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(BenchError::Config(m));
        if self.n_runs == 0 {
            return bad("n_runs must be >= 1".into());
        }
        if self.cells.is_empty() {
            return bad("spec has no cells".into());
        }
        if self.quantities.is_empty() {
            return bad("spec has no quantities".into());
        }
        let mut seen = HashSet::new();
        for c in &self.cells {
            if !seen.insert(c.method.as_str()) {
                return bad(format!("duplicate method name {:?}", c.method));
            }
            c.config
                .validate()
                .map_err(|e| BenchError::Config(format!("cell {:?}: {e}", c.method)))?;
        }
        let target = self.target.build().map_err(|e| BenchError::Config(e.to_string()))?;
        if self.first_coordinate >= target.dim() {
            return bad(format!("first_coordinate {} out of range", self.first_coordinate));
        }
        Ok(())
    }

    pub fn cell(&self, method: &str) -> Option<&Cell> {
        self.cells.iter().find(|c| c.method == method)
    }
}

/// Seed of run `run_index` of a cell; independent of the other cells.
pub fn cell_seed(base_seed: u64, method: &str, run_index: usize) -> u64 {
    derive_seed(&[base_seed, hash_str(method), run_index as u64])
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"target": {"id": "example-a"}, "cells": [{"method": "m"}]}"#;

    #[test]
    fn defaults_fill_in() {
        let s = ExperimentSpec::from_json(MINIMAL).unwrap();
        assert_eq!(s.n_runs, 100);
        assert_eq!(s.ground_truth, TruthSource::Grid);
        assert_eq!(s.quantities.len(), 3);
        assert_eq!(s.cells[0].config, SamplerConfig::default());
    }

    #[test]
    fn truth_file_and_banana_params() {
        let s = ExperimentSpec::from_json(
            r#"{"target": {"id": "example-c", "dim": 10}, "cells": [{"method": "m"}],
                "ground_truth": {"file": "gt.json"}, "first_coordinate": 1}"#,
        )
        .unwrap();
        assert_eq!(s.ground_truth, TruthSource::File("gt.json".into()));
        assert_eq!(s.target, TargetSpec::ExampleC { dim: 10, b: 3.0, eta: 1.0 });
        assert_eq!(s.target.id(), "example-c-d10");
    }

    #[test]
    fn rejects_bad_specs() {
        for text in [
            r#"{"target": {"id": "example-a"}, "cells": [{"method": "m"}, {"method": "m"}]}"#,
            r#"{"target": {"id": "example-a"}, "cells": [{"method": "m"}], "n_runs": 0}"#,
            r#"{"target": {"id": "example-a"}, "cells": []}"#,
            r#"{"target": {"id": "example-z"}, "cells": [{"method": "m"}]}"#,
            r#"{"target": {"id": "example-a"}, "cells": [{"method": "m", "config": {"n_proposals": 0}}]}"#,
            r#"{"target": {"id": "example-a"}, "cells": [{"method": "m", "config": {"typo": 1}}]}"#,
            r#"{"target": {"id": "example-a"}, "cells": [{"method": "m"}], "first_coordinate": 2}"#,
            "not json",
        ] {
            assert!(matches!(ExperimentSpec::from_json(text), Err(BenchError::Config(_))), "{text}");
        }
    }

    #[test]
    fn cell_seeds_are_isolated() {
        assert_eq!(cell_seed(0, "a", 3), cell_seed(0, "a", 3));
        assert_ne!(cell_seed(0, "a", 3), cell_seed(0, "b", 3));
        assert_ne!(cell_seed(0, "a", 3), cell_seed(0, "a", 4));
        assert_ne!(cell_seed(0, "a", 3), cell_seed(1, "a", 3));
    }
}
