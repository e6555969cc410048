//! Built-in ablation grids.

use pnais::{AdaptationMode, CovarianceMode, SamplerConfig};

use crate::spec::{Cell, ExperimentSpec, Quantity, TargetSpec, TruthSource};

pub const DM_PMC_SIGMAS: [f64; 3] = [1.0, 3.0, 5.0];
pub const TABLE_S4_DIMS: [usize; 3] = [2, 10, 50];

/// Names of the nine ablation cells, in table order.
pub fn ablation_methods() -> Vec<String> {
    let mut names: Vec<String> = DM_PMC_SIGMAS.iter().map(|s| format!("dm-pmc-s{s}")).collect();
    for family in ["pnais-grad", "pnais"] {
        for cov in ["nocov", "rcov", "eq13"] {
            names.push(format!("{family}-{cov}"));
        }
    }
    names
}

/// DM-PMC at σ ∈ {1, 3, 5}, then PNAIS-grad and PNAIS each with the fixed,
/// robust and Newton covariance; everything else at the defaults.
pub fn ablation_cells() -> Vec<Cell> {
    let base = SamplerConfig::default();
    let mut cells: Vec<Cell> = DM_PMC_SIGMAS
        .iter()
        .map(|&s| Cell {
            method: format!("dm-pmc-s{s}"),
            config: SamplerConfig {
                adaptation_mode: AdaptationMode::None,
                covariance_mode: CovarianceMode::Fixed,
                init_sigma: s,
                ..base.clone()
            },
        })
        .collect();
    for (family, mode) in [("pnais-grad", AdaptationMode::ProxGrad), ("pnais", AdaptationMode::ProxNewton)] {
        for (cov, cm) in [
            ("nocov", CovarianceMode::Fixed),
            ("rcov", CovarianceMode::Robust),
            ("eq13", CovarianceMode::Newton),
        ] {
            cells.push(Cell {
                method: format!("{family}-{cov}"),
                config: SamplerConfig {
                    adaptation_mode: mode,
                    covariance_mode: cm,
                    ..base.clone()
                },
            });
        }
    }
    cells
}

pub fn table2(target: TargetSpec, n_runs: usize, base_seed: u64) -> ExperimentSpec {
    ExperimentSpec {
        name: format!("table2-{}", target.id()),
        target,
        cells: ablation_cells(),
        n_runs,
        base_seed,
        ground_truth: TruthSource::Grid,
        grid_resolution: None,
        quantities: vec![Quantity::Mean, Quantity::SecondMoment, Quantity::Z],
        first_coordinate: 0,
    }
}

/// Example C at dimension `dim`; only the mean of coordinates 2..d is scored.
pub fn table_s4(dim: usize, n_runs: usize, base_seed: u64) -> ExperimentSpec {
    ExperimentSpec {
        name: format!("tableS4-d{dim}"),
        target: TargetSpec::ExampleC {
            dim,
            b: pnais::targets::BANANA_DEFAULT_B,
            eta: pnais::targets::BANANA_DEFAULT_ETA,
        },
        cells: ablation_cells(),
        n_runs,
        base_seed,
        ground_truth: TruthSource::Grid,
        grid_resolution: None,
        quantities: vec![Quantity::Mean],
        first_coordinate: 1,
    }
}
