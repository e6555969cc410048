//! Benchmark harness for the `pnais` sampler: JSON experiment specs, repeated
//! independent runs per ablation cell, relative-MSE reports in CSV and JSON,
//! and the `pnais` command-line tool.

pub mod builtin;
pub mod cli;
pub mod error;
pub mod report;
pub mod spec;
pub mod sweep;
pub mod truth;

pub use error::{BenchError, Result};
pub use report::ReportRow;
pub use spec::{Cell, ExperimentSpec, Quantity, TargetSpec, TruthSource};
pub use sweep::{run_sweep, CellResult, RunOutcome, SweepOptions};
