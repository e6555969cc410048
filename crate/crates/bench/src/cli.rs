//! Command-line front end. `run` returns the process exit code.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use pnais::targets::Bounds;
use pnais::{run_sampler, ResamplingMode, SamplerConfig};

use crate::builtin;
use crate::error::{BenchError, Result};
use crate::report::{self, ReportRow};
use crate::spec::{cell_seed, ExperimentSpec, TargetSpec};
use crate::sweep::{self, SweepOptions};
use crate::truth;

#[derive(Debug, Parser)]
#[command(name = "pnais", version, about = "Proximal Newton adaptive importance sampling benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TargetArg {
    ExampleA,
    ExampleB,
    ExampleC,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ResamplingArg {
    Global,
    Local,
    Glocal,
}

impl From<ResamplingArg> for ResamplingMode {
    fn from(r: ResamplingArg) -> Self {
        match r {
            ResamplingArg::Global => Self::Global,
            ResamplingArg::Local => Self::Local,
            ResamplingArg::Glocal => Self::Glocal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum ExampleArg {
    A,
    B,
    Both,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Override the resampling mode of every cell.
    #[arg(long, value_enum)]
    resampling: Option<ResamplingArg>,
    /// Override the number of runs per cell.
    #[arg(long)]
    runs: Option<usize>,
    /// Worker threads (default: $PNAIS_WORKERS, then all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Leave wall times out so repeated sweeps are byte-identical.
    #[arg(long)]
    no_timing: bool,
}

impl SweepArgs {
    fn options(&self) -> SweepOptions {
        SweepOptions {
            workers: self.workers,
            resampling: self.resampling.map(Into::into),
            n_runs: self.runs,
            timing: !self.no_timing,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Deterministic ground truth of a benchmark target, as JSON.
    GroundTruth {
        #[arg(value_enum)]
        target: TargetArg,
        #[arg(long)]
        resolution: Option<usize>,
        /// Integration box `lo0,hi0,lo1,hi1` (2-D targets).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        bounds: Option<Vec<f64>>,
        /// Dimension of the banana target.
        #[arg(long, default_value_t = 10)]
        dim: usize,
        #[arg(long, default_value_t = pnais::targets::BANANA_DEFAULT_B)]
        b: f64,
        #[arg(long, default_value_t = pnais::targets::BANANA_DEFAULT_ETA)]
        eta: f64,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one cell of a spec once and print the run summary as JSON.
    Run {
        spec: PathBuf,
        /// Method name of the cell (default: the first cell).
        #[arg(long)]
        cell: Option<String>,
        #[arg(long, default_value_t = 0)]
        run_index: usize,
        #[arg(long)]
        no_timing: bool,
    },
    /// Run every cell of a spec and write per-cell JSON plus an aggregate report.
    Bench {
        spec: PathBuf,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Built-in Example A/B ablation grid.
    #[command(name = "table2")]
    Table2 {
        #[arg(long, value_enum, default_value_t = ExampleArg::Both)]
        example: ExampleArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Built-in Example C dimension sweep.
    #[command(name = "tableS4")]
    TableS4 {
        #[arg(long, value_delimiter = ',', default_values_t = builtin::TABLE_S4_DIMS)]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        sweep: SweepArgs,
    },
}

fn create_dir(p: &Path) -> Result<()> {
    std::fs::create_dir_all(p).map_err(|e| BenchError::io(p, e))
}

fn file_name(method: &str) -> String {
    method
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Runs a full sweep and writes `truth.json`, `cells/<method>.json`,
/// `report.csv` and `report.json` under `out`.
pub fn execute(spec: &ExperimentSpec, out: &Path, opts: &SweepOptions) -> Result<Vec<ReportRow>> {
    let spec = sweep::apply_overrides(spec, opts);
    spec.validate()?;
    create_dir(&out.join("cells"))?;
    let gt = truth::resolve(&spec)?;
    truth::write(&gt, &out.join("truth.json"))?;
    let cells = sweep::run_sweep(&spec, opts)?;
    for c in &cells {
        report::write_json(c, &out.join("cells").join(format!("{}.json", file_name(&c.method))))?;
    }
    let rows = report::build_rows(&spec, &gt, &cells)?;
    report::write_csv(&rows, &out.join("report.csv"))?;
    report::write_json(&rows, &out.join("report.json"))?;
    Ok(rows)
}

fn print_rows(rows: &[ReportRow]) -> Result<()> {
    print!("{}", report::to_csv_string(rows)?);
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GroundTruth { target, resolution, bounds, dim, b, eta, out } => {
            let spec = match target {
                TargetArg::ExampleA => TargetSpec::ExampleA,
                TargetArg::ExampleB => TargetSpec::ExampleB,
                TargetArg::ExampleC => TargetSpec::ExampleC { dim, b, eta },
            };
            let gt = match (bounds, &spec) {
                (Some(_), TargetSpec::ExampleC { .. }) => {
                    return Err(BenchError::Config("--bounds only applies to 2-D grid targets".into()))
                }
                (Some(v), _) if v.len() != 4 => {
                    return Err(BenchError::Config("--bounds takes four values lo0,hi0,lo1,hi1".into()))
                }
                (Some(v), _) => {
                    let bounds = Bounds { lo: [v[0], v[2]], hi: [v[1], v[3]] };
                    let res = resolution.unwrap_or(truth::DEFAULT_GRID_RESOLUTION);
                    pnais::targets::grid_ground_truth(&spec.build()?, bounds, res)?
                }
                (None, _) => truth::compute(&spec, resolution)?,
            };
            match out {
                Some(p) => truth::write(&gt, &p)?,
                None => println!("{}", serde_json::to_string_pretty(&gt).expect("serializes")),
            }
        }
        Command::Run { spec, cell, run_index, no_timing } => {
            let spec = ExperimentSpec::load(&spec)?;
            let cell = match &cell {
                Some(name) => spec
                    .cell(name)
                    .ok_or_else(|| BenchError::Config(format!("no cell named {name:?}")))?,
                None => &spec.cells[0],
            };
            let cfg = SamplerConfig {
                seed: cell_seed(spec.base_seed, &cell.method, run_index),
                ..cell.config.clone()
            };
            let target = spec.target.build()?;
            let result = run_sampler(&target, &cfg)?;
            let summary = result.summary(&target, &cfg, !no_timing);
            println!("{}", serde_json::to_string_pretty(&summary).expect("serializes"));
        }
        Command::Bench { spec, sweep } => {
            let spec = ExperimentSpec::load(&spec)?;
            print_rows(&execute(&spec, &sweep.out, &sweep.options())?)?;
        }
        Command::Table2 { example, seed, sweep } => {
            let runs = sweep.runs.unwrap_or(100);
            let mut rows = Vec::new();
            for (which, target) in [(ExampleArg::A, TargetSpec::ExampleA), (ExampleArg::B, TargetSpec::ExampleB)] {
                if example == which || example == ExampleArg::Both {
                    let spec = builtin::table2(target.clone(), runs, seed);
                    rows.extend(execute(&spec, &sweep.out.join(target.id()), &sweep.options())?);
                }
            }
            print_rows(&rows)?;
        }
        Command::TableS4 { dims, seed, sweep } => {
            let runs = sweep.runs.unwrap_or(100);
            let mut rows = Vec::new();
            for d in dims {
                let spec = builtin::table_s4(d, runs, seed);
                rows.extend(execute(&spec, &sweep.out.join(spec.target.id()), &sweep.options())?);
            }
            print_rows(&rows)?;
        }
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
/// Exit codes: 0 success, 1 configuration error, 2 I/O error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_are_config_errors() {
        assert_eq!(run(["pnais", "no-such-command"]), 1);
        assert_eq!(run(["pnais", "ground-truth", "example-q"]), 1);
        assert_eq!(run(["pnais", "--help"]), 0);
    }

    #[test]
    fn file_names_are_sanitized() {
        assert_eq!(file_name("dm-pmc-s1"), "dm-pmc-s1");
        assert_eq!(file_name("a/b c"), "a_b_c");
    }
}
