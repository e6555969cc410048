//! Aggregation of sweep results into relative-MSE rows, and their CSV/JSON
//! forms.

use std::path::Path;

use nalgebra::DVector;
use pnais::engine::{relative_mse, relative_mse_per_coord};
use pnais::GroundTruth;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};
use crate::spec::{ExperimentSpec, Quantity};
use crate::sweep::CellResult;

pub const CSV_HEADER: [&str; 7] = ["method", "target", "quantity", "rel_mse", "n_runs", "diverged", "wall_time_s"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: String,
    pub target: String,
    pub quantity: Quantity,
    /// `None` for diverged cells.
    pub rel_mse: Option<f64>,
    pub n_runs: usize,
    pub diverged: bool,
    pub wall_time_s: Option<f64>,
    #[serde(default)]
    pub rel_mse_per_coord: Vec<Option<f64>>,
    /// Across-run mean and standard deviation of the estimate.
    #[serde(default)]
    pub estimate_mean: Vec<f64>,
    #[serde(default)]
    pub estimate_sd: Vec<f64>,
    #[serde(default)]
    pub truth: Vec<f64>,
}

/// The seven CSV columns of a row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRecord {
    pub method: String,
    pub target: String,
    pub quantity: Quantity,
    pub rel_mse: Option<f64>,
    pub n_runs: usize,
    pub diverged: bool,
    pub wall_time_s: Option<f64>,
}

impl ReportRow {
    pub fn csv_record(&self) -> CsvRecord {
        CsvRecord {
            method: self.method.clone(),
            target: self.target.clone(),
            quantity: self.quantity,
            rel_mse: self.rel_mse,
            n_runs: self.n_runs,
            diverged: self.diverged,
            wall_time_s: self.wall_time_s,
        }
    }
}

fn pick(q: Quantity, mean: &[f64], second: &[f64], z: f64, from: usize) -> DVector<f64> {
    match q {
        Quantity::Mean => DVector::from_row_slice(&mean[from..]),
        Quantity::SecondMoment => DVector::from_row_slice(&second[from..]),
        Quantity::Z => DVector::from_element(1, z),
    }
}

fn mean_sd(xs: &[DVector<f64>]) -> (Vec<f64>, Vec<f64>) {
    if xs.is_empty() {
        return (vec![], vec![]);
    }
    let n = xs.len() as f64;
    let m = xs.iter().fold(DVector::zeros(xs[0].len()), |a, x| a + x) / n;
    let sd = if xs.len() > 1 {
        let v = xs.iter().fold(DVector::zeros(m.len()), |a, x| {
            let d = x - &m;
            a + d.component_mul(&d)
        }) / (n - 1.0);
        v.map(f64::sqrt).iter().copied().collect()
    } else {
        vec![0.0; m.len()]
    };
    (m.iter().copied().collect(), sd)
}

pub fn build_rows(spec: &ExperimentSpec, truth: &GroundTruth, cells: &[CellResult]) -> Result<Vec<ReportRow>> {
    let from = spec.first_coordinate;
    let target = spec.target.id();
    let mut rows = Vec::new();
    for cell in cells {
        for &q in &spec.quantities {
            let t = pick(q, &truth.mean, &truth.second_moment, truth.z, from);
            let (rel, per, est_mean, est_sd) = if cell.diverged {
                (None, vec![], vec![], vec![])
            } else {
                let ests: Vec<DVector<f64>> = cell
                    .runs
                    .iter()
                    .map(|r| pick(q, &r.mean, &r.second_moment, r.z, from))
                    .collect();
                let (m, sd) = mean_sd(&ests);
                (
                    Some(relative_mse(&ests, &t)?),
                    relative_mse_per_coord(&ests, &t)?,
                    m,
                    sd,
                )
            };
            rows.push(ReportRow {
                method: cell.method.clone(),
                target: target.clone(),
                quantity: q,
                rel_mse: rel,
                n_runs: cell.runs.len(),
                diverged: cell.diverged,
                wall_time_s: cell.wall_time_s,
                rel_mse_per_coord: per,
                estimate_mean: est_mean,
                estimate_sd: est_sd,
                truth: t.iter().copied().collect(),
            });
        }
    }
    Ok(rows)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

pub fn to_csv_string(rows: &[ReportRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.method.clone(),
            r.target.clone(),
            r.quantity.as_str().to_string(),
            fmt_opt(r.rel_mse),
            r.n_runs.to_string(),
            r.diverged.to_string(),
            fmt_opt(r.wall_time_s),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| BenchError::io("<csv buffer>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRecord>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
    if header != CSV_HEADER {
        return Err(BenchError::Config(format!("unexpected csv header {header:?}")));
    }
    let bad = |what: &str, v: &str| BenchError::Config(format!("bad {what} {v:?}"));
    let opt = |v: &str| -> Result<Option<f64>> {
        if v.is_empty() {
            Ok(None)
        } else {
            v.parse().map(Some).map_err(|_| bad("number", v))
        }
    };
    r.records()
        .map(|rec| {
            let rec = rec?;
            Ok(CsvRecord {
                method: rec[0].to_string(),
                target: rec[1].to_string(),
                quantity: Quantity::parse(&rec[2]).ok_or_else(|| bad("quantity", &rec[2]))?,
                rel_mse: opt(&rec[3])?,
                n_runs: rec[4].parse().map_err(|_| bad("n_runs", &rec[4]))?,
                diverged: rec[5].parse().map_err(|_| bad("diverged", &rec[5]))?,
                wall_time_s: opt(&rec[6])?,
            })
        })
        .collect()
}

pub fn write_csv(rows: &[ReportRow], path: &Path) -> Result<()> {
    std::fs::write(path, to_csv_string(rows)?).map_err(|e| BenchError::io(path, e))
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    std::fs::write(path, text + "\n").map_err(|e| BenchError::io(path, e))
}
