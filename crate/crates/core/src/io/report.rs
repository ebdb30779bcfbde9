//! Report bundles: `report.json`, `summary.csv` and `series/<method>.csv`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::{Indicator, TrialReport};
use crate::scalar::Scalar;

pub const REPORT_FILE: &str = "report.json";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const SERIES_DIR: &str = "series";

/// Paths written by [`write_report`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportBundle {
    pub report: PathBuf,
    pub summary: PathBuf,
    pub series: Vec<PathBuf>,
}

/// Compact JSON with shortest round-trip numbers, newline-terminated.
pub fn write_json<V: Serialize>(value: &V, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string(value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<V: DeserializeOwned>(path: &Path) -> Result<V> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_report<T: Scalar + Serialize>(report: &TrialReport<T>, dir: &Path) -> Result<ReportBundle> {
    let series_dir = dir.join(SERIES_DIR);
    fs::create_dir_all(&series_dir).map_err(|e| Error::io(&series_dir, e))?;

    let report_path = dir.join(REPORT_FILE);
    write_json(report, &report_path)?;

    let summary = dir.join(SUMMARY_FILE);
    fs::write(&summary, render_summary(report)).map_err(|e| Error::io(&summary, e))?;

    let mut series = Vec::new();
    for method in report.methods() {
        let path = series_dir.join(format!("{method}.csv"));
        fs::write(&path, render_series(report, method)).map_err(|e| Error::io(&path, e))?;
        series.push(path);
    }
    Ok(ReportBundle {
        report: report_path,
        summary,
        series,
    })
}

/// Reads `report.json` from a bundle directory or from the file itself.
pub fn read_report<T: Scalar + DeserializeOwned>(path: &Path) -> Result<TrialReport<T>> {
    let file = if path.is_dir() { path.join(REPORT_FILE) } else { path.to_path_buf() };
    read_json(&file)
}

fn num<T: Scalar>(v: T) -> String {
    v.to_string()
}

/// One row per (method, budget) cell, then one `Average` row per method and
/// one `W/T/L` row per baseline. `p_value`, `delta` and `verdict` compare the
/// reference method with the row's method on Spearman ρ; on `Average` rows
/// they use the repetitions pooled over all budgets. `W/T/L` rows hold the
/// reference's per-budget win/tie/loss counts for each indicator.
pub fn render_summary<T: Scalar>(report: &TrialReport<T>) -> String {
    let indicators = report.indicators();
    let reference = report.config.reference;
    let mut out = String::from("method,budget");
    for ind in &indicators {
        let _ = write!(out, ",{ind}");
    }
    out.push_str(",p_value,delta,verdict\n");

    let stats_cols = |out: &mut String, method, budget| match report.comparison(method, Indicator::Spearman, budget) {
        Some(c) => {
            let _ = writeln!(out, ",{},{},{}", num(c.stats.p_value), num(c.stats.delta), c.stats.verdict);
        }
        None => out.push_str(",,,\n"),
    };

    for cell in &report.cells {
        let _ = write!(out, "{},{}", cell.method, cell.budget);
        for &ind in &indicators {
            out.push(',');
            if let Some(v) = cell.mean(ind) {
                out.push_str(&num(v));
            }
        }
        stats_cols(&mut out, cell.method, Some(cell.budget));
    }
    for method in report.methods() {
        let _ = write!(out, "{method},Average");
        for &ind in &indicators {
            out.push(',');
            if let Some(v) = report.average(method, ind) {
                out.push_str(&num(v));
            }
        }
        stats_cols(&mut out, method, None);
    }
    for method in report.methods().into_iter().filter(|&m| m != reference) {
        let _ = write!(out, "{method},W/T/L");
        for &ind in &indicators {
            let _ = write!(out, ",{}", report.win_tie_loss(method, ind));
        }
        out.push_str(",,,\n");
    }
    out
}

/// Budget series of one method: mean and standard deviation of ρ, and mean
/// `J_k` for each `k`.
pub fn render_series<T: Scalar>(report: &TrialReport<T>, method: crate::selection::Method) -> String {
    let indicators = report.indicators();
    let mut out = String::from("budget,spearman,spearman_sd");
    for ind in indicators.iter().skip(1) {
        let _ = write!(out, ",{ind}");
    }
    out.push('\n');
    for cell in report.cells.iter().filter(|c| c.method == method) {
        let rho = cell.values(Indicator::Spearman);
        let _ = write!(out, "{},{},{}", cell.budget, num(cell.mean_spearman), num(std_dev(&rho)));
        for &ind in indicators.iter().skip(1) {
            out.push(',');
            if let Some(v) = cell.mean(ind) {
                out.push_str(&num(v));
            }
        }
        out.push('\n');
    }
    out
}

/// Sample standard deviation; zero for fewer than two values.
fn std_dev<T: Scalar>(values: &[T]) -> T {
    if values.len() < 2 {
        return T::zero();
    }
    let n = T::of_usize(values.len());
    let mean = values.iter().copied().sum::<T>() / n;
    let ss = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>();
    (ss / (n - T::one())).sqrt()
}
