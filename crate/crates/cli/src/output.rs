//! Report files: `{out}/{suite}/{family}/report.csv` (or `report.json`) plus
//! `summary.json`, a top-level `summary.json`, and a `run-meta.json` sidecar
//! holding everything that is not reproducible (timestamps, version).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use qskew_core::report::{reports_csv, CheckKind, RatioReport, SweepSummary};
use serde::Serialize;

use crate::config::Format;

/// Reports for one `(suite, family)` cell.
#[derive(Clone, Debug)]
pub struct CellReports {
    pub suite: String,
    pub family: String,
    pub reports: Vec<RatioReport>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SuiteSummary {
    pub reports: usize,
    pub hard_failures: usize,
    /// Smallest ratio over hard and soft checks; `null` when the suite only has statistics.
    pub min_ratio: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub command: String,
    pub pass: bool,
    pub hard_failures: usize,
    pub suites: BTreeMap<String, SuiteSummary>,
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn cell_dir(out: &Path, suite: &str, family: &str) -> PathBuf {
    out.join(suite).join(family)
}

/// Writes every cell and the top-level summary; returns the summary.
pub fn write_cells(out: &Path, command: &str, cells: &[CellReports], format: Format) -> Result<RunSummary> {
    let mut suites: BTreeMap<String, SuiteSummary> = BTreeMap::new();
    for cell in cells {
        let dir = cell_dir(out, &cell.suite, &cell.family);
        match format {
            Format::Csv => write_text(&dir.join("report.csv"), &reports_csv(&cell.reports))?,
            Format::Json => write_json(&dir.join("report.json"), &cell.reports)?,
        }
        write_json(&dir.join("summary.json"), &SweepSummary::from_reports(&cell.reports))?;
        let s = suites.entry(cell.suite.clone()).or_default();
        for r in &cell.reports {
            s.reports += 1;
            if !r.hard_ok() {
                s.hard_failures += 1;
            }
            if r.kind != CheckKind::Statistic {
                s.min_ratio = Some(s.min_ratio.map_or(r.ratio, |m: f64| m.min(r.ratio)));
            }
        }
    }
    let hard_failures = suites.values().map(|s| s.hard_failures).sum();
    let summary = RunSummary { command: command.to_string(), pass: hard_failures == 0, hard_failures, suites };
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

/// Lists failed hard checks on stderr.
pub fn report_failures(cells: &[CellReports]) {
    for cell in cells {
        for r in cell.reports.iter().filter(|r| !r.hard_ok()) {
            eprintln!(
                "FAIL {}/{} {}: lhs={:e} rhs={:e} ratio={:e} slack_tol={:e}",
                cell.suite, cell.family, r.name, r.lhs, r.rhs, r.ratio, r.slack_tol
            );
        }
    }
}

#[derive(Serialize)]
struct RunMeta<'a> {
    command: &'a str,
    version: &'a str,
    started_unix_ms: u128,
    finished_unix_ms: u128,
}

fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

pub struct Sidecar {
    started: u128,
}

impl Sidecar {
    pub fn start() -> Self {
        Self { started: now_ms() }
    }

    pub fn finish(self, out: &Path, command: &str) -> Result<()> {
        let meta = RunMeta {
            command,
            version: env!("CARGO_PKG_VERSION"),
            started_unix_ms: self.started,
            finished_unix_ms: now_ms(),
        };
        write_json(&out.join("run-meta.json"), &meta)
    }
}
