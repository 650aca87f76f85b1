//! Comparison reports over a results table.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{BenchError, Result};
use crate::run::{fmt_float, parse_float, read_results, ResultRow, RESULTS_FILE};

/// One (problem, size, model, risk) cell of a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub problem: String,
    pub param_count: usize,
    pub model: String,
    pub risk: String,
    pub repeats: usize,
    pub diverged: usize,
    /// Smallest minimum fractional error over non-diverged repeats.
    pub min_fractional_error: f64,
    pub best: bool,
}

/// Groups rows by (problem, size) and marks the best model in each group.
/// Diverged repeats are counted but never selected.
pub fn summarise(rows: &[ResultRow]) -> Vec<ReportRow> {
    let mut cells: BTreeMap<(String, usize, String, String), ReportRow> = BTreeMap::new();
    for r in rows {
        let key = (r.problem.clone(), r.param_count, r.model.clone(), r.risk.clone());
        let cell = cells.entry(key).or_insert_with(|| ReportRow {
            problem: r.problem.clone(),
            param_count: r.param_count,
            model: r.model.clone(),
            risk: r.risk.clone(),
            repeats: 0,
            diverged: 0,
            min_fractional_error: f64::INFINITY,
            best: false,
        });
        cell.repeats += 1;
        let e = parse_float(&r.min_fractional_error);
        if r.diverged || !e.is_finite() {
            cell.diverged += 1;
        } else {
            cell.min_fractional_error = cell.min_fractional_error.min(e);
        }
    }
    let mut out: Vec<ReportRow> = cells.into_values().collect();
    let mut best: BTreeMap<(String, usize), (f64, usize)> = BTreeMap::new();
    for (i, r) in out.iter().enumerate() {
        if !r.min_fractional_error.is_finite() {
            continue;
        }
        let e = best
            .entry((r.problem.clone(), r.param_count))
            .or_insert((f64::INFINITY, i));
        if r.min_fractional_error < e.0 {
            *e = (r.min_fractional_error, i);
        }
    }
    for (_, i) in best.into_values() {
        out[i].best = true;
    }
    out
}

pub fn to_markdown(rows: &[ReportRow]) -> String {
    let mut s = String::from("| problem | #parameters | model | risk | repeats | diverged | min fractional error |\n");
    s.push_str("|---|---|---|---|---|---|---|\n");
    for r in rows {
        let err = if r.min_fractional_error.is_finite() {
            format!("{:.3e}", r.min_fractional_error)
        } else {
            "n/a".into()
        };
        let err = if r.best { format!("**{err}** (best)") } else { err };
        let model = if r.diverged > 0 {
            format!("{} (diverged {}x)", r.model, r.diverged)
        } else {
            r.model.clone()
        };
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} | {} |",
            r.problem, r.param_count, model, r.risk, r.repeats, r.diverged, err
        );
    }
    s
}

/// Reads `<dir>/results.csv` and writes `report.md` and `report.csv` next to it.
pub fn write_report(dir: &Path) -> Result<Vec<ReportRow>> {
    let rows = read_results(&dir.join(RESULTS_FILE))?;
    let summary = summarise(&rows);
    let md = dir.join("report.md");
    std::fs::write(&md, to_markdown(&summary)).map_err(|e| BenchError::io(&md, e))?;
    let path = dir.join("report.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| BenchError::csv(&path, e))?;
    w.write_record(["problem", "param_count", "model", "risk", "repeats", "diverged", "min_fractional_error", "best"])
        .map_err(|e| BenchError::csv(&path, e))?;
    for r in &summary {
        w.write_record([
            r.problem.clone(),
            r.param_count.to_string(),
            r.model.clone(),
            r.risk.clone(),
            r.repeats.to_string(),
            r.diverged.to_string(),
            fmt_float(r.min_fractional_error),
            r.best.to_string(),
        ])
        .map_err(|e| BenchError::csv(&path, e))?;
    }
    w.flush().map_err(|e| BenchError::io(&path, e))?;
    Ok(summary)
}
