//! Report documents and plot-data files.
//!
//! Reports are JSON with sorted keys and shortest round-trip floats, so a
//! rerun with the same recipe gives the same bytes. Wall time lives in a
//! separate `timing.json` next to the report for the same reason.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

pub const SCHEMA: u32 = 1;
pub const REPORT_FILE: &str = "report.json";
pub const TIMING_FILE: &str = "timing.json";

pub fn version_string() -> String {
    format!("v{}", env!("CARGO_PKG_VERSION"))
}

/// Hex SHA-256 of the compact JSON form of the resolved recipe.
pub fn config_hash(config: &ExperimentConfig) -> String {
    let canonical = serde_json::to_string(&to_value(config)).expect("config serializes");
    Sha256::digest(canonical.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    // routing through Value sorts every object's keys
    serde_json::to_value(v).expect("report values serialize")
}

pub fn report_document(config: &ExperimentConfig, results: Value) -> Value {
    json!({
        "schema": SCHEMA,
        "version": version_string(),
        "experiment": config.kind(),
        "config": to_value(config),
        "config_hash": config_hash(config),
        "results": results,
    })
}

pub fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Write `report.json` under `dir`, creating the directory if needed.
pub fn emit_report(dir: &Path, config: &ExperimentConfig, results: Value) -> CliResult<PathBuf> {
    create_dir(dir)?;
    let path = dir.join(REPORT_FILE);
    let mut text = serde_json::to_string_pretty(&report_document(config, results)).expect("report serializes");
    text.push('\n');
    write_text(&path, &text)?;
    Ok(path)
}

pub fn emit_timing(dir: &Path, experiment: &str, seconds: f64) -> CliResult<()> {
    let text = serde_json::to_string_pretty(&json!({ "experiment": experiment, "wall_time_seconds": seconds }))
        .expect("timing serializes");
    write_text(&dir.join(TIMING_FILE), &(text + "\n"))
}

/// One plot row: `x,y` and an optional band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotRow {
    pub x: f64,
    pub y: f64,
    pub band: Option<(f64, f64)>,
}

impl PlotRow {
    pub fn xy(x: f64, y: f64) -> Self {
        Self { x, y, band: None }
    }

    pub fn banded(x: f64, y: f64, lo: f64, hi: f64) -> Self {
        Self {
            x,
            y,
            band: Some((lo, hi)),
        }
    }
}

/// Write plot data; the band columns appear when the first row has them.
pub fn write_plot(path: &Path, rows: &[PlotRow]) -> CliResult<()> {
    let banded = rows.first().is_some_and(|r| r.band.is_some());
    let mut text = String::from(if banded { "x,y,band_lo,band_hi\n" } else { "x,y\n" });
    for r in rows {
        match (banded, r.band) {
            (true, Some((lo, hi))) => text.push_str(&format!("{},{},{},{}\n", r.x, r.y, lo, hi)),
            (true, None) => text.push_str(&format!("{},{},,\n", r.x, r.y)),
            (false, _) => text.push_str(&format!("{},{}\n", r.x, r.y)),
        }
    }
    write_text(path, &text)
}

/// Read one numeric column of a headed CSV file.
pub fn read_column(path: &Path, column: &str) -> CliResult<Vec<f64>> {
    let name = path.display().to_string();
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::Data(format!("{name}: {e}")))?;
    let header = reader
        .headers()
        .map_err(|e| CliError::Data(format!("{name}: {e}")))?
        .clone();
    let idx = header
        .iter()
        .position(|h| h.trim() == column)
        .ok_or_else(|| CliError::Data(format!("{name}: no column `{column}`")))?;
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| CliError::Data(format!("{name}: {e}")))?;
        let line = row.position().map_or(0, |p| p.line());
        let field = row.get(idx).unwrap_or("").trim();
        let v: f64 = field
            .parse()
            .map_err(|_| CliError::Data(format!("{name} line {line}: `{field}` is not a number")))?;
        if !v.is_finite() {
            return Err(CliError::Data(format!("{name} line {line}: value {v} is not finite")));
        }
        out.push(v);
    }
    Ok(out)
}

/// Write a single-column CSV.
pub fn write_column(path: &Path, column: &str, values: &[f64]) -> CliResult<()> {
    let mut text = format!("{column}\n");
    for v in values {
        text.push_str(&format!("{v}\n"));
    }
    write_text(path, &text)
}
