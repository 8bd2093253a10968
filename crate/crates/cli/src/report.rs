//! Expected-vs-measured tables and comma-separated plot data.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub quantity: String,
    pub expected: String,
    pub measured: f64,
    pub pass: bool,
}

impl TableRow {
    pub fn new(quantity: impl Into<String>, expected: impl Into<String>, measured: f64, pass: bool) -> Self {
        TableRow { quantity: quantity.into(), expected: expected.into(), measured, pass }
    }
}

pub fn render_table(rows: &[TableRow]) -> String {
    let w0 = rows.iter().map(|r| r.quantity.len()).max().unwrap_or(8).max(8);
    let w1 = rows.iter().map(|r| r.expected.len()).max().unwrap_or(8).max(8);
    let mut out = format!("{:<w0$}  {:<w1$}  {:>22}  result\n", "quantity", "expected", "measured");
    for r in rows {
        out.push_str(&format!(
            "{:<w0$}  {:<w1$}  {:>22}  {}\n",
            r.quantity,
            r.expected,
            format!("{:.12e}", r.measured),
            if r.pass { "pass" } else { "FAIL" }
        ));
    }
    out
}

/// Writes a header plus rows of numbers; values use the shortest
/// round-trip representation so reruns are byte-identical.
pub fn write_series(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Config(e.to_string()))?;
    w.write_record(header).map_err(|e| CliError::Config(e.to_string()))?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(|e| CliError::Config(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_table(path: &Path, rows: &[TableRow]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Config(e.to_string()))?;
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Config(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
