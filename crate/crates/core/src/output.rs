//! Serialized artifacts: CSV tables and the JSON run manifest.
//!
//! Floats are written in the shortest decimal form that round-trips to the
//! same `f64`, in scientific notation (`1.4142135623730951e0`). Together
//! with deterministic evaluation order this makes data files byte-identical
//! across runs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

pub const FLOAT_FORMAT: &str = "shortest round-trip decimal, scientific notation";

pub fn fmt_f64(x: f64) -> String {
    format!("{x:e}")
}

/// Optional cell: empty when the value is undefined.
pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Writes an RFC 4180 table with a header row.
pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct CacheReport {
    pub hits: usize,
    pub misses: usize,
    pub disabled: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub scenario_name: Option<String>,
    pub scenario_file: Option<PathBuf>,
    pub scenario_hash: String,
    pub physics_hash: String,
    pub float_format: &'static str,
    pub eigenbasis_cache: CacheReport,
    pub outputs: Vec<String>,
    pub summary: serde_json::Map<String, serde_json::Value>,
    pub warnings: Vec<String>,
    pub wall_time_seconds: f64,
    pub finished_at_unix: u64,
}

impl Manifest {
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.manifest.json", self.command));
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }
}
