//! Scenario files: TOML documents describing one physical setup (grid,
//! units, barrier, initial packet), the sample times and which observables
//! to write. Any field can be overridden from the command line with a dotted
//! `key=value` pair.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Issue, Result};
use crate::grid::{Grid, Units, MIN_POINTS};
use crate::kernel::MAX_DENSE_POINTS;
use crate::observables::OlcDenominator;
use crate::potential::Potential;
use crate::wavepacket::PacketSpec;

/// Bumped whenever the meaning of cached eigenbases changes.
const PHYSICS_FORMAT: &str = "salpeter-physics-v1";

const MAX_TIMES: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

/// Either an explicit list (`values`) or an inclusive range
/// (`start`, `stop`, `step`).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

impl TimeSpec {
    fn expand(&self) -> std::result::Result<Vec<f64>, String> {
        match (&self.values, self.start, self.stop, self.step) {
            (Some(v), None, None, None) => Ok(v.clone()),
            (None, Some(start), Some(stop), Some(step)) => {
                if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
                    return Err("start, stop and step must be finite".into());
                }
                if step <= 0.0 {
                    return Err(format!("step must be positive, got {step}"));
                }
                if stop < start {
                    return Err(format!("stop ({stop}) precedes start ({start})"));
                }
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                if count > MAX_TIMES {
                    return Err(format!("{count} samples exceed the limit of {MAX_TIMES}"));
                }
                Ok((0..count).map(|i| start + i as f64 * step).collect())
            }
            _ => Err("give either `values` or all of `start`, `stop`, `step`".into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObservablesConfig {
    pub density_snapshots: bool,
    pub olc_series: bool,
    pub transmitted_stats: bool,
    /// Also evaluate the freely evolved packet for comparison.
    pub free_baseline: bool,
    pub olc_denominator: OlcDenominator,
}

impl Default for ObservablesConfig {
    fn default() -> Self {
        Self {
            density_snapshots: true,
            olc_series: false,
            transmitted_stats: false,
            free_baseline: false,
            olc_denominator: OlcDenominator::Total,
        }
    }
}

/// A sweep over barrier heights and widths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub v0: Vec<f64>,
    pub width: Vec<f64>,
    /// When set, the packet is re-centred for every width at
    /// `x0 = −(width/2 + barrier_gap)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub barrier_gap: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaCheckConfig {
    /// The even-parity eigenstate closest to this energy is compared.
    pub target_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub grid: GridConfig,
    #[serde(default)]
    pub units: Units,
    pub potential: Potential,
    pub packet: PacketSpec,
    pub times: TimeSpec,
    #[serde(default)]
    pub observables: ObservablesConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_check: Option<DeltaCheckConfig>,
}

impl Scenario {
    /// Reads, overrides, parses and validates a scenario file.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text, overrides)
    }

    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Validation(vec![Issue::new("<file>", e.message().to_string())]))?;
        let mut issues = Vec::new();
        for o in overrides {
            if let Err(msg) = apply_override(&mut table, o) {
                issues.push(Issue::new(format!("--override {o}"), msg));
            }
        }
        if !issues.is_empty() {
            return Err(Error::Validation(issues));
        }
        let scenario: Scenario = serde_path_to_error::deserialize(toml::Value::Table(table)).map_err(|e| {
            let path = e.path().to_string();
            Error::Validation(vec![Issue::new(path, e.into_inner().to_string())])
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    /// Every violated precondition, reported together.
    pub fn validate(&self) -> Result<()> {
        let issues = self.issues();
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(issues))
        }
    }

    pub fn issues(&self) -> Vec<Issue> {
        let mut out = Vec::new();
        let g = &self.grid;
        let grid = match Grid::new(g.x_min, g.x_max, g.n_points) {
            Ok(grid) => Some(grid),
            Err(e) => {
                out.push(Issue::new("grid", e.to_string()));
                None
            }
        };
        if g.n_points > MAX_DENSE_POINTS {
            out.push(Issue::new(
                "grid.n_points",
                format!("{} exceeds the dense eigensolver cap of {MAX_DENSE_POINTS}", g.n_points),
            ));
        }
        if g.n_points < MIN_POINTS || !g.n_points.is_multiple_of(2) {
            out.push(Issue::new("grid.n_points", format!("must be even and at least {MIN_POINTS}")));
        }
        if let Err(e) = self.units.validate() {
            out.push(Issue::new("units", e.to_string()));
        }
        for (field, msg) in self.potential.problems() {
            out.push(Issue::new(format!("potential.{field}"), msg));
        }
        if let Some(grid) = &grid {
            for msg in self.packet.check_on(grid) {
                out.push(Issue::new("packet", msg));
            }
        }
        match self.times.expand() {
            Err(msg) => out.push(Issue::new("times", msg)),
            Ok(t) if t.is_empty() => out.push(Issue::new("times", "at least one sample time is required")),
            Ok(t) => {
                if t.iter().any(|x| !x.is_finite()) {
                    out.push(Issue::new("times.values", "must be finite"));
                } else if t.windows(2).any(|w| w[1] < w[0]) {
                    out.push(Issue::new("times.values", "must be sorted in ascending order"));
                }
            }
        }
        if let Some(scan) = &self.scan {
            if matches!(self.potential, Potential::NarrowDelta { .. }) {
                out.push(Issue::new("scan", "a (v0, width) scan needs a rectangular or smooth_tanh barrier"));
            }
            if scan.v0.is_empty() {
                out.push(Issue::new("scan.v0", "must not be empty"));
            }
            if scan.v0.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                out.push(Issue::new("scan.v0", "heights must be finite and non-negative"));
            }
            if scan.width.is_empty() {
                out.push(Issue::new("scan.width", "must not be empty"));
            }
            if scan.width.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                out.push(Issue::new("scan.width", "widths must be positive"));
            }
            if let Some(gap) = scan.barrier_gap {
                if !(gap.is_finite() && gap > 0.0) {
                    out.push(Issue::new("scan.barrier_gap", "must be positive"));
                }
            }
            if let Some(grid) = &grid {
                for &w in scan.width.iter().filter(|w| w.is_finite() && **w > 0.0) {
                    for msg in self.packet_for_width(w).check_on(grid) {
                        out.push(Issue::new(format!("scan.width[{w}]"), msg));
                    }
                }
            }
        }
        if let Some(dc) = &self.delta_check {
            if !dc.target_energy.is_finite() {
                out.push(Issue::new("delta_check.target_energy", "must be finite"));
            }
        }
        out
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.x_min, self.grid.x_max, self.grid.n_points)
    }

    pub fn times(&self) -> Result<Vec<f64>> {
        self.times.expand().map_err(|m| Error::Config(format!("times: {m}")))
    }

    /// Initial packet used by scan points of barrier width `width`.
    pub fn packet_for_width(&self, width: f64) -> PacketSpec {
        match self.scan.as_ref().and_then(|s| s.barrier_gap) {
            Some(gap) => PacketSpec {
                x0: -(width / 2.0 + gap),
                ..self.packet
            },
            None => self.packet,
        }
    }

    /// SHA-256 of the canonical JSON form of the whole scenario.
    pub fn hash(&self) -> String {
        sha256_json(self)
    }

    /// SHA-256 over the inputs that determine the eigenbasis.
    pub fn physics_hash(&self) -> String {
        physics_hash(&self.grid, &self.units, &self.potential)
    }
}

pub fn physics_hash(grid: &GridConfig, units: &Units, potential: &Potential) -> String {
    #[derive(Serialize)]
    struct Physics<'a> {
        format: &'static str,
        grid: &'a GridConfig,
        units: &'a Units,
        potential: &'a Potential,
    }
    sha256_json(&Physics {
        format: PHYSICS_FORMAT,
        grid,
        units,
        potential,
    })
}

fn sha256_json<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("scenario types serialize to JSON");
    hex::encode(Sha256::digest(&bytes))
}

/// Sets `a.b.c = value` in `table`. The value is read as a TOML literal and
/// falls back to a bare string.
fn apply_override(table: &mut toml::Table, spec: &str) -> std::result::Result<(), String> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| "expected key=value".to_string())?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(format!("malformed key `{key}`"));
    }
    let value = match format!("v = {}", raw.trim()).parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key just parsed"),
        Err(_) => toml::Value::String(raw.trim().to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    let (last, parents) = parts.split_last().expect("non-empty key");
    let mut cursor = table;
    for p in parents {
        let entry = cursor
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cursor = entry
            .as_table_mut()
            .ok_or_else(|| format!("`{p}` is not a table"))?;
    }
    cursor.insert(last.to_string(), value);
    Ok(())
}
