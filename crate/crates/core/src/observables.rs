//! Diagnostics extracted from position-space snapshots: region masses,
//! transmission, the conditional mean and peak of the transmitted packet,
//! and the fraction of probability beyond the forward light cone (OLC).
//!
//! Region sums are left-endpoint Riemann sums `Σ_{a ≤ x_j < b} |ψ(x_j)|²·dx`,
//! the same rule as the norm, so region masses add up exactly on the lattice.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Units;
use crate::propagate::{check_times, Evolution};
use crate::wavepacket::{Representation, Wavepacket};

/// Smallest transmitted mass for which conditional observables are defined.
pub const MIN_TRANSMITTED_MASS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionProbability {
    pub lower: f64,
    pub upper: f64,
    pub mass: f64,
    /// The requested bounds reached outside the box.
    pub clipped: bool,
}

fn require_position(psi: &Wavepacket) -> Result<()> {
    if psi.rep() != Representation::Position {
        return Err(Error::Shape("observable expects a position-space wavepacket".into()));
    }
    Ok(())
}

/// Probability on `[a, b)`.
pub fn region_mass(psi: &Wavepacket, a: f64, b: f64) -> Result<RegionProbability> {
    require_position(psi)?;
    if a.is_nan() || b.is_nan() || a >= b {
        return Err(Error::Argument(format!("region bounds must satisfy a < b, got [{a}, {b})")));
    }
    let g = psi.grid();
    let clipped = a < g.x_min() || b > g.x_max();
    let mass = psi
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|&(j, _)| {
            let x = g.x(j);
            a <= x && x < b
        })
        .map(|(_, z)| z.norm_sqr())
        .sum::<f64>()
        * g.dx();
    Ok(RegionProbability {
        lower: a,
        upper: b,
        mass,
        clipped,
    })
}

/// Probability on `[a, x_max)`, or 0 when `a` lies at or beyond the box edge.
fn mass_beyond(psi: &Wavepacket, a: f64) -> f64 {
    let g = psi.grid();
    if a >= g.x_max() {
        return 0.0;
    }
    region_mass(psi, a, g.x_max()).map(|r| r.mass).unwrap_or(0.0)
}

/// Probability within `nodes` lattice nodes of either box edge.
pub fn edge_mass(psi: &Wavepacket, nodes: usize) -> f64 {
    let n = psi.grid().len();
    let k = nodes.min(n / 2);
    let amps = psi.amplitudes();
    (amps[..k].iter().chain(&amps[n - k..]))
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        * psi.weight()
}

/// Denominator of the OLC fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OlcDenominator {
    /// Total norm, i.e. the fraction is a plain probability.
    #[default]
    Total,
    /// Mass beyond the transmission cut; the numerator is then restricted to
    /// the transmitted side as well.
    Transmitted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OlcFlag {
    /// The light cone has left the box; the fraction is reported as 0.
    OutOfWindow,
    /// The transmitted mass is below [`MIN_TRANSMITTED_MASS`]; reported as 0.
    VanishingDenominator,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OlcRecord {
    pub t: f64,
    pub light_cone_pos: f64,
    pub fraction: f64,
    pub flag: Option<OlcFlag>,
}

/// Probability beyond the forward light cone `right_edge + c·t` of the
/// initial support.
pub fn olc_fraction(psi: &Wavepacket, right_edge: f64, t: f64, units: &Units) -> Result<OlcRecord> {
    olc_fraction_with(psi, right_edge, t, units, OlcDenominator::Total, 0.0)
}

pub fn olc_fraction_with(
    psi: &Wavepacket,
    right_edge: f64,
    t: f64,
    units: &Units,
    denominator: OlcDenominator,
    x_cut: f64,
) -> Result<OlcRecord> {
    require_position(psi)?;
    let light_cone_pos = right_edge + units.c * t;
    let g = psi.grid();
    if light_cone_pos >= g.x_max() {
        return Ok(OlcRecord {
            t,
            light_cone_pos,
            fraction: 0.0,
            flag: Some(OlcFlag::OutOfWindow),
        });
    }
    let (fraction, flag) = match denominator {
        OlcDenominator::Total => (mass_beyond(psi, light_cone_pos) / psi.norm_sqr(), None),
        OlcDenominator::Transmitted => {
            let transmitted = transmitted_mass(psi, x_cut);
            if transmitted <= MIN_TRANSMITTED_MASS {
                (0.0, Some(OlcFlag::VanishingDenominator))
            } else {
                (mass_beyond(psi, light_cone_pos.max(x_cut)) / transmitted, None)
            }
        }
    };
    Ok(OlcRecord {
        t,
        light_cone_pos,
        fraction,
        flag,
    })
}

/// OLC fraction at each of `times` (ascending).
pub fn olc_series<E: Evolution + ?Sized>(
    evolution: &E,
    right_edge: f64,
    times: &[f64],
    units: &Units,
    denominator: OlcDenominator,
    x_cut: f64,
) -> Result<Vec<OlcRecord>> {
    use rayon::prelude::*;
    check_times(times)?;
    times
        .par_iter()
        .map(|&t| {
            let psi = evolution.position_at(t)?;
            olc_fraction_with(&psi, right_edge, t, units, denominator, x_cut)
        })
        .collect()
}

/// `(t*, f*)` of the largest fraction; the earliest record wins ties.
pub fn olc_global_max(series: &[OlcRecord]) -> Result<(f64, f64)> {
    let first = series
        .first()
        .ok_or_else(|| Error::Argument("olc_global_max of an empty series".into()))?;
    let best = series.iter().fold(first, |best, r| {
        if r.fraction > best.fraction {
            r
        } else {
            best
        }
    });
    Ok((best.t, best.fraction))
}

/// Mass strictly beyond `x_cut`.
pub fn transmitted_mass(psi: &Wavepacket, x_cut: f64) -> f64 {
    let g = psi.grid();
    psi.amplitudes()
        .iter()
        .enumerate()
        .filter(|&(j, _)| g.x(j) > x_cut)
        .map(|(_, z)| z.norm_sqr())
        .sum::<f64>()
        * g.dx()
}

/// `Σ_{x_j > x_cut} x_j |ψ|² / Σ_{x_j > x_cut} |ψ|²`
pub fn conditional_mean_position(psi: &Wavepacket, x_cut: f64) -> Result<f64> {
    require_position(psi)?;
    let g = psi.grid();
    let (mut num, mut den) = (0.0, 0.0);
    for (j, z) in psi.amplitudes().iter().enumerate() {
        let x = g.x(j);
        if x > x_cut {
            num += x * z.norm_sqr();
            den += z.norm_sqr();
        }
    }
    if den * g.dx() <= MIN_TRANSMITTED_MASS {
        return Err(Error::UndefinedObservable(format!(
            "transmitted mass beyond x = {x_cut} is {:e}",
            den * g.dx()
        )));
    }
    Ok(num / den)
}

/// Node of maximal density beyond `x_cut`; the smallest `x` wins ties.
pub fn peak_position(psi: &Wavepacket, x_cut: f64) -> Result<f64> {
    require_position(psi)?;
    let mass = transmitted_mass(psi, x_cut);
    if mass <= MIN_TRANSMITTED_MASS {
        return Err(Error::UndefinedObservable(format!(
            "transmitted mass beyond x = {x_cut} is {mass:e}"
        )));
    }
    let g = psi.grid();
    let mut best: Option<(usize, f64)> = None;
    for (j, z) in psi.amplitudes().iter().enumerate() {
        if g.x(j) > x_cut {
            let d = z.norm_sqr();
            if best.is_none_or(|(_, b)| d > b) {
                best = Some((j, d));
            }
        }
    }
    Ok(g.x(best.expect("positive mass implies a node").0))
}

/// Upper envelope of a sampled series: the maximum over the `half_width`
/// samples on either side of each index.
///
/// An OLC series jumps every time the light cone crosses a lattice node,
/// which happens every `dx/c` in time; a `half_width` covering that interval
/// removes the resulting sawtooth and keeps the slower structure.
pub fn running_max(values: &[f64], half_width: usize) -> Vec<f64> {
    (0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(half_width);
            let hi = (i + half_width + 1).min(values.len());
            values[lo..hi].iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

/// Indices of local maxima whose topographic prominence is at least
/// `min_relative` times the global maximum of `values`.
pub fn prominent_peaks(values: &[f64], min_relative: f64) -> Vec<usize> {
    let n = values.len();
    let top = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if n < 3 || top.is_nan() || top <= 0.0 {
        return Vec::new();
    }
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        // A plateau counts once, at its first index.
        let mut j = i;
        while j + 1 < n && values[j + 1] == values[i] {
            j += 1;
        }
        let v = values[i];
        if j + 1 < n && values[i - 1] < v && values[j + 1] < v {
            // Lowest point on each side before a higher value or the border.
            let left_min = values[..i]
                .iter()
                .rev()
                .take_while(|&&x| x <= v)
                .cloned()
                .fold(v, f64::min);
            let right_min = values[j + 1..]
                .iter()
                .take_while(|&&x| x <= v)
                .cloned()
                .fold(v, f64::min);
            if v - left_min.max(right_min) >= min_relative * top {
                peaks.push(i);
            }
        }
        i = j + 1;
    }
    peaks
}
