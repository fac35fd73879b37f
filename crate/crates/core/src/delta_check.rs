//! Narrow-barrier validation: numerical eigenvectors against the closed-form
//! delta-barrier profile `φ(p) ∝ 1/(ε − E(p))`.
//!
//! The proportionality constant contains the divergent integral `∫φ dp`, so
//! the comparison fits one complex scale by least squares and reports the
//! relative L2 residual.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Grid, Units};
use crate::kernel::{delta_limit_eigenfunction, EigenBasis};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaComparison {
    pub index: usize,
    pub eps_n: f64,
    pub rel_l2_error: f64,
    #[serde(serialize_with = "complex_pair")]
    pub scale: Complex64,
}

fn complex_pair<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

/// Least-squares `s` minimizing `‖numeric − s·analytic‖`, and the residual
/// relative to `‖numeric‖`.
pub fn fit_profile(numeric: &[Complex64], analytic: &[f64]) -> Result<(Complex64, f64)> {
    if numeric.len() != analytic.len() {
        return Err(Error::Shape(format!(
            "profiles have lengths {} and {}",
            numeric.len(),
            analytic.len()
        )));
    }
    let aa: f64 = analytic.iter().map(|a| a * a).sum();
    let nn: f64 = numeric.iter().map(|z| z.norm_sqr()).sum();
    if aa == 0.0 || nn == 0.0 {
        return Err(Error::Numerical("cannot fit a vanishing profile".into()));
    }
    let scale = numeric
        .iter()
        .zip(analytic)
        .map(|(z, a)| z * a)
        .sum::<Complex64>()
        / aa;
    let res: f64 = numeric
        .iter()
        .zip(analytic)
        .map(|(z, a)| (z - scale * a).norm_sqr())
        .sum();
    Ok((scale, (res / nn).sqrt()))
}

pub fn compare_to_delta_limit(basis: &EigenBasis, n: usize, grid: &Grid, units: &Units) -> Result<DeltaComparison> {
    if basis.grid() != grid {
        return Err(Error::Shape("basis was built on a different grid".into()));
    }
    if n >= basis.len() {
        return Err(Error::Argument(format!("state index {n} out of range 0..{}", basis.len())));
    }
    let eps_n = basis.energies()[n];
    let analytic = delta_limit_eigenfunction(eps_n, grid, units)?;
    let (scale, rel_l2_error) = fit_profile(basis.vector(n), &analytic)?;
    Ok(DeltaComparison {
        index: n,
        eps_n,
        rel_l2_error,
        scale,
    })
}

/// `Re Σ_k φ_n*(p_k) φ_n(−p_k)·dp` over nodes that have a mirror partner:
/// close to +1 for even states, −1 for odd ones.
pub fn parity(basis: &EigenBasis, n: usize) -> f64 {
    let g = basis.grid();
    let v = basis.vector(n);
    (0..g.len())
        .filter_map(|k| g.mirror_index(k).map(|m| (v[k].conj() * v[m]).re))
        .sum::<f64>()
        * g.dp()
}

/// Even-parity state with energy closest to `target`. Odd states do not feel
/// a delta barrier and keep the free energies, where the profile has a pole.
pub fn nearest_even_state(basis: &EigenBasis, target: f64) -> Result<usize> {
    (0..basis.len())
        .filter(|&n| parity(basis, n) > 0.5)
        .min_by(|&a, &b| {
            let da = (basis.energies()[a] - target).abs();
            let db = (basis.energies()[b] - target).abs();
            da.total_cmp(&db).then(a.cmp(&b))
        })
        .ok_or_else(|| Error::Argument("basis has no even-parity state".into()))
}
