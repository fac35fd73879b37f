//! Conjugate position/momentum lattices and the unitary transforms between
//! them.
//!
//! With `N` nodes on the periodic box `[x_min, x_max)` the lattices are
//!
//! ```text
//! x_j = x_min + j·dx,        dx = (x_max − x_min)/N,   j = 0..N
//! p_k = (k − N/2)·dp,        dp = 2π/(x_max − x_min),  k = 0..N
//! ```
//!
//! so that `dx·dp·N = 2π`. The transforms are Riemann sums of the continuum
//! Fourier integrals,
//!
//! ```text
//! ψ(p_k) = (1/√2π) Σ_j dx e^{−i p_k x_j} ψ(x_j)
//! ψ(x_j) = (1/√2π) Σ_k dp e^{+i p_k x_j} ψ(p_k)
//! ```
//!
//! which are exactly unitary between the `dx`- and `dp`-weighted norms.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wavepacket::{Representation, Wavepacket};

/// Reduced Planck constant. The lattice convention `dp = 2π/(x_max − x_min)`
/// is tied to this value, so it is fixed rather than configurable.
pub const HBAR: f64 = 1.0;

/// Smallest accepted number of lattice nodes.
pub const MIN_POINTS: usize = 4;

/// Speed of light and particle mass in natural units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Units {
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default = "one")]
    pub mass: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for Units {
    fn default() -> Self {
        Self { c: 1.0, mass: 1.0 }
    }
}

impl Units {
    pub fn new(c: f64, mass: f64) -> Result<Self> {
        let u = Self { c, mass };
        u.validate()?;
        Ok(u)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::Config(format!("speed of light must be positive, got {}", self.c)));
        }
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(Error::Config(format!("mass must be positive, got {}", self.mass)));
        }
        Ok(())
    }

    /// mc²
    pub fn rest_energy(&self) -> f64 {
        self.mass * self.c * self.c
    }

    /// ħ/mc
    pub fn compton_wavelength(&self) -> f64 {
        HBAR / (self.mass * self.c)
    }
}

/// Paired position and momentum lattices on a periodic box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n: usize,
    dx: f64,
    dp: f64,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) {
            return Err(Error::Config("grid bounds must be finite".into()));
        }
        if x_max <= x_min {
            return Err(Error::Config(format!(
                "x_max ({x_max}) must exceed x_min ({x_min})"
            )));
        }
        if !n_points.is_multiple_of(2) || n_points < MIN_POINTS {
            return Err(Error::Config(format!(
                "n_points must be even and at least {MIN_POINTS}, got {n_points}"
            )));
        }
        let width = x_max - x_min;
        Ok(Self {
            x_min,
            x_max,
            n: n_points,
            dx: width / n_points as f64,
            dp: 2.0 * PI * HBAR / width,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dp(&self) -> f64 {
        self.dp
    }

    /// Position of node `j`.
    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx
    }

    /// Momentum of node `k`.
    pub fn p(&self, k: usize) -> f64 {
        (k as f64 - (self.n / 2) as f64) * self.dp
    }

    pub fn x_nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    pub fn p_nodes(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.p(k)).collect()
    }

    /// Index of the node holding `−p_k`. The most negative momentum has no
    /// partner on an even lattice.
    pub fn mirror_index(&self, k: usize) -> Option<usize> {
        if k == 0 || k >= self.n {
            None
        } else {
            Some(self.n - k)
        }
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::Shape(format!(
                "amplitude length {len} does not match grid size {}",
                self.n
            )));
        }
        Ok(())
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if forward {
            p.plan_fft_forward(n)
        } else {
            p.plan_fft_inverse(n)
        }
    })
}

fn alternate(j: usize) -> f64 {
    if j.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Position amplitudes to momentum amplitudes on `grid`.
pub fn forward_transform(grid: &Grid, amps: &[Complex64]) -> Result<Vec<Complex64>> {
    grid.check_len(amps.len())?;
    let mut buf: Vec<Complex64> = amps
        .iter()
        .enumerate()
        .map(|(j, a)| a * alternate(j))
        .collect();
    plan(grid.n, true).process(&mut buf);
    let scale = grid.dx / (2.0 * PI * HBAR).sqrt();
    for (k, b) in buf.iter_mut().enumerate() {
        let (s, c) = (grid.p(k) * grid.x_min / HBAR).sin_cos();
        *b *= Complex64::new(c, -s) * scale;
    }
    Ok(buf)
}

/// Momentum amplitudes to position amplitudes on `grid`.
pub fn inverse_transform(grid: &Grid, amps: &[Complex64]) -> Result<Vec<Complex64>> {
    grid.check_len(amps.len())?;
    let mut buf: Vec<Complex64> = amps
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let (s, c) = (grid.p(k) * grid.x_min / HBAR).sin_cos();
            a * Complex64::new(c, s)
        })
        .collect();
    plan(grid.n, false).process(&mut buf);
    let scale = grid.dp / (2.0 * PI * HBAR).sqrt();
    for (j, b) in buf.iter_mut().enumerate() {
        *b *= alternate(j) * scale;
    }
    Ok(buf)
}

fn check_grid(psi: &Wavepacket, grid: &Grid) -> Result<()> {
    if psi.grid() != grid {
        return Err(Error::Shape("wavepacket lives on a different grid".into()));
    }
    Ok(())
}

pub fn to_momentum(psi: &Wavepacket, grid: &Grid) -> Result<Wavepacket> {
    check_grid(psi, grid)?;
    if psi.rep() != Representation::Position {
        return Err(Error::Shape("to_momentum expects a position-space wavepacket".into()));
    }
    let amps = forward_transform(grid, psi.amplitudes())?;
    Wavepacket::new(*grid, amps, Representation::Momentum, psi.time())
}

pub fn to_position(psi: &Wavepacket, grid: &Grid) -> Result<Wavepacket> {
    check_grid(psi, grid)?;
    if psi.rep() != Representation::Momentum {
        return Err(Error::Shape("to_position expects a momentum-space wavepacket".into()));
    }
    let amps = inverse_transform(grid, psi.amplitudes())?;
    Wavepacket::new(*grid, amps, Representation::Position, psi.time())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_amps(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    fn norm_sqr(a: &[Complex64], w: f64) -> f64 {
        a.iter().map(|z| z.norm_sqr()).sum::<f64>() * w
    }

    #[test]
    fn small_grid_layout() {
        let g = Grid::new(-PI, PI, 4).unwrap();
        assert!((g.dp() - 1.0).abs() < 1e-15);
        let p = g.p_nodes();
        for (got, want) in p.iter().zip([-2.0, -1.0, 0.0, 1.0]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn step_identities() {
        let g = Grid::new(-20.0, 20.0, 512).unwrap();
        assert!((g.dp() - 2.0 * PI / 40.0).abs() < 1e-15);
        assert!((g.dp() - 0.15708).abs() < 1e-5);
        for &(a, b, n) in &[(-20.0, 20.0, 512), (-3.0, 7.5, 100), (0.0, 1.0, 8)] {
            let g = Grid::new(a, b, n).unwrap();
            assert!((g.dx() * g.dp() - 2.0 * PI / n as f64).abs() < 1e-15);
            assert!((g.dx() * g.dp() * n as f64 - 2.0 * PI).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_configuration() {
        assert!(matches!(Grid::new(1.0, 1.0, 8), Err(Error::Config(_))));
        assert!(matches!(Grid::new(2.0, 1.0, 8), Err(Error::Config(_))));
        assert!(matches!(Grid::new(0.0, 1.0, 9), Err(Error::Config(_))));
        assert!(matches!(Grid::new(0.0, 1.0, 2), Err(Error::Config(_))));
        assert!(matches!(Grid::new(f64::NAN, 1.0, 8), Err(Error::Config(_))));
    }

    #[test]
    fn momentum_nodes_symmetric() {
        let g = Grid::new(-10.0, 10.0, 64).unwrap();
        let p = g.p_nodes();
        assert!(p.windows(2).all(|w| w[1] > w[0]));
        for k in 1..64 {
            let m = g.mirror_index(k).unwrap();
            assert!((p[k] + p[m]).abs() < 1e-12);
        }
        assert_eq!(g.mirror_index(0), None);
    }

    #[test]
    fn round_trip_and_parseval() {
        let g = Grid::new(-13.0, 27.0, 256).unwrap();
        let psi = random_amps(256, 7);
        let mom = forward_transform(&g, &psi).unwrap();
        let back = inverse_transform(&g, &mom).unwrap();
        let diff = psi
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12, "round trip diff {diff}");
        let nx = norm_sqr(&psi, g.dx()).sqrt();
        let np = norm_sqr(&mom, g.dp()).sqrt();
        assert!((nx - np).abs() < 1e-12);
    }

    #[test]
    fn matches_direct_sum() {
        let g = Grid::new(-3.3, 4.1, 32).unwrap();
        let psi = random_amps(32, 11);
        let fast = forward_transform(&g, &psi).unwrap();
        for (k, f) in fast.iter().enumerate() {
            let direct: Complex64 = psi
                .iter()
                .enumerate()
                .map(|(j, a)| a * Complex64::from_polar(1.0, -g.p(k) * g.x(j)))
                .sum::<Complex64>()
                * (g.dx() / (2.0 * PI).sqrt());
            assert!((direct - f).norm() < 1e-12);
        }
    }

    #[test]
    fn constant_maps_to_zero_momentum() {
        let g = Grid::new(-5.0, 5.0, 64).unwrap();
        let psi = vec![Complex64::new(1.0, 0.0); 64];
        let mom = forward_transform(&g, &psi).unwrap();
        let zero = 32;
        assert!(g.p(zero).abs() < 1e-15);
        for (k, a) in mom.iter().enumerate() {
            if k == zero {
                assert!(a.norm() > 1.0);
            } else {
                assert!(a.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn translation_multiplies_phase() {
        let g = Grid::new(-8.0, 8.0, 128).unwrap();
        let psi = random_amps(128, 3);
        let shift = 5;
        let mut shifted = psi.clone();
        shifted.rotate_right(shift);
        let a = forward_transform(&g, &psi).unwrap();
        let b = forward_transform(&g, &shifted).unwrap();
        for k in 0..128 {
            let phase = Complex64::from_polar(1.0, -g.p(k) * shift as f64 * g.dx());
            assert!((b[k] - a[k] * phase).norm() < 1e-12);
        }
    }

    #[test]
    fn gaussian_matches_analytic_transform() {
        // ψ(x) = exp(−(x−a)²/2) has ψ(p) = exp(−p²/2 − i p a).
        let g = Grid::new(-25.0, 15.0, 256).unwrap();
        let a = -2.0;
        let psi: Vec<Complex64> = g
            .x_nodes()
            .iter()
            .map(|x| Complex64::new((-(x - a) * (x - a) / 2.0).exp(), 0.0))
            .collect();
        let mom = forward_transform(&g, &psi).unwrap();
        for (k, m) in mom.iter().enumerate() {
            let p = g.p(k);
            let want = Complex64::from_polar((-p * p / 2.0).exp(), -p * a);
            assert!((m - want).norm() < 1e-12, "k={k} p={p}");
        }
    }

    #[test]
    fn length_mismatch_is_shape_error() {
        let g = Grid::new(-1.0, 1.0, 8).unwrap();
        let bad = vec![Complex64::new(0.0, 0.0); 6];
        assert!(matches!(forward_transform(&g, &bad), Err(Error::Shape(_))));
        assert!(matches!(inverse_transform(&g, &bad), Err(Error::Shape(_))));
    }

    #[test]
    fn units_positive() {
        assert!(Units::new(1.0, 0.0).is_err());
        assert!(Units::new(-1.0, 1.0).is_err());
        let u = Units::default();
        assert_eq!(u.rest_energy(), 1.0);
        assert_eq!(u.compton_wavelength(), 1.0);
    }
}
