//! Time evolution: exact spectral expansion in the barrier eigenbasis, and
//! the free phase evolution `e^{−iE(p)t}` as reference.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{to_momentum, to_position, Grid, Units, HBAR};
use crate::kernel::{dispersion, EigenBasis};
use crate::wavepacket::{Representation, Wavepacket};

fn require_momentum(psi: &Wavepacket, grid: &Grid) -> Result<()> {
    if psi.grid() != grid {
        return Err(Error::Shape("wavepacket and propagator grids differ".into()));
    }
    if psi.rep() != Representation::Momentum {
        return Err(Error::Shape("propagation expects a momentum-space wavepacket".into()));
    }
    Ok(())
}

/// `ψ(t, p_k) = e^{−iE(p_k)t} ψ(0, p_k)`
pub fn free_propagate(grid: &Grid, psi0: &Wavepacket, t: f64, units: &Units) -> Result<Wavepacket> {
    require_momentum(psi0, grid)?;
    let amps = psi0
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(k, a)| a * Complex64::from_polar(1.0, -dispersion(grid.p(k), units) * t / HBAR))
        .collect();
    Wavepacket::new(*grid, amps, Representation::Momentum, psi0.time() + t)
}

/// `c_n = Σ_j φ_n*(p_j) ψ(p_j)·dp`
pub fn expansion_coefficients(basis: &EigenBasis, psi0: &Wavepacket) -> Result<Vec<Complex64>> {
    require_momentum(psi0, basis.grid())?;
    let dp = basis.grid().dp();
    let psi = psi0.amplitudes();
    Ok((0..basis.len())
        .map(|n| {
            basis
                .vector(n)
                .iter()
                .zip(psi)
                .map(|(phi, a)| phi.conj() * a)
                .sum::<Complex64>()
                * dp
        })
        .collect())
}

/// `Σ_n φ_n(p_i) e^{−iε_n t} c_n`
fn synthesize(basis: &EigenBasis, coefficients: &[Complex64], t: f64) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); basis.grid().len()];
    for (n, (&eps, &c)) in basis.energies().iter().zip(coefficients).enumerate() {
        let w = c * Complex64::from_polar(1.0, -eps * t / HBAR);
        for (o, phi) in out.iter_mut().zip(basis.vector(n)) {
            *o += phi * w;
        }
    }
    out
}

/// Evolves a momentum-space state through the eigenbasis.
pub fn spectral_propagate(basis: &EigenBasis, psi0: &Wavepacket, t: f64) -> Result<Wavepacket> {
    let coefficients = expansion_coefficients(basis, psi0)?;
    Wavepacket::new(
        *basis.grid(),
        synthesize(basis, &coefficients, t),
        Representation::Momentum,
        psi0.time() + t,
    )
}

/// A state prepared once and evaluated at arbitrary times.
pub trait Evolution: Sync {
    fn grid(&self) -> &Grid;

    /// The position-space state at `t = 0`.
    fn initial(&self) -> &Wavepacket;

    fn momentum_at(&self, t: f64) -> Wavepacket;

    /// Position-space state at `t`. At `t = 0` this is the initial packet
    /// itself, with no transform round trip.
    fn position_at(&self, t: f64) -> Result<Wavepacket> {
        if t == 0.0 {
            return Ok(self.initial().clone());
        }
        to_position(&self.momentum_at(t), self.grid())
    }
}

pub struct FreeEvolution {
    initial: Wavepacket,
    momentum: Wavepacket,
    units: Units,
}

impl FreeEvolution {
    pub fn new(initial: &Wavepacket, units: Units) -> Result<Self> {
        let momentum = to_momentum(initial, initial.grid())?;
        Ok(Self {
            initial: initial.clone(),
            momentum,
            units,
        })
    }
}

impl Evolution for FreeEvolution {
    fn grid(&self) -> &Grid {
        self.initial.grid()
    }

    fn initial(&self) -> &Wavepacket {
        &self.initial
    }

    fn momentum_at(&self, t: f64) -> Wavepacket {
        free_propagate(self.grid(), &self.momentum, t, &self.units)
            .expect("grid and representation fixed at construction")
    }
}

/// Spectral evolution with the expansion coefficients computed once.
pub struct SpectralEvolution<'a> {
    basis: &'a EigenBasis,
    initial: Wavepacket,
    coefficients: Vec<Complex64>,
}

impl<'a> SpectralEvolution<'a> {
    pub fn new(basis: &'a EigenBasis, initial: &Wavepacket) -> Result<Self> {
        if initial.grid() != basis.grid() {
            return Err(Error::Shape("wavepacket and eigenbasis grids differ".into()));
        }
        let momentum = to_momentum(initial, basis.grid())?;
        let coefficients = expansion_coefficients(basis, &momentum)?;
        Ok(Self {
            basis,
            initial: initial.clone(),
            coefficients,
        })
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }
}

impl Evolution for SpectralEvolution<'_> {
    fn grid(&self) -> &Grid {
        self.basis.grid()
    }

    fn initial(&self) -> &Wavepacket {
        &self.initial
    }

    fn momentum_at(&self, t: f64) -> Wavepacket {
        let amps = synthesize(self.basis, &self.coefficients, t);
        Wavepacket::new(*self.grid(), amps, Representation::Momentum, self.initial.time() + t)
            .expect("basis columns match the grid")
    }
}

pub fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::Config("times must be finite".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Config("times must be sorted in ascending order".into()));
    }
    Ok(())
}

/// Position-space snapshots at each of `times` (ascending).
pub fn evolve_series<E: Evolution + ?Sized>(evolution: &E, times: &[f64]) -> Result<Vec<Wavepacket>> {
    check_times(times)?;
    times.par_iter().map(|&t| evolution.position_at(t)).collect()
}
