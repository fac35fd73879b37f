//! Wavepacket scattering and tunneling for the one-dimensional relativistic
//! Schrödinger (Salpeter) equation
//!
//! ```text
//! i ∂ψ/∂t = √(p²c² + m²c⁴) ψ + V(x) ψ
//! ```
//!
//! The square-root kinetic term is nonlocal in position space, so the
//! stationary problem is solved in momentum space: the integral equation is
//! discretized on the momentum lattice (Nyström), the resulting dense
//! Hermitian matrix is diagonalized, and wavepackets are evolved exactly by
//! spectral expansion in that eigenbasis. Positions and momenta are tied by a
//! unitary discrete Fourier transform.
//!
//! Natural units are used throughout: ħ = 1, and by default c = 1 and m = 1
//! so that the Compton wavelength ħ/mc is the unit of length.

pub mod cache;
pub mod delta_check;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod observables;
pub mod output;
pub mod potential;
pub mod propagate;
pub mod runner;
pub mod scenario;
pub mod wavepacket;

pub use error::{Error, Result};
pub use grid::{to_momentum, to_position, Grid, Units, HBAR};
pub use kernel::{build_hamiltonian, diagonalize, dispersion, EigenBasis, HamiltonianMatrix};
pub use potential::Potential;
pub use propagate::{evolve_series, free_propagate, spectral_propagate, Evolution, FreeEvolution, SpectralEvolution};
pub use wavepacket::{cos8_packet, support_edges, PacketSpec, Representation, Wavepacket};

pub use num_complex::Complex64;
