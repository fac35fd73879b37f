//! Nyström discretization of the momentum-space eigenproblem
//!
//! ```text
//! ε φ(p) = E(p) φ(p) + (1/√2π) ∫ dp′ V(p − p′) φ(p′)
//! ```
//!
//! On the momentum lattice this becomes the dense Hermitian eigenproblem
//! `M φ = ε φ` with `M_ij = E(p_i) δ_ij + dp·V(p_i − p_j)/√2π`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid, Units};
use crate::potential::Potential;

/// Largest lattice accepted by [`diagonalize`].
pub const MAX_DENSE_POINTS: usize = 4096;

/// Relative pole distance below which the delta-limit profile is singular.
pub const POLE_TOLERANCE: f64 = 1e-12;

/// Relativistic kinetic energy `√(p²c² + m²c⁴)`.
pub fn dispersion(p: f64, units: &Units) -> f64 {
    (p * units.c).hypot(units.rest_energy())
}

#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    matrix: DMatrix<Complex64>,
    grid: Grid,
}

impl HamiltonianMatrix {
    /// Wraps an arbitrary square matrix, which must be Hermitian to 1e−12
    /// relative to its largest entry.
    pub fn from_matrix(grid: Grid, matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != grid.len() || matrix.ncols() != grid.len() {
            return Err(Error::Shape(format!(
                "matrix is {}x{}, grid has {} nodes",
                matrix.nrows(),
                matrix.ncols(),
                grid.len()
            )));
        }
        let h = Self { matrix, grid };
        let scale = h.matrix.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let residual = h.hermiticity_residual();
        if residual > 1e-12 * scale {
            return Err(Error::Numerical(format!(
                "matrix is not Hermitian: max |M_ij − conj(M_ji)| = {residual:e}"
            )));
        }
        Ok(h)
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.matrix.nrows();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..=j {
                let d = (self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }
}

/// Assembles `M = diag(E(p_i)) + dp·V(p_i − p_j)/√2π`.
///
/// Only the upper triangle is evaluated; the lower triangle is its conjugate
/// mirror, so the result is Hermitian bit for bit.
pub fn build_hamiltonian(grid: &Grid, potential: &Potential, units: &Units) -> HamiltonianMatrix {
    let n = grid.len();
    let dp = grid.dp();
    let coupling = dp / (2.0 * PI).sqrt();
    // Upper triangle: p_i − p_j = −(j − i)·dp, so only j − i matters.
    let upper: Vec<Complex64> = (0..n)
        .map(|d| potential.momentum_element(-(d as f64) * dp) * coupling)
        .collect();
    let mut matrix = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        for i in 0..=j {
            let v = upper[j - i];
            matrix[(i, j)] = v;
            matrix[(j, i)] = v.conj();
        }
        matrix[(j, j)] += Complex64::new(dispersion(grid.p(j), units), 0.0);
        matrix[(j, j)].im = 0.0;
    }
    HamiltonianMatrix {
        matrix,
        grid: *grid,
    }
}

/// Energies `ε_n` (ascending) and eigenvectors `φ_n(p_i)` normalized so that
/// `Σ_i |φ_n(p_i)|²·dp = 1`.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    energies: Vec<f64>,
    vectors: DMatrix<Complex64>,
    grid: Grid,
}

impl EigenBasis {
    /// Reassembles a basis from stored parts, e.g. a cache file.
    pub fn from_parts(grid: Grid, energies: Vec<f64>, vectors: DMatrix<Complex64>) -> Result<Self> {
        let n = grid.len();
        if energies.len() != n || vectors.nrows() != n || vectors.ncols() != n {
            return Err(Error::Shape(format!(
                "basis parts ({} energies, {}x{} vectors) do not fit a {n}-node grid",
                energies.len(),
                vectors.nrows(),
                vectors.ncols()
            )));
        }
        Ok(Self {
            energies,
            vectors,
            grid,
        })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Column `n` holds `φ_n(p_i)`.
    pub fn vectors(&self) -> &DMatrix<Complex64> {
        &self.vectors
    }

    pub fn vector(&self, n: usize) -> &[Complex64] {
        let len = self.grid.len();
        &self.vectors.as_slice()[n * len..(n + 1) * len]
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn is_real(&self) -> bool {
        self.vectors.iter().all(|z| z.im == 0.0)
    }

    /// `max |Σ_i φ_n*(p_i) φ_m(p_i)·dp − δ_nm|`
    pub fn orthonormality_residual(&self) -> f64 {
        let gram = adjoint_product(&self.vectors, &self.vectors, true);
        identity_deviation(&gram, self.grid.dp())
    }

    /// `max |Σ_n φ_n(p_i) φ_n*(p_j)·dp − δ_ij/dp|·dp`
    pub fn completeness_residual(&self) -> f64 {
        let outer = adjoint_product(&self.vectors, &self.vectors, false);
        identity_deviation(&outer, self.grid.dp())
    }

    /// Index of the energy closest to `target`; lowest index on ties.
    pub fn nearest(&self, target: f64) -> usize {
        let mut best = 0;
        for (n, e) in self.energies.iter().enumerate() {
            if (e - target).abs() < (self.energies[best] - target).abs() {
                best = n;
            }
        }
        best
    }
}

fn split(m: &DMatrix<Complex64>) -> (DMatrix<f64>, DMatrix<f64>) {
    (m.map(|z| z.re), m.map(|z| z.im))
}

/// `A†B` when `adjoint_left`, else `A B†`, via real matrix products.
fn adjoint_product(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, adjoint_left: bool) -> DMatrix<Complex64> {
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    let (re, im) = if adjoint_left {
        (
            ar.tr_mul(&br) + ai.tr_mul(&bi),
            ar.tr_mul(&bi) - ai.tr_mul(&br),
        )
    } else {
        (
            &ar * br.transpose() + &ai * bi.transpose(),
            &ai * br.transpose() - &ar * bi.transpose(),
        )
    };
    re.zip_map(&im, Complex64::new)
}

fn identity_deviation(m: &DMatrix<Complex64>, scale: f64) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((m[(i, j)] * scale - target).norm());
        }
    }
    worst
}

fn diagnostics(m: &DMatrix<Complex64>) -> String {
    let frob = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let diag: Vec<f64> = (0..m.nrows()).map(|i| m[(i, i)].re).collect();
    let lo = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    format!(
        "n = {}, Frobenius norm = {frob:e}, diagonal range = [{lo:e}, {hi:e}]",
        m.nrows()
    )
}

/// Dense Hermitian eigensolver: ascending eigenvalues and orthonormal
/// eigenvector columns (unit Euclidean norm, unweighted).
pub fn hermitian_eigen(m: &DMatrix<Complex64>) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::Shape(format!("matrix is {}x{}", n, m.ncols())));
    }
    if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Numerical(format!(
            "matrix has non-finite entries ({})",
            diagnostics(m)
        )));
    }
    let max_iter = 100_000 + 64 * n;
    let (values, vectors): (Vec<f64>, DMatrix<Complex64>) = if m.iter().all(|z| z.im == 0.0) {
        let real = m.map(|z| z.re);
        let eig = SymmetricEigen::try_new(real, f64::EPSILON, max_iter).ok_or_else(|| {
            Error::Numerical(format!("eigensolver did not converge ({})", diagnostics(m)))
        })?;
        (
            eig.eigenvalues.iter().copied().collect(),
            eig.eigenvectors.map(|x| Complex64::new(x, 0.0)),
        )
    } else {
        let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, max_iter).ok_or_else(|| {
            Error::Numerical(format!("eigensolver did not converge ({})", diagnostics(m)))
        })?;
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let energies = order.iter().map(|&k| values[k]).collect();
    let mut sorted = DMatrix::<Complex64>::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let mut v = vectors.column(k).into_owned();
        fix_phase(v.as_mut_slice());
        sorted.set_column(col, &v);
    }
    Ok((energies, sorted))
}

/// Rotates `v` so that its largest-magnitude component (first one, within a
/// relative 1e−9 band) is real and positive.
fn fix_phase(v: &mut [Complex64]) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-9))
        .unwrap_or(0);
    let rot = v[pivot].conj() / v[pivot].norm();
    for z in v.iter_mut() {
        *z *= rot;
    }
    v[pivot].im = 0.0;
}

/// Full spectrum and `dp`-normalized eigenvectors of `h`.
pub fn diagonalize(h: &HamiltonianMatrix) -> Result<EigenBasis> {
    let n = h.grid.len();
    if n > MAX_DENSE_POINTS {
        return Err(Error::Config(format!(
            "{n} lattice nodes exceed the dense eigensolver cap of {MAX_DENSE_POINTS}"
        )));
    }
    let (energies, mut vectors) = hermitian_eigen(&h.matrix)?;
    let scale = 1.0 / h.grid.dp().sqrt();
    vectors.iter_mut().for_each(|z| *z *= scale);
    Ok(EigenBasis {
        energies,
        vectors,
        grid: h.grid,
    })
}

/// Unnormalized narrow-barrier eigenfunction `1/(ε − E(p_i))`. The overall
/// factor `g·I/2π` involves the divergent integral `I = ∫φ dp` and is left to
/// the caller.
pub fn delta_limit_eigenfunction(energy: f64, grid: &Grid, units: &Units) -> Result<Vec<f64>> {
    (0..grid.len())
        .map(|i| {
            let e = dispersion(grid.p(i), units);
            let gap = energy - e;
            if gap.abs() <= POLE_TOLERANCE * e.abs().max(1.0) {
                Err(Error::Singularity {
                    energy,
                    node: i,
                    momentum: grid.p(i),
                    dispersion: e,
                })
            } else {
                Ok(1.0 / gap)
            }
        })
        .collect()
}
