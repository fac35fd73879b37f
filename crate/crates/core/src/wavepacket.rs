//! Amplitude arrays and the compactly supported cos⁸ initial state.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Fewest lattice nodes that must fall strictly inside a packet's support.
pub const MIN_SUPPORT_NODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Position,
    Momentum,
}

/// Complex amplitudes on one of the two lattices of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Wavepacket {
    grid: Grid,
    amps: Vec<Complex64>,
    rep: Representation,
    time: f64,
}

impl Wavepacket {
    pub fn new(grid: Grid, amps: Vec<Complex64>, rep: Representation, time: f64) -> Result<Self> {
        if amps.len() != grid.len() {
            return Err(Error::Shape(format!(
                "amplitude length {} does not match grid size {}",
                amps.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            amps,
            rep,
            time,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn rep(&self) -> Representation {
        self.rep
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Lattice spacing of the current representation.
    pub fn weight(&self) -> f64 {
        match self.rep {
            Representation::Position => self.grid.dx(),
            Representation::Momentum => self.grid.dp(),
        }
    }

    /// Nodes of the current representation.
    pub fn node(&self, i: usize) -> f64 {
        match self.rep {
            Representation::Position => self.grid.x(i),
            Representation::Momentum => self.grid.p(i),
        }
    }

    /// |ψ|² at every node.
    pub fn density(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Σ |ψ_i|² times the lattice spacing.
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.weight()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::Numerical(format!("cannot normalize a state of norm {n}")));
        }
        for a in &mut self.amps {
            *a /= n;
        }
        Ok(())
    }

    /// Riemann-sum expectation of the lattice coordinate, Σ q_i|ψ_i|²·w / ‖ψ‖².
    pub fn mean_coordinate(&self) -> f64 {
        let w = self.weight();
        let num: f64 = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| self.node(i) * a.norm_sqr())
            .sum::<f64>()
            * w;
        num / self.norm_sqr()
    }
}

/// Mean position, mean momentum and support width of a cos⁸ packet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketSpec {
    pub x0: f64,
    pub p0: f64,
    pub delta_x: f64,
}

impl PacketSpec {
    pub fn new(x0: f64, p0: f64, delta_x: f64) -> Self {
        Self { x0, p0, delta_x }
    }

    pub fn support_edges(&self) -> (f64, f64) {
        support_edges(self)
    }

    /// Checks the support against `grid`, returning every violation found.
    pub fn check_on(&self, grid: &Grid) -> Vec<String> {
        let mut problems = Vec::new();
        if !(self.x0.is_finite() && self.p0.is_finite()) {
            problems.push("x0 and p0 must be finite".to_string());
        }
        if !(self.delta_x.is_finite() && self.delta_x > 0.0) {
            problems.push(format!("delta_x must be positive, got {}", self.delta_x));
            return problems;
        }
        let (left, right) = self.support_edges();
        if left <= grid.x_min() || right >= grid.x_max() {
            problems.push(format!(
                "support [{left}, {right}] is clipped by the box [{}, {})",
                grid.x_min(),
                grid.x_max()
            ));
        }
        let inside = self.nodes_inside(grid);
        if inside < MIN_SUPPORT_NODES {
            problems.push(format!(
                "support holds {inside} lattice nodes, need at least {MIN_SUPPORT_NODES}"
            ));
        }
        problems
    }

    fn nodes_inside(&self, grid: &Grid) -> usize {
        (0..grid.len())
            .filter(|&j| ((grid.x(j) - self.x0).abs()) < self.delta_x / 2.0)
            .count()
    }
}

/// Bounds of the compact support, `(x0 − Δx/2, x0 + Δx/2)`.
pub fn support_edges(spec: &PacketSpec) -> (f64, f64) {
    (spec.x0 - spec.delta_x / 2.0, spec.x0 + spec.delta_x / 2.0)
}

fn cos8_profile(spec: &PacketSpec, x: f64) -> Complex64 {
    let u = x - spec.x0;
    if u.abs() >= spec.delta_x / 2.0 {
        return Complex64::new(0.0, 0.0);
    }
    let envelope = (PI * u / spec.delta_x).cos().powi(8);
    Complex64::from_polar(envelope, spec.p0 * x)
}

/// Unnormalized cos⁸ amplitudes; zero on and outside the support bounds.
pub fn cos8_amplitudes(spec: &PacketSpec, grid: &Grid) -> Vec<Complex64> {
    (0..grid.len()).map(|j| cos8_profile(spec, grid.x(j))).collect()
}

/// Unit-norm position-space packet
/// `cos⁸[π(x − x0)/Δx]·e^{i p0 x}` on `|x − x0| < Δx/2`.
pub fn cos8_packet(spec: &PacketSpec, grid: &Grid) -> Result<Wavepacket> {
    let problems = spec.check_on(grid);
    if !problems.is_empty() {
        return Err(Error::Config(problems.join("; ")));
    }
    let mut psi = Wavepacket::new(
        *grid,
        cos8_amplitudes(spec, grid),
        Representation::Position,
        0.0,
    )?;
    psi.normalize()?;
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::forward_transform;

    fn reference_packet() -> PacketSpec {
        PacketSpec::new(-3.5, 1.0, 2.0)
    }

    #[test]
    fn support_edges_examples() {
        assert_eq!(support_edges(&reference_packet()), (-4.5, -2.5));
        assert_eq!(support_edges(&PacketSpec::new(0.0, 0.0, 2.0)), (-1.0, 1.0));
        assert_eq!(
            support_edges(&PacketSpec::new(-22.25, 1.0, 20.0)),
            (-32.25, -12.25)
        );
    }

    #[test]
    fn vanishes_on_and_outside_support() {
        // x_j = −4.5 and −2.5 are lattice nodes here.
        let g = Grid::new(-10.0, 10.0, 160).unwrap();
        let psi = cos8_packet(&reference_packet(), &g).unwrap();
        let (l, r) = reference_packet().support_edges();
        let mut edge_hits = 0;
        for (j, a) in psi.amplitudes().iter().enumerate() {
            let x = g.x(j);
            if x <= l || x >= r {
                assert_eq!(*a, Complex64::new(0.0, 0.0), "x = {x}");
            }
            if (x - l).abs() < 1e-12 || (x - r).abs() < 1e-12 {
                edge_hits += 1;
            }
        }
        assert_eq!(edge_hits, 2);
    }

    #[test]
    fn unit_norm_and_centered() {
        let g = Grid::new(-40.0, 40.0, 512).unwrap();
        let psi = cos8_packet(&reference_packet(), &g).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        assert!((psi.mean_coordinate() - -3.5).abs() < g.dx());
    }

    #[test]
    fn raw_norm_matches_cos16_integral() {
        // ∫ cos¹⁶ over one support = Δx·C(16,8)/2¹⁶.
        let want = 2.0 * 12870.0 / 65536.0;
        let g = Grid::new(-10.0, 10.0, 8192).unwrap();
        let raw: f64 = cos8_amplitudes(&reference_packet(), &g)
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            * g.dx();
        assert!((raw - want).abs() < 1e-10, "{raw} vs {want}");
        assert!((want / 2.0 - 0.196381).abs() < 1e-6);
    }

    #[test]
    fn momentum_peak_near_p0() {
        let g = Grid::new(-40.0, 40.0, 512).unwrap();
        let psi = cos8_packet(&reference_packet(), &g).unwrap();
        let mom = forward_transform(&g, psi.amplitudes()).unwrap();
        let (kmax, _) = mom
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
            .unwrap();
        assert!((g.p(kmax) - 1.0).abs() <= g.dp());
        let mean: f64 = mom
            .iter()
            .enumerate()
            .map(|(k, a)| g.p(k) * a.norm_sqr())
            .sum::<f64>()
            * g.dp();
        assert!((mean - 1.0).abs() < g.dp());
    }

    #[test]
    fn momentum_shift_moves_peak_one_node() {
        let g = Grid::new(-40.0, 40.0, 512).unwrap();
        let peak = |p0: f64| {
            let psi = cos8_packet(&PacketSpec::new(-3.5, p0, 2.0), &g).unwrap();
            let mom = forward_transform(&g, psi.amplitudes()).unwrap();
            let dens: Vec<f64> = mom.iter().map(|a| a.norm_sqr()).collect();
            // Parabolic refinement of the discrete peak.
            let k = (1..dens.len() - 1)
                .max_by(|&a, &b| dens[a].partial_cmp(&dens[b]).unwrap())
                .unwrap();
            let (l, c, r) = (dens[k - 1], dens[k], dens[k + 1]);
            g.p(k) + 0.5 * (l - r) / (l - 2.0 * c + r) * g.dp()
        };
        let a = peak(1.0);
        let b = peak(1.0 + g.dp());
        assert!((b - a - g.dp()).abs() < 1e-3, "shift {}", b - a);
    }

    #[test]
    fn clipped_or_underresolved_support_rejected() {
        let g = Grid::new(-5.0, 5.0, 64).unwrap();
        let clipped = PacketSpec::new(-4.5, 1.0, 2.0);
        assert!(matches!(cos8_packet(&clipped, &g), Err(Error::Config(_))));
        let coarse = Grid::new(-40.0, 40.0, 64).unwrap();
        assert!(matches!(cos8_packet(&reference_packet(), &coarse), Err(Error::Config(_))));
    }

    #[test]
    fn wavepacket_length_checked() {
        let g = Grid::new(-1.0, 1.0, 8).unwrap();
        let r = Wavepacket::new(g, vec![Complex64::new(1.0, 0.0); 7], Representation::Position, 0.0);
        assert!(matches!(r, Err(Error::Shape(_))));
    }
}
