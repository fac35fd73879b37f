//! Independent oracles shared by the integration and acceptance tests.

#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::PathBuf;

use nalgebra::DMatrix;
use salpeter::scenario::Scenario;
use salpeter::Complex64;

/// Gauss-Legendre nodes and weights on [−1, 1], by Newton iteration on the
/// three-term recurrence.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (1..=n)
        .map(|i| {
            let mut x = (PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Composite Gauss-Legendre integral of `f` over [a, b].
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let rule = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let mid = a + (k as f64 + 0.5) * h;
            rule.iter().map(|&(x, w)| w * f(mid + 0.5 * h * x)).sum::<f64>() * 0.5 * h
        })
        .sum()
}

/// (1/√2π)∫ V0 e^{−iqx} dx over |x| < L/2, by quadrature.
pub fn rectangular_ft(v0: f64, width: f64, q: f64) -> f64 {
    let h = width / 2.0;
    v0 * integrate(|x| (q * x).cos(), -h, h, 40, 20) / (2.0 * PI).sqrt()
}

/// (1/√2π)∫ V(x) e^{−iqx} dx for V = (V0/2)[tanh α(x+L/2) − tanh α(x−L/2)],
/// by quadrature over a window outside which V < 1e−30·V0.
pub fn smooth_tanh_ft(v0: f64, width: f64, alpha: f64, q: f64) -> f64 {
    let h = width / 2.0;
    let v = |x: f64| 0.5 * v0 * ((alpha * (x + h)).tanh() - (alpha * (x - h)).tanh());
    let reach = h + 36.0 / alpha;
    let panels = ((2.0 * reach) / (0.25 / alpha).min(0.05)).ceil() as usize;
    integrate(|x| v(x) * (q * x).cos(), -reach, reach, panels, 20) / (2.0 * PI).sqrt()
}

/// Number of eigenvalues of the Hermitian matrix `a` below `lambda`: sign
/// changes in the sequence of leading principal minors of a − λI, computed
/// as ratios of successive characteristic polynomials (the LDLᴴ pivots).
pub fn count_below(a: &DMatrix<Complex64>, lambda: f64) -> usize {
    let n = a.nrows();
    let mut m = a.clone();
    for i in 0..n {
        m[(i, i)] -= lambda;
    }
    let mut below = 0;
    for k in 0..n {
        let mut pivot = m[(k, k)].re;
        if pivot == 0.0 {
            pivot = -1e-300;
        }
        if pivot < 0.0 {
            below += 1;
        }
        for i in k + 1..n {
            let l = m[(i, k)] / pivot;
            for j in k + 1..n {
                let r = m[(k, j)];
                m[(i, j)] -= l * r;
            }
        }
    }
    below
}

/// Eigenvalues of a Hermitian matrix by bisection on [`count_below`].
pub fn bisection_eigenvalues(a: &DMatrix<Complex64>) -> Vec<f64> {
    let n = a.nrows();
    // Gershgorin bound.
    let bound = (0..n)
        .map(|i| (0..n).map(|j| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
        + 1.0;
    (0..n)
        .map(|k| {
            let (mut lo, mut hi) = (-bound, bound);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                if count_below(a, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

pub fn scenario_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

/// Every bundled scenario, sorted by file name.
pub fn bundled_scenarios() -> Vec<(String, Scenario)> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(scenario_dir())
        .expect("scenario directory")
        .map(|e| e.expect("directory entry").path())
        .filter(|p| p.extension().is_some_and(|e| e == "scenario"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            let s = Scenario::load(&p, &[]).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            (name, s)
        })
        .collect()
}

pub fn bundled(name: &str) -> Scenario {
    Scenario::load(&scenario_dir().join(format!("{name}.scenario")), &[]).expect("bundled scenario")
}
