//! Repulsive barrier family and its momentum-transfer matrix elements
//!
//! ```text
//! V(q) = (1/√2π) ∫ dx V(x) e^{iqx}
//! ```
//!
//! All supported barriers are real and even, so `V(q)` is real and even.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fraction of the barrier height below which the smooth barrier's right
/// flank counts as "outside" for transmission diagnostics.
pub const TRANSMITTED_CUT_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Potential {
    /// `V0` on `|x| < L/2`.
    Rectangular { v0: f64, width: f64 },
    /// `(V0/2)[tanh(α(x + L/2)) − tanh(α(x − L/2))]`.
    SmoothTanh { v0: f64, width: f64, alpha: f64 },
    /// `g·δ(x)`, the `L → 0` limit at fixed `g = V0·L`.
    NarrowDelta { strength: f64 },
}

impl Potential {
    pub fn validate(&self) -> Result<()> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(
                problems
                    .into_iter()
                    .map(|(f, m)| format!("{f}: {m}"))
                    .collect::<Vec<_>>()
                    .join("; "),
            ))
        }
    }

    /// `(field, message)` for every violated parameter constraint.
    pub fn problems(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let mut non_negative = |name: &'static str, v: f64| {
            if !(v.is_finite() && v >= 0.0) {
                out.push((name, format!("must be finite and non-negative (repulsive barriers only), got {v}")));
            }
        };
        match *self {
            Potential::Rectangular { v0, .. } | Potential::SmoothTanh { v0, .. } => {
                non_negative("v0", v0)
            }
            Potential::NarrowDelta { strength } => non_negative("strength", strength),
        }
        if let Potential::Rectangular { width, .. } | Potential::SmoothTanh { width, .. } = *self {
            if !(width.is_finite() && width > 0.0) {
                out.push(("width", format!("must be positive, got {width}")));
            }
        }
        if let Potential::SmoothTanh { alpha, .. } = *self {
            if !(alpha.is_finite() && alpha > 0.0) {
                out.push(("alpha", format!("must be positive, got {alpha}")));
            }
        }
        out
    }

    /// Barrier height `V0`, or the strength `g` for the delta barrier.
    pub fn height(&self) -> f64 {
        match *self {
            Potential::Rectangular { v0, .. } | Potential::SmoothTanh { v0, .. } => v0,
            Potential::NarrowDelta { strength } => strength,
        }
    }

    pub fn width(&self) -> Option<f64> {
        match *self {
            Potential::Rectangular { width, .. } | Potential::SmoothTanh { width, .. } => Some(width),
            Potential::NarrowDelta { .. } => None,
        }
    }

    /// Same shape with a different height and width. The delta barrier has
    /// no width and keeps its strength as `v0·width`.
    pub fn reshaped(&self, v0: f64, width: f64) -> Self {
        match *self {
            Potential::Rectangular { .. } => Potential::Rectangular { v0, width },
            Potential::SmoothTanh { alpha, .. } => Potential::SmoothTanh { v0, width, alpha },
            Potential::NarrowDelta { .. } => Potential::NarrowDelta {
                strength: v0 * width,
            },
        }
    }

    pub fn eval_position(&self, x: f64) -> Result<f64> {
        match *self {
            Potential::Rectangular { v0, width } => {
                let h = width / 2.0;
                Ok(if x.abs() < h {
                    v0
                } else if x.abs() == h {
                    v0 / 2.0
                } else {
                    0.0
                })
            }
            Potential::SmoothTanh { v0, width, alpha } => {
                let h = width / 2.0;
                Ok(0.5 * v0 * ((alpha * (x + h)).tanh() - (alpha * (x - h)).tanh()))
            }
            Potential::NarrowDelta { .. } => Err(Error::Unsupported(
                "a delta barrier has no pointwise value; it exists only through its momentum elements".into(),
            )),
        }
    }

    /// `V(q)` for momentum transfer `q = p − p′`.
    pub fn momentum_element(&self, q: f64) -> Complex64 {
        Complex64::new(self.momentum_element_re(q), 0.0)
    }

    pub(crate) fn momentum_element_re(&self, q: f64) -> f64 {
        let root_2pi = (2.0 * PI).sqrt();
        match *self {
            Potential::Rectangular { v0, width } => {
                v0 * width / root_2pi * sinc(q * width / 2.0)
            }
            Potential::SmoothTanh { v0, width, alpha } => {
                // (V0/α)·√(π/2)·sin(qL/2)/sinh(πq/2α), continued to q = 0.
                let z = PI * q / (2.0 * alpha);
                v0 * width / root_2pi * sinc(q * width / 2.0) * z_over_sinh(z)
            }
            Potential::NarrowDelta { strength } => strength / root_2pi,
        }
    }

    /// Right edge of the barrier for transmission bookkeeping: `L/2` for the
    /// rectangle, the point where the smooth barrier drops below
    /// [`TRANSMITTED_CUT_FRACTION`]·V0, and 0 for the delta barrier.
    pub fn transmitted_cut(&self) -> f64 {
        match *self {
            Potential::Rectangular { width, .. } => width / 2.0,
            Potential::SmoothTanh { width, alpha, .. } => {
                let h = width / 2.0;
                let shape = |x: f64| 0.5 * ((alpha * (x + h)).tanh() - (alpha * (x - h)).tanh());
                if shape(0.0) <= TRANSMITTED_CUT_FRACTION {
                    return 0.0;
                }
                // shape is decreasing on x ≥ 0.
                let (mut lo, mut hi) = (0.0, h + 50.0 / alpha);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if shape(mid) > TRANSMITTED_CUT_FRACTION {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                hi
            }
            Potential::NarrowDelta { .. } => 0.0,
        }
    }
}

/// sin(z)/z
fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        let z2 = z * z;
        1.0 - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

/// z/sinh(z), finite for all real z and decaying like 2|z|e^{−|z|}.
fn z_over_sinh(z: f64) -> f64 {
    let a = z.abs();
    if a < 1e-4 {
        1.0 - a * a / 6.0
    } else if a > 20.0 {
        2.0 * a * (-a).exp() / (1.0 - (-2.0 * a).exp())
    } else {
        a / a.sinh()
    }
}
