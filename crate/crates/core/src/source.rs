//! Pointwise access to `omega` and its gradient at arbitrary points, used
//! by the frame integrator between grid nodes.

use core::f64::consts::FRAC_PI_2;

use crate::field::{AssemblyOptions, OmegaField, Reconstruction};
use crate::math::Real;
use crate::profile::{ProfileKind, ProfileSolution};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaSample {
    pub omega: f64,
    pub omega_x: f64,
    pub omega_y: f64,
}

pub trait OmegaSource: Sync {
    fn c0(&self) -> f64;
    /// `None` on (or numerically at) the singular set or outside the data.
    fn sample(&self, x: f64, y: f64) -> Option<OmegaSample>;
}

/// Closed-form evaluation from the profiles, with
/// `omega_x = -f cosh(omega)` and `omega_y = -g cosh(omega)`.
#[derive(Debug, Clone)]
pub struct ProfileSource {
    pub f: ProfileSolution,
    pub g: ProfileSolution,
    rec: Reconstruction,
}

impl ProfileSource {
    pub fn new(f: ProfileSolution, g: ProfileSolution, opts: AssemblyOptions) -> Result<Self> {
        if f.kind != ProfileKind::F || g.kind != ProfileKind::G || f.params != g.params {
            return Err(Error::GridMismatch("expected matching f and g profiles"));
        }
        let rec = Reconstruction::new(&f.params, opts);
        Ok(Self { f, g, rec })
    }
}

impl OmegaSource for ProfileSource {
    fn c0(&self) -> f64 {
        self.rec.c0
    }

    fn sample(&self, x: f64, y: f64) -> Option<OmegaSample> {
        let (f, fx) = self.f.eval(x)?;
        let (g, gy) = self.g.eval(y)?;
        let s = self.rec.sinh_omega(f, fx, g, gy)?;
        let ch = (1.0 + s * s).sqrt();
        Some(OmegaSample { omega: s.asinh(), omega_x: -f * ch, omega_y: -g * ch })
    }
}

/// `sinh(omega) = -tan(alpha x + beta y)` on the strip
/// `|alpha x + beta y| < pi/2`, with `c0 = -(alpha^2 + beta^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegenerateSource {
    pub alpha: f64,
    pub beta: f64,
    pub overflow_guard: f64,
}

impl DegenerateSource {
    pub fn new(alpha: f64, beta: f64) -> Self {
        Self { alpha, beta, overflow_guard: crate::OVERFLOW_GUARD }
    }
}

impl OmegaSource for DegenerateSource {
    fn c0(&self) -> f64 {
        -(self.alpha * self.alpha + self.beta * self.beta)
    }

    fn sample(&self, x: f64, y: f64) -> Option<OmegaSample> {
        let s = self.alpha * x + self.beta * y;
        if s.abs() >= FRAC_PI_2 {
            return None;
        }
        let t = s.tan();
        if t.abs() > self.overflow_guard {
            return None;
        }
        let sec = 1.0 / s.cos();
        Some(OmegaSample { omega: -t.asinh(), omega_x: -self.alpha * sec, omega_y: -self.beta * sec })
    }
}

/// Bicubic Lagrange interpolation of a gridded field, for fields with no
/// closed form (relaxation output, fields read from disk).
#[derive(Debug, Clone)]
pub struct GridSource {
    pub field: OmegaField,
}

impl GridSource {
    pub fn new(field: OmegaField) -> Result<Self> {
        field.spec.require_min(4)?;
        Ok(Self { field })
    }
}

/// Cubic Lagrange weights and their derivatives at offset `t` from node 1
/// of the stencil `{-1, 0, 1, 2}`.
fn cubic_weights(t: f64) -> ([f64; 4], [f64; 4]) {
    let w = [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ];
    let dw = [
        -(3.0 * t * t - 6.0 * t + 2.0) / 6.0,
        (3.0 * t * t - 4.0 * t - 1.0) / 2.0,
        -(3.0 * t * t - 2.0 * t - 2.0) / 2.0,
        (3.0 * t * t - 1.0) / 6.0,
    ];
    (w, dw)
}

fn locate(v: f64, v0: f64, h: f64, n: usize) -> Option<(usize, f64)> {
    let s = (v - v0) / h;
    if !(s >= -1e-9 && s <= (n - 1) as f64 + 1e-9) {
        return None;
    }
    let base = (s.floor() as i64).clamp(1, n as i64 - 3) as usize;
    Some((base - 1, s - base as f64))
}

impl OmegaSource for GridSource {
    fn c0(&self) -> f64 {
        self.field.c0
    }

    fn sample(&self, x: f64, y: f64) -> Option<OmegaSample> {
        let spec = &self.field.spec;
        let (hx, hy) = (spec.hx(), spec.hy());
        let (i0, tx) = locate(x, spec.x0, hx, spec.nx)?;
        let (j0, ty) = locate(y, spec.y0, hy, spec.ny)?;
        let (wx, dwx) = cubic_weights(tx);
        let (wy, dwy) = cubic_weights(ty);
        let (mut w, mut w_x, mut w_y) = (0.0, 0.0, 0.0);
        for b in 0..4 {
            for a in 0..4 {
                let v = self.field.get(i0 + a, j0 + b)?;
                w += wx[a] * wy[b] * v;
                w_x += dwx[a] * wy[b] * v;
                w_y += wx[a] * dwy[b] * v;
            }
        }
        Some(OmegaSample { omega: w, omega_x: w_x / hx, omega_y: w_y / hy })
    }
}
