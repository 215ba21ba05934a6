//! Separated profile ODEs `-f_xx = 2 f^3 + cbar f` (and the same for `g`
//! with `dbar`), their admissible ranges and exact periods.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::Real;
use crate::moduli::{derive_params, DerivedParams, ModuliPoint};
use crate::EPS_DEN;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProfileKind {
    /// `f(x)`, coefficients `(cbar, c)`.
    F,
    /// `g(y)`, coefficients `(dbar, d)`.
    G,
}

impl ProfileKind {
    fn is_g(self) -> bool {
        self == ProfileKind::G
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// Solution through the canonical initial conditions.
    Canonical,
    /// The constant solution `f = 0`; only valid when the first-integral
    /// constant vanishes.
    Trivial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileOptions {
    /// Allowed first-integral drift; integration fails beyond 100x this.
    pub tolerance: f64,
    /// Coordinate at which the canonical initial conditions are imposed.
    pub origin: f64,
    pub branch: Branch,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self { tolerance: 1e-9, origin: 0.0, branch: Branch::Canonical }
    }
}

/// Interval `[m, M]` of attainable `f^2` (or `g^2`).
pub fn admissible_interval(dp: &DerivedParams, kind: ProfileKind) -> Result<(f64, f64)> {
    let r = dp.roots.ok_or(Error::NoRealSolution)?;
    let (lo, hi) = if kind.is_g() { (r.yminus, r.yplus) } else { (r.xminus, r.xplus) };
    let (bar, _) = dp.coefficients(kind.is_g());
    let tol = 1e-14 * (1.0 + bar.abs());
    if hi < -tol {
        return Err(Error::NoRealSolution);
    }
    Ok((lo.max(0.0), hi.max(0.0)))
}

/// Full period of the oscillating profile, by quadrature.
///
/// The substitution `f = sqrt(M) sin t` (when `f` changes sign) or
/// `f^2 = m + (M - m) sin^2 t` (when it keeps its sign) turns the
/// endpoint-singular period integral into the integral of a smooth
/// `pi`-periodic function, for which the trapezoid rule converges
/// geometrically.
pub fn profile_period(dp: &DerivedParams, kind: ProfileKind) -> Result<f64> {
    let (m, big) = admissible_interval(dp, kind)?;
    let r = dp.roots.ok_or(Error::NoRealSolution)?;
    let low_root = if kind.is_g() { r.yminus } else { r.xminus };
    if dp.delta <= EPS_DEN || big - m <= EPS_DEN {
        return Err(Error::NonOscillatory);
    }
    if m == 0.0 {
        // The lower root must be strictly negative, otherwise the orbit
        // through f = 0 is homoclinic.
        if low_root >= -EPS_DEN {
            return Err(Error::NonOscillatory);
        }
        let half = periodic_trapezoid(|t| {
            let s = t.sin();
            1.0 / (big * s * s - low_root).sqrt()
        });
        Ok(2.0 * half)
    } else {
        let half = periodic_trapezoid(|t| {
            let s = t.sin();
            1.0 / (m + (big - m) * s * s).sqrt()
        });
        Ok(half)
    }
}

/// `int_0^pi h(t) dt` for smooth `pi`-periodic `h`, doubling the node
/// count until successive estimates agree to rounding.
fn periodic_trapezoid<H: Fn(f64) -> f64>(h: H) -> f64 {
    let pi = core::f64::consts::PI;
    let mut n = 8usize;
    let mut sum: f64 = (0..n).map(|k| h(pi * k as f64 / n as f64)).sum();
    let mut est = sum * pi / n as f64;
    for _ in 0..24 {
        let odd: f64 = (0..n).map(|k| h(pi * (2 * k + 1) as f64 / (2 * n) as f64)).sum();
        sum += odd;
        n *= 2;
        let next = sum * pi / n as f64;
        let done = (next - est).abs() <= 4.0 * f64::EPSILON * next.abs();
        est = next;
        if done {
            break;
        }
    }
    est
}

/// `(alpha, beta)` of the degenerate solution `sinh(omega) = -tan(alpha x + beta y)`.
///
/// On the curve `delta = 0` (with `c0 < 0`) both profiles are constant,
/// `f^2 = alpha^2 = -cbar / 2` and `g^2 = beta^2 = -dbar / 2`, and
/// `alpha^2 + beta^2 = -c0`.
pub fn degenerate_constants(p: &ModuliPoint) -> Result<(f64, f64)> {
    let dp = derive_params(p)?;
    if p.c0 >= 0.0 {
        return Err(Error::InvalidParams("degenerate solutions need c0 < 0"));
    }
    let scale = 1.0 + dp.cbar * dp.cbar + 4.0 * dp.c.abs();
    if dp.delta.abs() > 1e-12 * scale {
        return Err(Error::NotDegenerate { delta: dp.delta });
    }
    let tol = 1e-12 * (1.0 + p.c0.abs());
    if dp.cbar > tol || dp.dbar > tol {
        return Err(Error::InvalidParams("degenerate point needs cbar <= 0 and dbar <= 0"));
    }
    Ok(((-0.5 * dp.cbar).max(0.0).sqrt(), (-0.5 * dp.dbar).max(0.0).sqrt()))
}

/// Uniformly sampled profile with its derivative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSolution {
    pub kind: ProfileKind,
    pub branch: Branch,
    pub params: DerivedParams,
    /// Coordinate of the first sample.
    pub start: f64,
    pub step: f64,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
    /// `[m, M]` bounds on `values^2`.
    pub interval: (f64, f64),
    /// `max |f_x^2 + f^4 + cbar f^2 + c|` over the samples.
    pub first_integral_drift: f64,
    /// Quadrature period, when the profile oscillates.
    pub period: Option<f64>,
}

#[inline]
fn accel(y: f64, bar: f64) -> f64 {
    -(2.0 * y * y * y + bar * y)
}

/// Increments of one classical RK4 step for `y'' = -2 y^3 - bar y`.
#[inline]
fn rk4_increment(y: f64, v: f64, h: f64, bar: f64) -> (f64, f64) {
    let k1y = v;
    let k1v = accel(y, bar);
    let k2y = v + 0.5 * h * k1v;
    let k2v = accel(y + 0.5 * h * k1y, bar);
    let k3y = v + 0.5 * h * k2v;
    let k3v = accel(y + 0.5 * h * k2y, bar);
    let k4y = v + h * k3v;
    let k4v = accel(y + h * k3y, bar);
    (
        h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y),
        h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
    )
}

/// Compensated running sum, so that roundoff does not swamp the
/// fourth-order truncation error over long ranges.
#[derive(Clone, Copy)]
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

fn march(y0: f64, v0: f64, h: f64, steps: usize, bar: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut y = Kahan { sum: y0, carry: 0.0 };
    let mut v = Kahan { sum: v0, carry: 0.0 };
    out.push((y0, v0));
    for _ in 0..steps {
        let (dy, dv) = rk4_increment(y.sum, v.sum, h, bar);
        y.add(dy);
        v.add(dv);
        out.push((y.sum, v.sum));
    }
    out
}

/// Samples the profile on `origin + k * step` covering `x_range`.
pub fn integrate_profile(
    dp: &DerivedParams,
    kind: ProfileKind,
    x_range: (f64, f64),
    step: f64,
    opts: &ProfileOptions,
) -> Result<ProfileSolution> {
    let (x0, x1) = x_range;
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParams("profile step must be positive"));
    }
    if !(x0.is_finite() && x1.is_finite() && x1 >= x0 && opts.origin.is_finite()) {
        return Err(Error::InvalidParams("profile range must be finite and ordered"));
    }
    let interval = admissible_interval(dp, kind)?;
    let (m, big) = interval;
    let (bar, cc) = dp.coefficients(kind.is_g());
    let (y0, v0) = match opts.branch {
        Branch::Trivial => {
            if cc.abs() > EPS_DEN {
                return Err(Error::InvalidParams("the trivial branch needs a zero first-integral constant"));
            }
            (0.0, 0.0)
        }
        Branch::Canonical if m == 0.0 && cc < 0.0 => (0.0, (-cc).sqrt()),
        Branch::Canonical => (big.sqrt(), 0.0),
    };

    let origin = opts.origin;
    let kmin = ((x0.min(origin) - origin) / step).floor() as i64;
    let kmax = ((x1.max(origin) - origin) / step).ceil() as i64;
    let back = march(y0, v0, -step, (-kmin) as usize, bar);
    let fwd = march(y0, v0, step, kmax as usize, bar);
    let n = (kmax - kmin + 1) as usize;
    let mut values = Vec::with_capacity(n);
    let mut derivs = Vec::with_capacity(n);
    for &(y, v) in back.iter().rev().chain(fwd.iter().skip(1)) {
        values.push(y);
        derivs.push(v);
    }

    let first_integral_drift = values
        .iter()
        .zip(&derivs)
        .map(|(&y, &v)| first_integral(y, v, bar, cc).abs())
        .fold(0.0, f64::max);
    let limit = 100.0 * opts.tolerance;
    if !(first_integral_drift <= limit) {
        return Err(Error::DriftExceeded { drift: first_integral_drift, limit });
    }
    let period = match opts.branch {
        Branch::Trivial => None,
        Branch::Canonical => profile_period(dp, kind).ok(),
    };
    Ok(ProfileSolution {
        kind,
        branch: opts.branch,
        params: *dp,
        start: origin + kmin as f64 * step,
        step,
        values,
        derivs,
        interval,
        first_integral_drift,
        period,
    })
}

#[inline]
fn first_integral(y: f64, v: f64, bar: f64, c: f64) -> f64 {
    let y2 = y * y;
    v * v + y2 * y2 + bar * y2 + c
}

impl ProfileSolution {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn x(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }

    pub fn end(&self) -> f64 {
        self.x(self.len() - 1)
    }

    /// `(cbar, c)` or `(dbar, d)`.
    pub fn coefficients(&self) -> (f64, f64) {
        self.params.coefficients(self.kind.is_g())
    }

    /// Value and derivative at any `x` in range, by one RK4 substep from
    /// the nearest sample (fourth-order accurate, consistent with the
    /// samples).
    pub fn eval(&self, x: f64) -> Option<(f64, f64)> {
        let t = (x - self.start) / self.step;
        let last = self.len() - 1;
        if !(t >= -1e-9 && t <= last as f64 + 1e-9) {
            return None;
        }
        let k = (t.round().max(0.0) as usize).min(last);
        let h = x - self.x(k);
        if h == 0.0 {
            return Some((self.values[k], self.derivs[k]));
        }
        let (bar, _) = self.coefficients();
        let (dy, dv) = rk4_increment(self.values[k], self.derivs[k], h, bar);
        Some((self.values[k] + dy, self.derivs[k] + dv))
    }

    /// First-integral residual at sample `k`.
    pub fn residual(&self, k: usize) -> f64 {
        let (bar, c) = self.coefficients();
        first_integral(self.values[k], self.derivs[k], bar, c)
    }

    /// Period measured from successive maxima (downward zero crossings of
    /// the derivative), averaged over all crossings in range.
    pub fn measured_period(&self) -> Option<f64> {
        let mut crossings = Vec::new();
        for k in 0..self.len().saturating_sub(1) {
            let (a, b) = (self.derivs[k], self.derivs[k + 1]);
            if a > 0.0 && b <= 0.0 {
                let (mut lo, mut hi) = (self.x(k), self.x(k + 1));
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    match self.eval(mid) {
                        Some((_, v)) if v > 0.0 => lo = mid,
                        _ => hi = mid,
                    }
                }
                crossings.push(0.5 * (lo + hi));
            }
        }
        if crossings.len() < 2 {
            return None;
        }
        Some((crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64)
    }

    /// Smallest and largest `values^2`.
    pub fn square_range(&self) -> (f64, f64) {
        self.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            let s = v * v;
            (lo.min(s), hi.max(s))
        })
    }
}
