//! The conformal exponent `omega` on a grid: assembly from profiles, the
//! singular set, the sinh-Gordon residual `lap(omega) + c0 sinh(omega) cosh(omega)`,
//! level-curve curvatures and a Newton relaxation solver.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;
use serde::{Deserialize, Serialize};

use crate::banded::Band;
use crate::error::{Error, Result};
use crate::grid::{dilate, stencil_ok, GridSpec, ScalarGrid, Stencil};
use crate::math::Real;
use crate::moduli::DerivedParams;
use crate::par::map_range;
use crate::profile::{ProfileKind, ProfileSolution};
use crate::{EPS_DEN, OVERFLOW_GUARD};

fn sq(v: f64) -> f64 {
    v * v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Reconstructed,
    Degenerate,
    Relaxation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssemblyOptions {
    pub eps_den: f64,
    pub overflow_guard: f64,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self { eps_den: EPS_DEN, overflow_guard: OVERFLOW_GUARD }
    }
}

/// `omega` sampled on a grid. Singular nodes hold `NaN`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaField {
    pub spec: GridSpec,
    pub c0: f64,
    pub provenance: Provenance,
    pub omega: Vec<f64>,
    pub sinh_omega: Vec<f64>,
    pub singular_mask: Vec<bool>,
}

impl OmegaField {
    /// Field from node values, `None` marking singular nodes.
    pub fn from_values(spec: GridSpec, c0: f64, provenance: Provenance, values: &[Option<f64>]) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::GridMismatch("value count does not match the grid"));
        }
        let mut omega = vec![f64::NAN; spec.len()];
        let mut sinh_omega = vec![f64::NAN; spec.len()];
        let mut singular_mask = vec![true; spec.len()];
        for (k, v) in values.iter().enumerate() {
            if let Some(w) = v.filter(|w| w.is_finite()) {
                omega[k] = w;
                sinh_omega[k] = w.sinh();
                singular_mask[k] = false;
            }
        }
        Ok(Self { spec, c0, provenance, omega, sinh_omega, singular_mask })
    }

    /// Field sampled from a closed-form expression.
    pub fn from_fn<W: Fn(f64, f64) -> f64>(spec: GridSpec, c0: f64, provenance: Provenance, w: W) -> Self {
        let values: Vec<Option<f64>> =
            (0..spec.len()).map(|k| Some(w(spec.x(k % spec.nx), spec.y(k / spec.nx)))).collect();
        Self::from_values(spec, c0, provenance, &values).expect("length matches by construction")
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let k = self.spec.idx(i, j);
        (!self.singular_mask[k]).then_some(self.omega[k])
    }

    pub fn values(&self) -> Vec<Option<f64>> {
        (0..self.spec.len()).map(|k| (!self.singular_mask[k]).then_some(self.omega[k])).collect()
    }

    pub fn singular_count(&self) -> usize {
        self.singular_mask.iter().filter(|&&b| b).count()
    }

    /// Singular mask grown by one node, for centred stencils.
    pub fn dilated_mask(&self) -> Vec<bool> {
        dilate(&self.spec, &self.singular_mask)
    }

    /// Centred-difference gradient at an interior node whose stencil avoids
    /// the singular set.
    pub(crate) fn gradient(&self, i: usize, j: usize) -> (f64, f64) {
        let s = Stencil::new(&self.spec, &self.omega);
        (s.dx(i, j), s.dy(i, j))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualStats {
    pub linf: f64,
    /// Root mean square.
    pub l2: f64,
    pub grid_h: f64,
    pub count: usize,
}

impl ResidualStats {
    pub fn from_values<I: IntoIterator<Item = f64>>(values: I, grid_h: f64) -> Self {
        let (mut linf, mut sq, mut count) = (0.0f64, 0.0, 0usize);
        for v in values {
            linf = linf.max(v.abs());
            sq += v * v;
            count += 1;
        }
        let l2 = if count == 0 { 0.0 } else { (sq / count as f64).sqrt() };
        Self { linf, l2, grid_h, count }
    }

    pub fn from_grid(g: &ScalarGrid) -> Self {
        Self::from_values(g.values.iter().flatten().copied(), g.spec.hx().max(g.spec.hy()))
    }
}

/// The two expressions for `sinh(omega)` in terms of the profiles:
/// `(f_x + g_y) / (c0 + f^2 + g^2)` and `(g^2 - f^2 - a) / (f_x - g_y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reconstruction {
    pub c0: f64,
    pub a: f64,
    pub opts: AssemblyOptions,
}

impl Reconstruction {
    pub fn new(dp: &DerivedParams, opts: AssemblyOptions) -> Self {
        Self { c0: dp.c0, a: dp.a, opts }
    }

    /// `sinh(omega)`, or `None` on the singular set.
    ///
    /// Whichever denominator is larger in magnitude is used: both
    /// expressions agree exactly, and near the zero set of one of them the
    /// other is far better conditioned.
    pub fn sinh_omega(&self, f: f64, fx: f64, g: f64, gy: f64) -> Option<f64> {
        let d1 = self.c0 + f * f + g * g;
        let d2 = fx - gy;
        let eps = self.opts.eps_den;
        let s = if d1.abs() >= d2.abs() && d1.abs() > eps {
            (fx + gy) / d1
        } else if d2.abs() > eps {
            (g * g - f * f - self.a) / d2
        } else {
            return None;
        };
        (s.abs() <= self.opts.overflow_guard).then_some(s)
    }
}

fn check_profiles(fsol: &ProfileSolution, gsol: &ProfileSolution, spec: &GridSpec) -> Result<()> {
    if fsol.kind != ProfileKind::F || gsol.kind != ProfileKind::G {
        return Err(Error::GridMismatch("expected an f profile and a g profile"));
    }
    if fsol.params != gsol.params {
        return Err(Error::GridMismatch("profiles were built from different parameters"));
    }
    let slack = 1e-9 * (1.0 + spec.x1.abs().max(spec.y1.abs()));
    if spec.x0 < fsol.start - slack || spec.x1 > fsol.end() + slack {
        return Err(Error::GridMismatch("grid x-range exceeds the f profile"));
    }
    if spec.y0 < gsol.start - slack || spec.y1 > gsol.end() + slack {
        return Err(Error::GridMismatch("grid y-range exceeds the g profile"));
    }
    Ok(())
}

fn sample_axis(sol: &ProfileSolution, n: usize, coord: impl Fn(usize) -> f64) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let x = coord(i).clamp(sol.start, sol.end());
            sol.eval(x).expect("clamped into range")
        })
        .collect()
}

/// `omega` from a pair of profiles.
pub fn assemble_omega(
    fsol: &ProfileSolution,
    gsol: &ProfileSolution,
    spec: &GridSpec,
    opts: &AssemblyOptions,
) -> Result<OmegaField> {
    check_profiles(fsol, gsol, spec)?;
    let rec = Reconstruction::new(&fsol.params, *opts);
    let fx = sample_axis(fsol, spec.nx, |i| spec.x(i));
    let gy = sample_axis(gsol, spec.ny, |j| spec.y(j));
    let mut mask = singular_set(&fsol.params, fsol, gsol, spec)?;
    let rows = map_range(spec.ny, |j| {
        let (g, g_y) = gy[j];
        fx.iter().map(|&(f, f_x)| rec.sinh_omega(f, f_x, g, g_y)).collect::<Vec<_>>()
    });
    let mut omega = vec![f64::NAN; spec.len()];
    let mut sinh_omega = vec![f64::NAN; spec.len()];
    for (j, row) in rows.into_iter().enumerate() {
        for (i, s) in row.into_iter().enumerate() {
            let k = spec.idx(i, j);
            match s {
                Some(s) if !mask[k] => {
                    sinh_omega[k] = s;
                    omega[k] = s.asinh();
                }
                _ => mask[k] = true,
            }
        }
    }
    for k in 0..spec.len() {
        if mask[k] {
            omega[k] = f64::NAN;
            sinh_omega[k] = f64::NAN;
        }
    }
    if mask.iter().all(|&b| b) {
        return Err(Error::AllSingular);
    }
    Ok(OmegaField { spec: *spec, c0: fsol.params.c0, provenance: Provenance::Reconstructed, omega, sinh_omega, singular_mask: mask })
}

/// `sinh(omega) = -tan(alpha x + beta y)` with `alpha^2 + beta^2 = 1`
/// (`c0 = -1`), kept on the central strip `|alpha x + beta y| < pi/2`.
pub fn assemble_omega_degenerate(alpha: f64, beta: f64, spec: &GridSpec, opts: &AssemblyOptions) -> Result<OmegaField> {
    if !(alpha.is_finite() && beta.is_finite()) || (alpha * alpha + beta * beta - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParams("degenerate constants need alpha^2 + beta^2 = 1"));
    }
    let phase = |i: usize, j: usize| alpha * spec.x(i) + beta * spec.y(j);
    let mut mask = vec![false; spec.len()];
    // Cells meeting |s| = pi/2: s is linear, so its extremes sit at corners.
    for j in 0..spec.ny - 1 {
        for i in 0..spec.nx - 1 {
            let s = [phase(i, j), phase(i + 1, j), phase(i, j + 1), phase(i + 1, j + 1)];
            let lo = s.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if lo <= -FRAC_PI_2 || hi >= FRAC_PI_2 {
                for k in [spec.idx(i, j), spec.idx(i + 1, j), spec.idx(i, j + 1), spec.idx(i + 1, j + 1)] {
                    mask[k] = true;
                }
            }
        }
    }
    let mut omega = vec![f64::NAN; spec.len()];
    let mut sinh_omega = vec![f64::NAN; spec.len()];
    for j in 0..spec.ny {
        for i in 0..spec.nx {
            let k = spec.idx(i, j);
            let s = -phase(i, j).tan();
            if mask[k] || s.abs() > opts.overflow_guard {
                mask[k] = true;
            } else {
                sinh_omega[k] = s;
                omega[k] = s.asinh();
            }
        }
    }
    if mask.iter().all(|&b| b) {
        return Err(Error::AllSingular);
    }
    Ok(OmegaField { spec: *spec, c0: -1.0, provenance: Provenance::Degenerate, omega, sinh_omega, singular_mask: mask })
}

/// Candidate extremes of `sol^2` on `[a, b]`: the endpoints and every zero
/// of `sol` or `sol'` inside.
fn square_extremes(sol: &ProfileSolution, a: f64, b: f64) -> Vec<(f64, f64)> {
    let ev = |x: f64| sol.eval(x.clamp(sol.start, sol.end())).expect("clamped into range");
    let mut pts = vec![a];
    let k0 = ((a - sol.start) / sol.step).floor().max(0.0) as usize + 1;
    let mut k = k0;
    while k < sol.len() && sol.x(k) < b {
        pts.push(sol.x(k));
        k += 1;
    }
    pts.push(b);
    let mut out = vec![(a, sq(ev(a).0)), (b, sq(ev(b).0))];
    for w in pts.windows(2) {
        let (p, q) = (ev(w[0]), ev(w[1]));
        for comp in 0..2 {
            let pick = |v: (f64, f64)| if comp == 0 { v.0 } else { v.1 };
            if pick(p) == 0.0 {
                out.push((w[0], p.0 * p.0));
            } else if pick(p) * pick(q) < 0.0 {
                let (mut lo, mut hi) = (w[0], w[1]);
                let s_lo = pick(p).signum();
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if pick(ev(mid)).signum() == s_lo {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let x = 0.5 * (lo + hi);
                // The square vanishes exactly at a sign change of the profile.
                let v = if comp == 0 { 0.0 } else { sq(ev(x).0) };
                out.push((x, v));
            }
        }
    }
    out
}

#[derive(Clone, Copy)]
struct AxisRange {
    lo: (f64, f64),
    hi: (f64, f64),
}

fn axis_ranges(sol: &ProfileSolution, coords: &[f64]) -> Vec<(AxisRange, Vec<f64>)> {
    coords
        .windows(2)
        .map(|w| {
            let ext = square_extremes(sol, w[0], w[1]);
            let lo = ext.iter().cloned().fold((w[0], f64::INFINITY), |m, e| if e.1 < m.1 { e } else { m });
            let hi = ext.iter().cloned().fold((w[0], f64::NEG_INFINITY), |m, e| if e.1 > m.1 { e } else { m });
            let mut xs: Vec<f64> = ext.iter().map(|e| e.0).collect();
            xs.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
            (AxisRange { lo, hi }, xs)
        })
        .collect()
}

/// Nodes adjacent to the singular set
/// `D = {c0 + f^2 + g^2 = 0, f_x + g_y != 0}`.
///
/// A cell is flagged when `D` meets it; its four corners are then marked.
/// Points of `{c0 + f^2 + g^2 = 0}` where `f_x + g_y` vanishes but
/// `f_x - g_y` does not are removable and do not flag the cell.
pub fn singular_set(dp: &DerivedParams, fsol: &ProfileSolution, gsol: &ProfileSolution, spec: &GridSpec) -> Result<Vec<bool>> {
    check_profiles(fsol, gsol, spec)?;
    if fsol.params != *dp {
        return Err(Error::GridMismatch("profiles do not match the parameters"));
    }
    let c0 = dp.c0;
    let xs: Vec<f64> = (0..spec.nx).map(|i| spec.x(i)).collect();
    let ys: Vec<f64> = (0..spec.ny).map(|j| spec.y(j)).collect();
    let fr = axis_ranges(fsol, &xs);
    let gr = axis_ranges(gsol, &ys);
    let evf = |x: f64| fsol.eval(x.clamp(fsol.start, fsol.end())).expect("clamped");
    let evg = |y: f64| gsol.eval(y.clamp(gsol.start, gsol.end())).expect("clamped");
    let h = |x: f64, y: f64| c0 + sq(evf(x).0) + sq(evg(y).0);
    // Tangency is only detectable up to the profiles' own first-integral error.
    let tol = 1e-13 * (1.0 + c0.abs()) + 10.0 * (fsol.first_integral_drift + gsol.first_integral_drift);
    let nonremovable = |x: f64, y: f64| {
        let ((_, fx), (_, gy)) = (evf(x), evg(y));
        let (n1, d2) = (fx + gy, fx - gy);
        !(n1.abs() <= 1e-6 * d2.abs() && d2.abs() > EPS_DEN)
    };
    let bisect = |p: (f64, f64), q: (f64, f64)| {
        let (mut lo, mut hi) = (p, q);
        let s_lo = h(lo.0, lo.1) < 0.0;
        for _ in 0..60 {
            let mid = (0.5 * (lo.0 + hi.0), 0.5 * (lo.1 + hi.1));
            if (h(mid.0, mid.1) < 0.0) == s_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (0.5 * (lo.0 + hi.0), 0.5 * (lo.1 + hi.1))
    };

    let rows = map_range(spec.ny - 1, |j| {
        let (g_rng, g_pts) = &gr[j];
        let mut flagged = Vec::new();
        for i in 0..spec.nx - 1 {
            let (f_rng, f_pts) = &fr[i];
            let hmin = c0 + f_rng.lo.1 + g_rng.lo.1;
            let hmax = c0 + f_rng.hi.1 + g_rng.hi.1;
            if hmin > tol || hmax < -tol {
                continue;
            }
            let mut cands: Vec<(f64, f64)> = Vec::new();
            if hmin.abs() <= tol {
                cands.push((f_rng.lo.0, g_rng.lo.0));
            }
            if hmax.abs() <= tol {
                cands.push((f_rng.hi.0, g_rng.hi.0));
            }
            if hmin < -tol && hmax > tol {
                cands.push(bisect((f_rng.lo.0, g_rng.lo.0), (f_rng.hi.0, g_rng.hi.0)));
            }
            // Crossings along the four edges, between consecutive extremal
            // points so each piece is monotone.
            let edges: [(&Vec<f64>, Option<f64>, Option<f64>); 4] = [
                (f_pts, None, Some(ys[j])),
                (f_pts, None, Some(ys[j + 1])),
                (g_pts, Some(xs[i]), None),
                (g_pts, Some(xs[i + 1]), None),
            ];
            for (pts, fixed_x, fixed_y) in edges {
                let at = |t: f64| (fixed_x.unwrap_or(t), fixed_y.unwrap_or(t));
                for w in pts.windows(2) {
                    let (p, q) = (at(w[0]), at(w[1]));
                    let (hp, hq) = (h(p.0, p.1), h(q.0, q.1));
                    if hp.abs() <= tol {
                        cands.push(p);
                    }
                    if hq.abs() <= tol {
                        cands.push(q);
                    }
                    if (hp < -tol && hq > tol) || (hp > tol && hq < -tol) {
                        cands.push(bisect(p, q));
                    }
                }
            }
            if cands.iter().any(|&(x, y)| nonremovable(x, y)) {
                flagged.push(i);
            }
        }
        flagged
    });
    let mut mask = vec![false; spec.len()];
    for (j, row) in rows.into_iter().enumerate() {
        for i in row {
            for k in [spec.idx(i, j), spec.idx(i + 1, j), spec.idx(i, j + 1), spec.idx(i + 1, j + 1)] {
                mask[k] = true;
            }
        }
    }
    Ok(mask)
}

/// Residual of `lap(omega) + c0 sinh(omega) cosh(omega)` with the
/// five-point Laplacian, at interior nodes clear of the singular set.
pub fn sinh_gordon_residual(field: &OmegaField) -> Result<ResidualStats> {
    Ok(ResidualStats::from_grid(&sinh_gordon_residual_grid(field)?))
}

pub fn sinh_gordon_residual_grid(field: &OmegaField) -> Result<ScalarGrid> {
    let spec = &field.spec;
    spec.require_min(5)?;
    let dil = field.dilated_mask();
    let st = Stencil::new(spec, &field.omega);
    let mut out = ScalarGrid::undefined(*spec);
    for j in 1..spec.ny - 1 {
        for i in 1..spec.nx - 1 {
            if stencil_ok(spec, &dil, i, j) {
                let k = spec.idx(i, j);
                let w = field.omega[k];
                out.values[k] = Some(st.laplacian(i, j) + field.c0 * field.sinh_omega[k] * w.cosh());
            }
        }
    }
    Ok(out)
}

/// Geodesic curvatures of the horizontal level curves, `-omega_y / cosh(omega)`,
/// and of the vertical ones, `(omega_x / cosh(omega)) coth(omega)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelCurvatures {
    pub k_h: ScalarGrid,
    /// Undefined where `|omega| < EPS_DEN`.
    pub k_v: ScalarGrid,
}

pub fn level_curvatures(field: &OmegaField) -> LevelCurvatures {
    let spec = &field.spec;
    let mut k_h = ScalarGrid::undefined(*spec);
    let mut k_v = ScalarGrid::undefined(*spec);
    let dil = field.dilated_mask();
    for j in 1..spec.ny.saturating_sub(1) {
        for i in 1..spec.nx.saturating_sub(1) {
            if !stencil_ok(spec, &dil, i, j) {
                continue;
            }
            let k = spec.idx(i, j);
            let w = field.omega[k];
            let (wx, wy) = field.gradient(i, j);
            let ch = w.cosh();
            k_h.values[k] = Some(-wy / ch);
            if w.abs() >= EPS_DEN {
                k_v.values[k] = Some(wx / ch / w.tanh());
            }
        }
    }
    LevelCurvatures { k_h, k_v }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaxOptions {
    pub max_iterations: usize,
    /// Convergence threshold on the max-norm of the Newton update.
    pub tolerance: f64,
    /// Smallest damping factor tried by step halving.
    pub min_damping: f64,
}

impl Default for RelaxOptions {
    fn default() -> Self {
        Self { max_iterations: 100, tolerance: 1e-12, min_damping: 1.0 / 1024.0 }
    }
}

/// Transfinite (Coons) interpolation of the boundary values into the interior.
fn coons_patch(spec: &GridSpec, b: &[f64]) -> Vec<f64> {
    let (nx, ny) = (spec.nx, spec.ny);
    let mut w = b.to_vec();
    let at = |i: usize, j: usize| b[spec.idx(i, j)];
    for j in 1..ny - 1 {
        let t = j as f64 / (ny - 1) as f64;
        for i in 1..nx - 1 {
            let s = i as f64 / (nx - 1) as f64;
            let ruled = (1.0 - s) * at(0, j) + s * at(nx - 1, j) + (1.0 - t) * at(i, 0) + t * at(i, ny - 1);
            let bilinear = (1.0 - s) * (1.0 - t) * at(0, 0)
                + s * (1.0 - t) * at(nx - 1, 0)
                + (1.0 - s) * t * at(0, ny - 1)
                + s * t * at(nx - 1, ny - 1);
            w[spec.idx(i, j)] = ruled - bilinear;
        }
    }
    w
}

fn discrete_residual(spec: &GridSpec, c0: f64, w: &[f64], out: &mut [f64]) {
    let m = spec.nx - 2;
    let st = Stencil::new(spec, w);
    for j in 1..spec.ny - 1 {
        for i in 1..spec.nx - 1 {
            let v = w[spec.idx(i, j)];
            out[(j - 1) * m + (i - 1)] = st.laplacian(i, j) + c0 * v.sinh() * v.cosh();
        }
    }
}

fn rms(v: &[f64]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() / v.len().max(1) as f64).sqrt()
}

/// Dirichlet problem for the sinh-Gordon equation by damped Newton
/// iteration on the five-point discretization.
///
/// `boundary` holds one value per node; only the boundary ring is read.
/// The Newton systems are banded with half-bandwidth `nx - 2`; for
/// `c0 <= 0` they are negative definite and factored by Cholesky.
pub fn solve_sinh_gordon(c0: f64, spec: &GridSpec, boundary: &[f64], opts: &RelaxOptions) -> Result<OmegaField> {
    spec.require_min(5)?;
    if boundary.len() != spec.len() {
        return Err(Error::GridMismatch("boundary data does not match the grid"));
    }
    let ring_ok = (0..spec.len()).all(|k| spec.is_interior(k % spec.nx, k / spec.nx) || boundary[k].is_finite());
    if !ring_ok || !c0.is_finite() {
        return Err(Error::InvalidParams("boundary values must be finite"));
    }
    let (m, n) = (spec.nx - 2, spec.ny - 2);
    let unknowns = m * n;
    let (ihx2, ihy2) = (1.0 / (spec.hx() * spec.hx()), 1.0 / (spec.hy() * spec.hy()));
    let mut w = coons_patch(spec, boundary);
    let mut r = vec![0.0; unknowns];
    let mut trial_r = vec![0.0; unknowns];
    discrete_residual(spec, c0, &w, &mut r);
    let mut last_update = f64::INFINITY;
    for _ in 0..opts.max_iterations {
        let mut jac = Band::zeros(unknowns, m, m);
        for jj in 0..n {
            for ii in 0..m {
                let row = jj * m + ii;
                let v = w[spec.idx(ii + 1, jj + 1)];
                jac.set(row, row, -2.0 * (ihx2 + ihy2) + c0 * (2.0 * v).cosh());
                if ii > 0 {
                    jac.set(row, row - 1, ihx2);
                }
                if ii + 1 < m {
                    jac.set(row, row + 1, ihx2);
                }
                if jj > 0 {
                    jac.set(row, row - m, ihy2);
                }
                if jj + 1 < n {
                    jac.set(row, row + m, ihy2);
                }
            }
        }
        let mut delta: Vec<f64> = r.iter().map(|x| -x).collect();
        let solved = if c0 <= 0.0 {
            jac.into_neg_cholesky().map(|f| f.solve(&mut delta))
        } else {
            jac.into_lu().map(|f| f.solve(&mut delta))
        };
        if solved.is_none() {
            return Err(Error::NonConverged { iterations: 0, update: f64::NAN });
        }
        let base = rms(&r);
        let mut lambda = 1.0;
        let mut trial = w.clone();
        loop {
            for jj in 0..n {
                for ii in 0..m {
                    let k = spec.idx(ii + 1, jj + 1);
                    trial[k] = w[k] + lambda * delta[jj * m + ii];
                }
            }
            discrete_residual(spec, c0, &trial, &mut trial_r);
            let ok = trial_r.iter().all(|x| x.is_finite()) && rms(&trial_r) < base;
            if ok || lambda <= opts.min_damping || base == 0.0 {
                break;
            }
            lambda *= 0.5;
        }
        last_update = lambda * delta.iter().fold(0.0f64, |a, d| a.max(d.abs()));
        core::mem::swap(&mut w, &mut trial);
        core::mem::swap(&mut r, &mut trial_r);
        if last_update < opts.tolerance {
            let mut field = OmegaField::from_fn(*spec, c0, Provenance::Relaxation, |_, _| 0.0);
            for k in 0..spec.len() {
                field.omega[k] = w[k];
                field.sinh_omega[k] = w[k].sinh();
            }
            return Ok(field);
        }
    }
    Err(Error::NonConverged { iterations: opts.max_iterations, update: last_update })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moduli::{derive_params, ModuliPoint};
    use crate::profile::{integrate_profile, Branch, ProfileOptions};

    fn profiles(c0: f64, c: f64, d: f64, spec: &GridSpec, step: f64) -> (ProfileSolution, ProfileSolution) {
        let dp = derive_params(&ModuliPoint::new(c0, c, d)).unwrap();
        let o = ProfileOptions::default();
        let f = integrate_profile(&dp, ProfileKind::F, (spec.x0, spec.x1), step, &o).unwrap();
        let g = integrate_profile(&dp, ProfileKind::G, (spec.y0, spec.y1), step, &o).unwrap();
        (f, g)
    }

    #[test]
    fn trivial_profiles_give_zero_field() {
        let spec = GridSpec::new(0.0, 1.0, 0.0, 1.0, 11, 11).unwrap();
        let dp = derive_params(&ModuliPoint::new(-1.0, 0.0, 0.0)).unwrap();
        let o = ProfileOptions { branch: Branch::Trivial, ..Default::default() };
        let f = integrate_profile(&dp, ProfileKind::F, (0.0, 1.0), 0.1, &o).unwrap();
        let g = integrate_profile(&dp, ProfileKind::G, (0.0, 1.0), 0.1, &o).unwrap();
        let w = assemble_omega(&f, &g, &spec, &AssemblyOptions::default()).unwrap();
        assert_eq!(w.singular_count(), 0);
        assert!(w.omega.iter().all(|&v| v == 0.0));
        assert_eq!(sinh_gordon_residual(&w).unwrap().linf, 0.0);
    }

    #[test]
    fn positive_curvature_has_no_singular_set() {
        let spec = GridSpec::new(-3.0, 3.0, -3.0, 3.0, 61, 61).unwrap();
        let (f, g) = profiles(1.0, -1.0, -1.0, &spec, 0.01);
        let w = assemble_omega(&f, &g, &spec, &AssemblyOptions::default()).unwrap();
        assert_eq!(w.singular_count(), 0);
        for k in 0..spec.len() {
            assert!((w.sinh_omega[k] - w.omega[k].sinh()).abs() <= 1e-14 * (1.0 + w.sinh_omega[k].abs()));
        }
    }

    #[test]
    fn singular_lines_where_g_squared_is_one() {
        // c0 = -1, c = 0, d = 2: f = 0 and g^2 oscillates in [1, 2].
        let spec = GridSpec::new(0.0, 1.0, -2.0, 2.0, 11, 161).unwrap();
        let (f, g) = profiles(-1.0, 0.0, 2.0, &spec, 0.005);
        assert!(f.values.iter().all(|&v| v == 0.0));
        let w = assemble_omega(&f, &g, &spec, &AssemblyOptions::default()).unwrap();
        let mask = singular_set(&f.params, &f, &g, &spec).unwrap();
        for j in 0..spec.ny {
            let row = (0..spec.nx).map(|i| w.singular_mask[spec.idx(i, j)]).collect::<Vec<_>>();
            assert!(row.iter().all(|&b| b == row[0]), "row {j} is not uniform");
            assert_eq!(mask[spec.idx(0, j)], row[0]);
        }
        // Singular rows sit next to the turning points g^2 = 1.
        let period = g.period.unwrap();
        let singular_rows: Vec<f64> = (0..spec.ny).filter(|&j| mask[spec.idx(0, j)]).map(|j| spec.y(j)).collect();
        assert!(!singular_rows.is_empty());
        for y in singular_rows {
            let (gv, _) = g.eval(y).unwrap();
            assert!((gv * gv - 1.0).abs() < 0.05, "y = {y}, g^2 = {}", gv * gv);
        }
        assert!(period > 0.0);
    }

    #[test]
    fn flat_riemann_mask_is_isolated_points() {
        let spec = GridSpec::new(-4.0, 4.0, -4.0, 4.0, 81, 81).unwrap();
        let (f, g) = profiles(0.0, -1.0, -1.0, &spec, 0.01);
        let mask = singular_set(&f.params, &f, &g, &spec).unwrap();
        let count = mask.iter().filter(|&&b| b).count();
        assert!(count > 0 && count < 200, "{count}");
        // Every flagged node is within one cell of a common zero of f and g.
        for j in 0..spec.ny {
            for i in 0..spec.nx {
                if mask[spec.idx(i, j)] {
                    let near_f = (i.saturating_sub(1)..=(i + 1).min(80)).any(|ii| f.eval(spec.x(ii)).unwrap().0.abs() < 0.15);
                    let near_g = (j.saturating_sub(1)..=(j + 1).min(80)).any(|jj| g.eval(spec.y(jj)).unwrap().0.abs() < 0.15);
                    assert!(near_f && near_g);
                }
            }
        }
    }

    #[test]
    fn both_formulas_agree() {
        let spec = GridSpec::new(0.0, 2.0, 0.0, 2.0, 41, 41).unwrap();
        for &(c0, c, d) in &[(-1.0, -1.0, 1.0), (-1.0, -0.25, -0.25), (1.0, -1.0, -0.5)] {
            let (f, g) = profiles(c0, c, d, &spec, 0.001);
            let dp = f.params;
            for k in (0..f.len()).step_by(11) {
                for l in (0..g.len()).step_by(7) {
                    let (fv, fx, gv, gy) = (f.values[k], f.derivs[k], g.values[l], g.derivs[l]);
                    let d1 = c0 + fv * fv + gv * gv;
                    let d2 = fx - gy;
                    // Quartic identity behind the two formulas.
                    let lhs = fx * fx - gy * gy;
                    let rhs = d1 * (gv * gv - fv * fv - dp.a);
                    assert!((lhs - rhs).abs() <= 1e-8 * (1.0 + lhs.abs()));
                    if d1.abs() > 0.1 && d2.abs() > 0.1 {
                        let (s1, s2) = ((fx + gy) / d1, (gv * gv - fv * fv - dp.a) / d2);
                        assert!((s1 - s2).abs() <= 1e-8 * (1.0 + s1.abs()), "({c0},{c},{d}) {fv} {fx} {gv} {gy}: {s1} vs {s2}");
                    }
                    // Compatibility constants vanish for cbar = c0 + a, dbar = c0 - a.
                    let e7 = fv * (c0 * c0 - dp.cbar * c0 + c - d) + fv * gv * gv * (2.0 * c0 - dp.cbar - dp.dbar);
                    let e8 = gv * (c0 * c0 - dp.dbar * c0 + d - c) + gv * fv * fv * (2.0 * c0 - dp.cbar - dp.dbar);
                    assert!(e7.abs() < 1e-10 && e8.abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn degenerate_values() {
        let spec = GridSpec::new(-0.5, 0.5, 0.0, core::f64::consts::FRAC_PI_4, 3, 5).unwrap();
        let w = assemble_omega_degenerate(0.0, 1.0, &spec, &AssemblyOptions::default()).unwrap();
        let top = w.get(1, 4).unwrap();
        assert!((top + 1f64.asinh()).abs() < 1e-15);
        assert!((top + 0.881_373_587_019_543).abs() < 1e-12);
        assert_eq!(w.get(1, 0), Some(0.0));
        assert!(assemble_omega_degenerate(0.5, 0.5, &spec, &AssemblyOptions::default()).is_err());
    }

    #[test]
    fn degenerate_strip_is_masked_outside() {
        let spec = GridSpec::new(0.0, 1.0, -2.0, 2.0, 5, 81).unwrap();
        let w = assemble_omega_degenerate(0.0, 1.0, &spec, &AssemblyOptions::default()).unwrap();
        for j in 0..spec.ny {
            let y = spec.y(j);
            if y.abs() >= FRAC_PI_2 {
                assert!(w.get(2, j).is_none());
            }
            if y.abs() < FRAC_PI_2 - 0.06 {
                assert!(w.get(2, j).is_some());
            }
        }
    }

    #[test]
    fn level_curvature_of_horocycle_foliation() {
        let spec = GridSpec::new(0.0, 1.0, -1.0, 1.0, 21, 81).unwrap();
        let w = assemble_omega_degenerate(0.0, 1.0, &spec, &AssemblyOptions::default()).unwrap();
        let lc = level_curvatures(&w);
        assert!(lc.k_h.count() > 0);
        for (_, _, k) in lc.k_h.defined() {
            assert!((k - 1.0).abs() < 2e-3);
        }
    }

    #[test]
    fn zero_field_curvatures() {
        let spec = GridSpec::new(0.0, 1.0, 0.0, 1.0, 6, 6).unwrap();
        let w = OmegaField::from_fn(spec, -1.0, Provenance::Relaxation, |_, _| 0.0);
        let lc = level_curvatures(&w);
        assert!(lc.k_h.defined().all(|(_, _, k)| k == 0.0));
        assert_eq!(lc.k_v.count(), 0);
    }

    #[test]
    fn relaxation_of_zero_data() {
        let spec = GridSpec::new(0.0, 1.0, 0.0, 1.0, 9, 9).unwrap();
        let w = solve_sinh_gordon(-1.0, &spec, &vec![0.0; 81], &RelaxOptions::default()).unwrap();
        assert!(w.omega.iter().all(|&v| v == 0.0));
        assert_eq!(w.provenance, Provenance::Relaxation);
    }

    #[test]
    fn relaxation_recovers_a_reconstructed_field() {
        let mut errs = Vec::new();
        for &n in &[21usize, 41] {
            let spec = GridSpec::new(0.0, 1.0, 0.0, 1.0, n, n).unwrap();
            let (f, g) = profiles(-1.0, -0.25, -0.25, &spec, 0.0025);
            let exact = assemble_omega(&f, &g, &spec, &AssemblyOptions::default()).unwrap();
            assert_eq!(exact.singular_count(), 0);
            let w = solve_sinh_gordon(-1.0, &spec, &exact.omega, &RelaxOptions::default()).unwrap();
            assert!(sinh_gordon_residual(&w).unwrap().linf < 1e-10);
            errs.push(w.omega.iter().zip(&exact.omega).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())));
        }
        let ratio = errs[0] / errs[1];
        assert!((3.3..4.7).contains(&ratio), "{errs:?}");
    }

    #[test]
    fn relaxation_with_positive_curvature_uses_pivoting() {
        let spec = GridSpec::new(0.0, 1.0, 0.0, 1.0, 17, 17).unwrap();
        let (f, g) = profiles(1.0, -1.0, -1.0, &spec, 0.0025);
        let exact = assemble_omega(&f, &g, &spec, &AssemblyOptions::default()).unwrap();
        let w = solve_sinh_gordon(1.0, &spec, &exact.omega, &RelaxOptions::default()).unwrap();
        assert!(sinh_gordon_residual(&w).unwrap().linf < 1e-9);
        let err = w.omega.iter().zip(&exact.omega).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-2);
    }

    #[test]
    fn too_small_grids_are_rejected() {
        let spec = GridSpec::new(0.0, 1.0, 0.0, 1.0, 4, 9).unwrap();
        let w = OmegaField::from_fn(spec, 1.0, Provenance::Relaxation, |x, _| x);
        assert!(matches!(sinh_gordon_residual(&w), Err(Error::TooFewNodes { .. })));
    }
}
