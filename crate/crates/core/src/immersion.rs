//! The immersion `X = (F, y)`: meshes, the flat Weierstrass route, and
//! diagnostics (isometry and Hopf differential, harmonic-map residual,
//! curvature of the horizontal curves, holonomy over a period).

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::chart::{ChartKind, ChartSpace};
use crate::error::{Error, Result};
use crate::field::{OmegaField, ResidualStats};
use crate::frame::{advance, FrameField, FrameSeed};
use crate::grid::{GridSpec, ScalarGrid};
use crate::math::{wrap_angle, Real};
use crate::moduli::ModuliPoint;
use crate::profile::ProfileSolution;
use crate::source::OmegaSource;

/// Node at which to seed the frame: the column nearest the domain centre
/// where `f` (or `f_x`, if `f` keeps its sign) vanishes, on the middle row,
/// moved to the nearest regular node.
pub fn axis_seed(field: &OmegaField, f: Option<&ProfileSolution>) -> Option<FrameSeed> {
    let spec = &field.spec;
    let mid_i = spec.nx / 2;
    let mut col = mid_i;
    if let Some(f) = f {
        let vals: Vec<(f64, f64)> = (0..spec.nx).map(|i| f.eval(spec.x(i)).unwrap_or((f64::NAN, f64::NAN))).collect();
        let sign_changing = f.interval.0 == 0.0 && f.values.iter().any(|&v| v != 0.0);
        let pick = |v: (f64, f64)| if sign_changing { v.0 } else { v.1 };
        let mut best: Option<usize> = None;
        for i in 0..spec.nx {
            let here = pick(vals[i]);
            let zero = here == 0.0 || (i + 1 < spec.nx && here * pick(vals[i + 1]) < 0.0);
            if !zero {
                continue;
            }
            let cand = if i + 1 < spec.nx && pick(vals[i + 1]).abs() < here.abs() { i + 1 } else { i };
            if best.is_none_or(|b| cand.abs_diff(mid_i) < b.abs_diff(mid_i)) {
                best = Some(cand);
            }
        }
        col = best.unwrap_or(mid_i);
    }
    FrameSeed::nearest_regular(field, col, spec.ny / 2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceMesh {
    pub spec: GridSpec,
    pub chart: ChartSpace,
    pub params: Option<ModuliPoint>,
    /// Grid node of each vertex.
    pub nodes: Vec<usize>,
    /// `(u1, u2, y)` per vertex.
    pub chart_coords: Vec<[f64; 3]>,
    /// Ambient-model coordinates per vertex: hyperboloid point and height
    /// (`c0 < 0`), sphere point and height (`c0 > 0`), or `(u1, u2, y)`.
    pub ambient: Vec<Vec<f64>>,
    /// Quads over cells with four regular corners, counter-clockwise.
    pub faces: Vec<[usize; 4]>,
    /// Constant-`y` polylines, split at gaps.
    pub foliation: Vec<Vec<usize>>,
}

impl SurfaceMesh {
    fn assemble(spec: GridSpec, chart: ChartSpace, coords: &[Option<[f64; 3]>]) -> Result<Self> {
        let mut index = vec![None; spec.len()];
        let mut nodes = Vec::new();
        let mut chart_coords = Vec::new();
        let mut ambient = Vec::new();
        for (k, c) in coords.iter().enumerate() {
            if let Some(p) = c {
                index[k] = Some(nodes.len());
                nodes.push(k);
                chart_coords.push(*p);
                ambient.push(match chart.kind {
                    ChartKind::EuclideanPlane => vec![p[0], p[1], p[2]],
                    _ => {
                        let q = chart.lift([p[0], p[1]])?;
                        vec![q[0], q[1], q[2], p[2]]
                    }
                });
            }
        }
        let mut faces = Vec::new();
        for j in 0..spec.ny - 1 {
            for i in 0..spec.nx - 1 {
                let c = [spec.idx(i, j), spec.idx(i + 1, j), spec.idx(i + 1, j + 1), spec.idx(i, j + 1)];
                if let [Some(a), Some(b), Some(d), Some(e)] = c.map(|k| index[k]) {
                    faces.push([a, b, d, e]);
                }
            }
        }
        let mut foliation = Vec::new();
        for j in 0..spec.ny {
            let mut run = Vec::new();
            for i in 0..spec.nx {
                match index[spec.idx(i, j)] {
                    Some(v) => run.push(v),
                    None => {
                        if run.len() > 1 {
                            foliation.push(core::mem::take(&mut run));
                        }
                        run.clear();
                    }
                }
            }
            if run.len() > 1 {
                foliation.push(run);
            }
        }
        Ok(Self { spec, chart, params: None, nodes, chart_coords, ambient, faces, foliation })
    }

    /// Largest deviation of the ambient points from their model quadric.
    pub fn quadric_linf(&self) -> f64 {
        self.ambient
            .iter()
            .map(|p| self.chart.quadric_defect([p[0], p[1], p[2]]).abs())
            .fold(0.0, f64::max)
    }
}

/// Mesh of `X = (F, y)` over the regular, reached nodes.
pub fn build_mesh(frame: &FrameField, field: &OmegaField) -> Result<SurfaceMesh> {
    if frame.spec != field.spec {
        return Err(Error::GridMismatch("frame and field grids differ"));
    }
    let spec = frame.spec;
    let coords: Vec<Option<[f64; 3]>> = (0..spec.len())
        .map(|k| {
            let (i, j) = (k % spec.nx, k / spec.nx);
            (frame.ok(i, j) && field.get(i, j).is_some()).then(|| [frame.u[k][0], frame.u[k][1], spec.y(j)])
        })
        .collect();
    SurfaceMesh::assemble(spec, frame.chart, &coords)
}

/// Partial derivative of `omega` at a node: centred when possible,
/// otherwise one-sided second order.
fn omega_derivative(field: &OmegaField, i: usize, j: usize, along_x: bool) -> Option<f64> {
    let spec = &field.spec;
    let (n, k, h) = if along_x { (spec.nx, i, spec.hx()) } else { (spec.ny, j, spec.hy()) };
    let at = |m: i64| -> Option<f64> {
        if m < 0 || m as usize >= n {
            return None;
        }
        let m = m as usize;
        if along_x { field.get(m, j) } else { field.get(i, m) }
    };
    let k = k as i64;
    if let (Some(a), Some(b)) = (at(k - 1), at(k + 1)) {
        return Some((b - a) / (2.0 * h));
    }
    let c = at(k)?;
    if let (Some(b), Some(d)) = (at(k + 1), at(k + 2)) {
        return Some((-3.0 * c + 4.0 * b - d) / (2.0 * h));
    }
    if let (Some(b), Some(d)) = (at(k - 1), at(k - 2)) {
        return Some((3.0 * c - 4.0 * b + d) / (2.0 * h));
    }
    None
}

/// Weierstrass data `g = e^{omega + i psi}`, `dz`:
/// `X = Re int ((g + 1/g)/2, i (1/g - g)/2, -i) dz`, whose height is `y`.
fn weierstrass_phi(g: C) -> [C; 3] {
    let gi = g.inv();
    let i = C::new(0.0, 1.0);
    [(g + gi) * 0.5, i * (gi - g) * 0.5, -i]
}

fn weierstrass_dphi(g: C, hz: C) -> [C; 3] {
    let gi = g.inv();
    let i = C::new(0.0, 1.0);
    [(g - gi) * 0.5 * hz, -i * (g + gi) * 0.5 * hz, C::new(0.0, 0.0)]
}

/// The flat-case immersion from the Weierstrass representation, integrated
/// along the frame's path (seed column, then rows) by the trapezoid rule
/// with the Euler-Maclaurin end correction.
pub fn weierstrass_flat(field: &OmegaField, frame: &FrameField) -> Result<SurfaceMesh> {
    if field.c0 != 0.0 {
        return Err(Error::NotFlat { c0: field.c0 });
    }
    if frame.spec != field.spec {
        return Err(Error::GridMismatch("frame and field grids differ"));
    }
    let spec = field.spec;
    let seed = frame.seed;
    let usable = |i: usize, j: usize| frame.ok(i, j) && field.get(i, j).is_some();
    let data = |i: usize, j: usize| -> ([C; 3], Option<[C; 3]>) {
        let k = spec.idx(i, j);
        let g = C::from_polar(field.omega[k].exp(), frame.psi[k]);
        let dphi = match (omega_derivative(field, i, j, true), omega_derivative(field, i, j, false)) {
            (Some(wx), Some(wy)) => Some(weierstrass_dphi(g, C::new(wx, -wy))),
            _ => None,
        };
        (weierstrass_phi(g), dphi)
    };
    let add = |a: [C; 3], b: [C; 3], s: C| [a[0] + b[0] * s, a[1] + b[1] * s, a[2] + b[2] * s];

    // Cumulative corrected trapezoid from node `start` outward along a line;
    // `w` maps integrand and derivative to the path parameter.
    let line = |n: usize, start: usize, h: f64, w: C, at: &dyn Fn(usize) -> Option<([C; 3], Option<[C; 3]>)>| {
        let mut out: Vec<Option<[C; 3]>> = vec![None; n];
        let zero = [C::new(0.0, 0.0); 3];
        out[start] = Some(zero);
        let (phi0, d0) = match at(start) {
            Some(v) => v,
            None => return out,
        };
        for forward in [true, false] {
            let step = if forward { h } else { -h };
            let mut sum = zero;
            let mut prev = phi0;
            let mut k = start;
            loop {
                let next = if forward { k + 1 } else { k.wrapping_sub(1) };
                if next >= n {
                    break;
                }
                let Some((phi, d)) = at(next) else { break };
                sum = add(add(sum, prev, C::new(0.5 * step, 0.0) * w), phi, C::new(0.5 * step, 0.0) * w);
                let mut total = sum;
                if let (Some(da), Some(db)) = (d0, d) {
                    // d/ds of (w * Phi) is w * w * Phi_z along the path.
                    let c = C::new(-step * step / 12.0, 0.0) * w * w;
                    total = add(add(total, db, c), da, -c);
                }
                out[next] = Some(total);
                prev = phi;
                k = next;
            }
        }
        out
    };

    let i_unit = C::new(0.0, 1.0);
    let col_at = |j: usize| usable(seed.i, j).then(|| data(seed.i, j));
    let col = line(spec.ny, seed.j, spec.hy(), i_unit, &col_at);
    let base = [seed.u0[0], seed.u0[1], spec.y(seed.j)];
    let mut coords: Vec<Option<[f64; 3]>> = vec![None; spec.len()];
    for j in 0..spec.ny {
        let Some(cv) = col[j] else { continue };
        let row_at = |i: usize| usable(i, j).then(|| data(i, j));
        let row = line(spec.nx, seed.i, spec.hx(), C::new(1.0, 0.0), &row_at);
        for i in 0..spec.nx {
            if let Some(rv) = row[i] {
                coords[spec.idx(i, j)] = Some([
                    base[0] + cv[0].re + rv[0].re,
                    base[1] + cv[1].re + rv[1].re,
                    base[2] + cv[2].re + rv[2].re,
                ]);
            }
        }
    }
    SurfaceMesh::assemble(spec, frame.chart, &coords)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsometryReport {
    /// `rho |F_x|^2 - cosh^2 omega`.
    pub fx: ResidualStats,
    /// `rho |F_y|^2 - sinh^2 omega`.
    pub fy: ResidualStats,
    /// `rho <F_x, F_y>`.
    pub cross: ResidualStats,
    pub isometry_linf: f64,
    /// `max |Re Q - 1/4|` for `Q = rho (|F_x|^2 - |F_y|^2 + 2i <F_x, F_y>) / 4`.
    pub hopf_real_err: f64,
    pub hopf_imag_err: f64,
}

/// Interior nodes whose five-point stencil is reached and regular.
fn frame_interior(frame: &FrameField, field: Option<&OmegaField>) -> Vec<(usize, usize)> {
    let spec = &frame.spec;
    let mut out = Vec::new();
    for j in 1..spec.ny.saturating_sub(1) {
        for i in 1..spec.nx.saturating_sub(1) {
            let ok = [(i, j), (i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)].iter().all(|&(a, b)| frame.ok(a, b));
            if ok && field.is_none_or(|f| f.get(i, j).is_some()) {
                out.push((i, j));
            }
        }
    }
    out
}

fn partials(frame: &FrameField, i: usize, j: usize) -> ([f64; 2], [f64; 2]) {
    let s = &frame.spec;
    let u = |a: usize, b: usize| frame.u[s.idx(a, b)];
    let (l, r, d, t) = (u(i - 1, j), u(i + 1, j), u(i, j - 1), u(i, j + 1));
    let (hx, hy) = (s.hx(), s.hy());
    (
        [(r[0] - l[0]) / (2.0 * hx), (r[1] - l[1]) / (2.0 * hx)],
        [(t[0] - d[0]) / (2.0 * hy), (t[1] - d[1]) / (2.0 * hy)],
    )
}

pub fn isometry_check(frame: &FrameField, field: &OmegaField) -> Result<IsometryReport> {
    frame.spec.require_min(3)?;
    if frame.spec != field.spec {
        return Err(Error::GridMismatch("frame and field grids differ"));
    }
    let (mut ex, mut ey, mut exy) = (Vec::new(), Vec::new(), Vec::new());
    let (mut hre, mut him) = (0.0f64, 0.0f64);
    for (i, j) in frame_interior(frame, Some(field)) {
        let k = frame.spec.idx(i, j);
        let (fx, fy) = partials(frame, i, j);
        let (rho, _) = frame.chart.factor(frame.u[k])?;
        let w = field.omega[k];
        let nx2 = rho * (fx[0] * fx[0] + fx[1] * fx[1]);
        let ny2 = rho * (fy[0] * fy[0] + fy[1] * fy[1]);
        let dot = rho * (fx[0] * fy[0] + fx[1] * fy[1]);
        ex.push(nx2 - w.cosh() * w.cosh());
        ey.push(ny2 - w.sinh() * w.sinh());
        exy.push(dot);
        hre = hre.max((0.25 * (nx2 - ny2) - 0.25).abs());
        him = him.max((0.5 * dot).abs());
    }
    let h = frame.spec.hx().max(frame.spec.hy());
    let fx = ResidualStats::from_values(ex, h);
    let fy = ResidualStats::from_values(ey, h);
    let cross = ResidualStats::from_values(exy, h);
    Ok(IsometryReport {
        isometry_linf: fx.linf.max(fy.linf).max(cross.linf),
        fx,
        fy,
        cross,
        hopf_real_err: hre,
        hopf_imag_err: him,
    })
}

/// Residual of the harmonic map equation `F_{z zbar} + (log rho)_u F_z F_zbar = 0`
/// in the complex chart coordinate.
pub fn harmonic_residual(frame: &FrameField) -> Result<ResidualStats> {
    Ok(ResidualStats::from_grid(&harmonic_residual_grid(frame)?))
}

pub fn harmonic_residual_grid(frame: &FrameField) -> Result<ScalarGrid> {
    let spec = &frame.spec;
    spec.require_min(3)?;
    let mut out = ScalarGrid::undefined(*spec);
    let (hx2, hy2) = (spec.hx() * spec.hx(), spec.hy() * spec.hy());
    let cu = |a: usize, b: usize| {
        let p = frame.u[spec.idx(a, b)];
        C::new(p[0], p[1])
    };
    for (i, j) in frame_interior(frame, None) {
        let c = cu(i, j);
        let lap = (cu(i - 1, j) - c * 2.0 + cu(i + 1, j)) / hx2 + (cu(i, j - 1) - c * 2.0 + cu(i, j + 1)) / hy2;
        let (fx, fy) = partials(frame, i, j);
        let (fx, fy) = (C::new(fx[0], fx[1]), C::new(fy[0], fy[1]));
        let i_unit = C::new(0.0, 1.0);
        let fz = (fx - i_unit * fy) * 0.5;
        let fzb = (fx + i_unit * fy) * 0.5;
        let (_, l) = frame.chart.factor([c.re, c.im])?;
        let log_rho_u = C::new(0.5 * l[0], -0.5 * l[1]);
        let r = lap * 0.25 + log_rho_u * fz * fzb;
        out.values[spec.idx(i, j)] = Some(r.norm());
    }
    Ok(out)
}

/// Geodesic curvature in `M` of the chart curves `x -> F(x, y)`, measured
/// from the Euclidean curvature `k_e` of the polyline:
/// `k = (k_e - <grad log rho, n> / 2) / sqrt(rho)` with `n` the left normal.
pub fn row_geodesic_curvature(frame: &FrameField) -> Result<ScalarGrid> {
    let spec = &frame.spec;
    spec.require_min(3)?;
    let h = spec.hx();
    let mut out = ScalarGrid::undefined(*spec);
    for j in 0..spec.ny {
        for i in 1..spec.nx - 1 {
            if !(frame.ok(i - 1, j) && frame.ok(i, j) && frame.ok(i + 1, j)) {
                continue;
            }
            let (l, c, r) = (frame.u[spec.idx(i - 1, j)], frame.u[spec.idx(i, j)], frame.u[spec.idx(i + 1, j)]);
            let d1 = [(r[0] - l[0]) / (2.0 * h), (r[1] - l[1]) / (2.0 * h)];
            let d2 = [(r[0] - 2.0 * c[0] + l[0]) / (h * h), (r[1] - 2.0 * c[1] + l[1]) / (h * h)];
            let speed = d1[0].hypot(d1[1]);
            if speed == 0.0 {
                continue;
            }
            let ke = (d1[0] * d2[1] - d1[1] * d2[0]) / (speed * speed * speed);
            let n = [-d1[1] / speed, d1[0] / speed];
            let (rho, g) = frame.chart.factor(c)?;
            out.values[spec.idx(i, j)] = Some((ke - 0.5 * (g[0] * n[0] + g[1] * n[1])) / rho.sqrt());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HolonomyKind {
    Identity,
    /// Rotation about a fixed point of the chart.
    Elliptic,
    Parabolic,
    /// Hyperbolic translation along an axis.
    Hyperbolic,
    /// Euclidean translation (flat chart).
    Translation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolonomyReport {
    #[serde(rename = "type")]
    pub kind: HolonomyKind,
    /// Rotation angle for elliptic maps, translation length otherwise.
    pub angle_or_length: f64,
    pub fixed_point: Option<[f64; 2]>,
    /// Largest misfit when the isometry found on the seed row is applied to
    /// the other sampled rows.
    pub residual: f64,
    pub closed: bool,
    pub period: f64,
}

/// Orientation-preserving isometry of the chart sending the frame
/// `(u_a, psi_a)` to `(u_b, psi_b)`, as a unimodular Moebius matrix, or
/// `None` in the flat chart.
fn mobius(chart: &ChartSpace, ua: C, psi_a: f64, ub: C, psi_b: f64) -> Option<[C; 4]> {
    let half = 0.5 * (psi_b - psi_a);
    let (e, ei) = (C::from_polar(1.0, half), C::from_polar(1.0, -half));
    let one = C::new(1.0, 0.0);
    let (a, b, norm) = match chart.kind {
        ChartKind::EuclideanPlane => return None,
        ChartKind::PoincareDisk => (
            [one, -ua, -ua.conj(), one],
            [one, ub, ub.conj(), one],
            ((1.0 - ua.norm_sqr()) * (1.0 - ub.norm_sqr())).sqrt(),
        ),
        ChartKind::Stereographic => (
            [one, -ua, ua.conj(), one],
            [one, ub, -ub.conj(), one],
            ((1.0 + ua.norm_sqr()) * (1.0 + ub.norm_sqr())).sqrt(),
        ),
    };
    let mul = |p: [C; 4], q: [C; 4]| [p[0] * q[0] + p[1] * q[2], p[0] * q[1] + p[1] * q[3], p[2] * q[0] + p[3] * q[2], p[2] * q[1] + p[3] * q[3]];
    let r = [e, C::new(0.0, 0.0), C::new(0.0, 0.0), ei];
    let m = mul(b, mul(r, a));
    Some(m.map(|z| z / norm))
}

struct Isometry {
    chart: ChartSpace,
    m: Option<[C; 4]>,
    theta: f64,
    ua: C,
    ub: C,
}

impl Isometry {
    fn apply(&self, w: C) -> (C, f64) {
        match self.m {
            Some(m) => {
                let den = m[2] * w + m[3];
                ((m[0] * w + m[1]) / den, (den * den).inv().arg())
            }
            None => (C::from_polar(1.0, self.theta) * (w - self.ua) + self.ub, self.theta),
        }
    }

    fn classify(&self) -> (HolonomyKind, f64, Option<[f64; 2]>) {
        let tol = 1e-6;
        if (self.ub - self.ua).norm() <= tol && wrap_angle(self.theta).abs() <= tol {
            return (HolonomyKind::Identity, 0.0, None);
        }
        let Some(m) = self.m else {
            if wrap_angle(self.theta).abs() <= 1e-12 {
                return (HolonomyKind::Translation, (self.ub - self.ua).norm(), None);
            }
            let e = C::from_polar(1.0, self.theta);
            let w = (self.ub - e * self.ua) / (C::new(1.0, 0.0) - e);
            return (HolonomyKind::Elliptic, wrap_angle(self.theta), Some([w.re, w.im]));
        };
        let fixed = || {
            // m21 w^2 + (m22 - m11) w - m12 = 0, root nearest the origin.
            let (a, b, c) = (m[2], m[3] - m[0], -m[1]);
            if a.norm() <= 1e-14 * (b.norm() + c.norm()) {
                return -c / b;
            }
            let s = (b * b - a * c * 4.0).sqrt();
            let (r1, r2) = ((-b + s) / (a * 2.0), (-b - s) / (a * 2.0));
            if r1.norm() <= r2.norm() { r1 } else { r2 }
        };
        match self.chart.kind {
            ChartKind::Stereographic => {
                let w = fixed();
                let (_, angle) = self.apply(w);
                (HolonomyKind::Elliptic, angle, Some([w.re, w.im]))
            }
            _ => {
                let tau = (0.5 * (m[0] + m[3]).re).abs();
                if tau < 1.0 - 1e-9 {
                    let w = fixed();
                    let (_, angle) = self.apply(w);
                    (HolonomyKind::Elliptic, angle, Some([w.re, w.im]))
                } else if tau <= 1.0 + 1e-9 {
                    (HolonomyKind::Parabolic, 0.0, None)
                } else {
                    (HolonomyKind::Hyperbolic, 2.0 * tau.acosh() / self.chart.c0.abs().sqrt(), None)
                }
            }
        }
    }
}

/// Isometry relating the frame at `(x_a, y)` to the frame at
/// `(x_a + period, y)`, found on the seed row and tested on up to
/// `sample_rows` other rows.
///
/// The far end is reached by integrating over exactly one period with the
/// same source, so the period need not be a multiple of the grid spacing.
pub fn holonomy(frame: &FrameField, source: &dyn OmegaSource, period: f64, substeps: usize, sample_rows: usize) -> Result<HolonomyReport> {
    let spec = &frame.spec;
    if !(period > 0.0 && period.is_finite()) || period > spec.x1 - spec.x0 + 1e-9 {
        return Err(Error::PeriodUnavailable);
    }
    let seed = frame.seed;
    let ia = if spec.x(seed.i) + period <= spec.x1 + 1e-9 { seed.i } else { 0 };
    let xa = spec.x(ia);
    let steps = ((period / spec.hx()).ceil() as usize).max(1) * substeps.max(1);
    let rows: Vec<usize> = {
        let ok: Vec<usize> = (0..spec.ny).filter(|&j| frame.ok(ia, j)).collect();
        if ok.is_empty() {
            return Err(Error::SingularCrossing { x: xa, y: spec.y(seed.j) });
        }
        let n = sample_rows.max(1).min(ok.len());
        let mut v: Vec<usize> = (0..n).map(|q| ok[q * (ok.len() - 1) / n.max(2).saturating_sub(1).max(1)]).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let j0 = if frame.ok(ia, seed.j) { seed.j } else { rows[0] };
    let end = |j: usize| -> Result<(C, f64, C, f64)> {
        let k = spec.idx(ia, j);
        let s = [frame.psi[k], frame.u[k][0], frame.u[k][1]];
        let e = advance(source, &frame.chart, true, spec.y(j), xa, period, steps, s)
            .ok_or(Error::SingularCrossing { x: xa + period, y: spec.y(j) })?;
        Ok((C::new(s[1], s[2]), s[0], C::new(e[1], e[2]), e[0]))
    };
    let (ua, pa, ub, pb) = end(j0)?;
    let iso = Isometry { chart: frame.chart, m: mobius(&frame.chart, ua, pa, ub, pb), theta: pb - pa, ua, ub };
    let mut residual = 0.0f64;
    for &j in &rows {
        let (wa, qa, wb, qb) = end(j)?;
        let (pred, turn) = iso.apply(wa);
        residual = residual.max((pred - wb).norm()).max(wrap_angle(qa + turn - qb).abs());
    }
    let (kind, angle_or_length, fixed_point) = iso.classify();
    Ok(HolonomyReport { kind, angle_or_length, fixed_point, residual, closed: kind == HolonomyKind::Identity, period })
}
