//! The Shiffman function `u = omega_xy - tanh(omega) omega_x omega_y`, the
//! Jacobi equation `lap(u) + (c0 + 2 |grad omega|^2 / cosh^2 omega) u = 0`,
//! the Jacobi potential and the Gauss curvature, all from `omega` alone.

use serde::Serialize;

use crate::error::Result;
use crate::field::{level_curvatures, OmegaField, ResidualStats};
use crate::grid::{stencil_ok, ScalarGrid, Stencil};
use crate::math::Real;

/// Applies `f(i, j, omega, omega_x, omega_y)` at interior nodes clear of the
/// singular set.
fn per_node<F: Fn(usize, usize, f64, f64, f64) -> f64>(field: &OmegaField, f: F) -> ScalarGrid {
    let spec = &field.spec;
    let dil = field.dilated_mask();
    let mut out = ScalarGrid::undefined(*spec);
    for j in 1..spec.ny.saturating_sub(1) {
        for i in 1..spec.nx.saturating_sub(1) {
            if stencil_ok(spec, &dil, i, j) {
                let (wx, wy) = field.gradient(i, j);
                out.values[spec.idx(i, j)] = Some(f(i, j, field.omega[spec.idx(i, j)], wx, wy));
            }
        }
    }
    out
}

pub fn shiffman_field(field: &OmegaField) -> Result<ScalarGrid> {
    field.spec.require_min(3)?;
    let st = Stencil::new(&field.spec, &field.omega);
    Ok(per_node(field, |i, j, w, wx, wy| st.dxy(i, j) - w.tanh() * wx * wy))
}

/// The same field as `-cosh(omega) d/dx k_h`, differentiating the
/// horizontal level-curve curvature.
pub fn shiffman_field_via_curvature(field: &OmegaField) -> Result<ScalarGrid> {
    let spec = &field.spec;
    spec.require_min(5)?;
    let kh = level_curvatures(field).k_h;
    let mut out = ScalarGrid::undefined(*spec);
    for j in 1..spec.ny - 1 {
        for i in 2..spec.nx - 2 {
            if let (Some(_), Some(a), Some(b)) = (kh.get(i, j), kh.get(i - 1, j), kh.get(i + 1, j)) {
                let w = field.omega[spec.idx(i, j)];
                out.values[spec.idx(i, j)] = Some(-w.cosh() * (b - a) / (2.0 * spec.hx()));
            }
        }
    }
    Ok(out)
}

/// `c0 + 2 |grad omega|^2 / cosh^2 omega`, the zeroth-order coefficient of
/// the flat-metric Jacobi equation.
fn jacobi_coefficient(c0: f64, w: f64, wx: f64, wy: f64) -> f64 {
    let ch = w.cosh();
    c0 + 2.0 * (wx * wx + wy * wy) / (ch * ch)
}

/// Residual of the Jacobi equation for `u` at nodes where `u` is defined on
/// the whole five-point stencil.
pub fn jacobi_residual(field: &OmegaField, u: &ScalarGrid) -> Result<ResidualStats> {
    Ok(ResidualStats::from_grid(&jacobi_residual_grid(field, u)?))
}

pub fn jacobi_residual_grid(field: &OmegaField, u: &ScalarGrid) -> Result<ScalarGrid> {
    let spec = &field.spec;
    spec.require_min(5)?;
    if u.spec != *spec {
        return Err(crate::Error::GridMismatch("Shiffman grid differs from the field grid"));
    }
    let dil = field.dilated_mask();
    let (hx2, hy2) = (spec.hx() * spec.hx(), spec.hy() * spec.hy());
    let mut out = ScalarGrid::undefined(*spec);
    for j in 1..spec.ny - 1 {
        for i in 1..spec.nx - 1 {
            if !stencil_ok(spec, &dil, i, j) {
                continue;
            }
            let nb = (u.get(i, j), u.get(i - 1, j), u.get(i + 1, j), u.get(i, j - 1), u.get(i, j + 1));
            if let (Some(c), Some(l), Some(r), Some(d), Some(t)) = nb {
                let lap = (l - 2.0 * c + r) / hx2 + (d - 2.0 * c + t) / hy2;
                let (wx, wy) = field.gradient(i, j);
                let w = field.omega[spec.idx(i, j)];
                out.values[spec.idx(i, j)] = Some(lap + jacobi_coefficient(field.c0, w, wx, wy) * c);
            }
        }
    }
    Ok(out)
}

/// `Ric(N) + |dN|^2 = c0 / cosh^2 omega + 2 |grad omega|^2 / cosh^4 omega`.
pub fn jacobi_potential(field: &OmegaField) -> ScalarGrid {
    let c0 = field.c0;
    per_node(field, |_, _, w, wx, wy| {
        let ch2 = w.cosh() * w.cosh();
        c0 / ch2 + 2.0 * (wx * wx + wy * wy) / (ch2 * ch2)
    })
}

/// `K = c0 tanh^2 omega - |grad omega|^2 / cosh^4 omega`.
pub fn gauss_curvature(field: &OmegaField) -> ScalarGrid {
    let c0 = field.c0;
    per_node(field, |_, _, w, wx, wy| {
        let ch2 = w.cosh() * w.cosh();
        let t = w.tanh();
        c0 * t * t - (wx * wx + wy * wy) / (ch2 * ch2)
    })
}

/// `K = -(1 / 2 lambda) lap(log lambda)` with `lambda = cosh^2 omega`.
pub fn gauss_curvature_fd(field: &OmegaField) -> ScalarGrid {
    let spec = &field.spec;
    let log_ch: alloc::vec::Vec<f64> = field.omega.iter().map(|w| w.cosh().ln()).collect();
    let st = Stencil::new(spec, &log_ch);
    per_node(field, |i, j, w, _, _| -st.laplacian(i, j) / (w.cosh() * w.cosh()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JacobiReport {
    #[serde(skip)]
    pub u: ScalarGrid,
    #[serde(skip)]
    pub potential: ScalarGrid,
    #[serde(skip)]
    pub gauss: ScalarGrid,
    pub max_u: f64,
    pub jacobi_residual: ResidualStats,
    /// `max |cosh^2(omega) potential - c0 - 2 |grad omega|^2 / cosh^2 omega|`.
    pub potential_identity_linf: f64,
    /// `max |K(closed form) - K(finite differences)|`.
    pub gauss_dual_route_linf: f64,
    /// `max |u - (-cosh(omega) d/dx k_h)|`.
    pub curvature_route_linf: f64,
}

pub fn jacobi_report(field: &OmegaField) -> Result<JacobiReport> {
    let u = shiffman_field(field)?;
    let jacobi_residual = jacobi_residual(field, &u)?;
    let potential = jacobi_potential(field);
    let gauss = gauss_curvature(field);
    let gauss_dual_route_linf = gauss.difference(&gauss_curvature_fd(field))?.max_abs();
    let curvature_route_linf = u.difference(&shiffman_field_via_curvature(field)?)?.max_abs();
    let mut potential_identity_linf = 0.0f64;
    for (i, j, p) in potential.defined() {
        let (wx, wy) = field.gradient(i, j);
        let w = field.omega[field.spec.idx(i, j)];
        let ch2 = w.cosh() * w.cosh();
        let e = p * ch2 - jacobi_coefficient(field.c0, w, wx, wy);
        potential_identity_linf = potential_identity_linf.max(e.abs());
    }
    Ok(JacobiReport {
        max_u: u.max_abs(),
        u,
        potential,
        gauss,
        jacobi_residual,
        potential_identity_linf,
        gauss_dual_route_linf,
        curvature_route_linf,
    })
}
