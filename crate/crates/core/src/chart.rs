//! Conformal charts `rho(u) |du|^2` of the constant-curvature surface `M`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChartKind {
    /// `rho = 4 / (|c0| (1 - |u|^2)^2)` on the unit disk.
    PoincareDisk,
    /// `rho = 1`.
    EuclideanPlane,
    /// `rho = 4 / (c0 (1 + |u|^2)^2)`.
    Stereographic,
}

/// A chart together with the curvature it realizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartSpace {
    pub kind: ChartKind,
    pub c0: f64,
}

/// Points this close to the unit circle are treated as having left the disk.
pub const DISK_MARGIN: f64 = 1e-12;

impl ChartSpace {
    /// The standard chart for curvature `c0`.
    pub fn for_curvature(c0: f64) -> Self {
        let kind = if c0 < 0.0 {
            ChartKind::PoincareDisk
        } else if c0 > 0.0 {
            ChartKind::Stereographic
        } else {
            ChartKind::EuclideanPlane
        };
        Self { kind, c0 }
    }

    /// `rho(u)` and `grad log rho`.
    pub fn factor(&self, u: [f64; 2]) -> Result<(f64, [f64; 2])> {
        let r2 = u[0] * u[0] + u[1] * u[1];
        match self.kind {
            ChartKind::EuclideanPlane => Ok((1.0, [0.0, 0.0])),
            ChartKind::PoincareDisk => {
                if !(r2.sqrt() < 1.0 - DISK_MARGIN) {
                    return Err(Error::ChartOverflow { x: u[0], y: u[1] });
                }
                let s = 1.0 - r2;
                let rho = 4.0 / (self.c0.abs() * s * s);
                Ok((rho, [4.0 * u[0] / s, 4.0 * u[1] / s]))
            }
            ChartKind::Stereographic => {
                let s = 1.0 + r2;
                let rho = 4.0 / (self.c0 * s * s);
                Ok((rho, [-4.0 * u[0] / s, -4.0 * u[1] / s]))
            }
        }
    }

    /// Point of the ambient model: the hyperboloid of radius `1/sqrt|c0|`
    /// in `R^{2,1}` (time-like component first), the sphere of radius
    /// `1/sqrt(c0)` in `R^3`, or the plane.
    pub fn lift(&self, u: [f64; 2]) -> Result<[f64; 3]> {
        let r2 = u[0] * u[0] + u[1] * u[1];
        match self.kind {
            ChartKind::EuclideanPlane => Ok([u[0], u[1], 0.0]),
            ChartKind::PoincareDisk => {
                if !(r2 < 1.0) {
                    return Err(Error::ChartOverflow { x: u[0], y: u[1] });
                }
                let s = 1.0 / ((1.0 - r2) * self.c0.abs().sqrt());
                Ok([(1.0 + r2) * s, 2.0 * u[0] * s, 2.0 * u[1] * s])
            }
            ChartKind::Stereographic => {
                let s = 1.0 / ((1.0 + r2) * self.c0.sqrt());
                Ok([2.0 * u[0] * s, 2.0 * u[1] * s, (1.0 - r2) * s])
            }
        }
    }

    /// Value of the model quadric at a lifted point: `-1/|c0|` for
    /// `-X0^2 + X1^2 + X2^2` on the hyperboloid, `1/c0` for `|p|^2` on the sphere.
    pub fn quadric_defect(&self, p: [f64; 3]) -> f64 {
        match self.kind {
            ChartKind::EuclideanPlane => 0.0,
            ChartKind::PoincareDisk => (-p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) * self.c0.abs() + 1.0,
            ChartKind::Stereographic => (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) * self.c0 - 1.0,
        }
    }
}

pub fn chart_factor(space: &ChartSpace, u: [f64; 2]) -> Result<(f64, [f64; 2])> {
    space.factor(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Real;

    #[test]
    fn reference_values() {
        let disk = ChartSpace::for_curvature(-1.0);
        assert_eq!(chart_factor(&disk, [0.0, 0.0]).unwrap(), (4.0, [0.0, 0.0]));
        let flat = ChartSpace::for_curvature(0.0);
        assert_eq!(chart_factor(&flat, [3.0, -7.0]).unwrap(), (1.0, [0.0, 0.0]));
        let sphere = ChartSpace::for_curvature(1.0);
        assert_eq!(chart_factor(&sphere, [1.0, 0.0]).unwrap(), (1.0, [-2.0, 0.0]));
        assert!(matches!(chart_factor(&disk, [1.0, 0.0]), Err(Error::ChartOverflow { .. })));
    }

    /// `K = -(1 / 2 rho) lap(log rho)` by central differences.
    fn curvature_fd(space: &ChartSpace, u: [f64; 2]) -> f64 {
        let h = 1e-4;
        let l = |a: f64, b: f64| space.factor([a, b]).unwrap().0.ln();
        let lap = (l(u[0] + h, u[1]) + l(u[0] - h, u[1]) + l(u[0], u[1] + h) + l(u[0], u[1] - h) - 4.0 * l(u[0], u[1])) / (h * h);
        -lap / (2.0 * space.factor(u).unwrap().0)
    }

    #[test]
    fn charts_have_the_requested_curvature() {
        for &c0 in &[-4.0, -1.0, 0.0, 0.5, 1.0] {
            let space = ChartSpace::for_curvature(c0);
            for &u in &[[0.1, 0.2], [-0.5, 0.3], [0.0, -0.7]] {
                assert!((curvature_fd(&space, u) - c0).abs() < 1e-5, "c0 = {c0}");
            }
        }
    }

    #[test]
    fn gradient_matches_differences() {
        for &c0 in &[-1.0, 2.0] {
            let space = ChartSpace::for_curvature(c0);
            let u = [0.3, -0.4];
            let (_, g) = space.factor(u).unwrap();
            let h = 1e-6;
            let l = |a: f64, b: f64| space.factor([a, b]).unwrap().0.ln();
            assert!((g[0] - (l(u[0] + h, u[1]) - l(u[0] - h, u[1])) / (2.0 * h)).abs() < 1e-8);
            assert!((g[1] - (l(u[0], u[1] + h) - l(u[0], u[1] - h)) / (2.0 * h)).abs() < 1e-8);
        }
    }

    #[test]
    fn lifts_satisfy_quadrics() {
        for &c0 in &[-1.0, 1.0, -0.25, 9.0] {
            let space = ChartSpace::for_curvature(c0);
            for &u in &[[0.0, 0.0], [0.5, -0.8], [0.1, 0.9]] {
                let p = space.lift(u).unwrap();
                assert!(space.quadric_defect(p).abs() < 1e-12);
            }
        }
    }
}
