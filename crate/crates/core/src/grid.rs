//! Node-centred uniform grids, row-major with `y` outermost.

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::Real;

/// Uniform node-centred grid on `[x0, x1] x [y0, y1]`.
///
/// Node `(i, j)` sits at `(x0 + i*hx, y0 + j*hy)` and is stored at index
/// `j * nx + i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::TooFewNodes { nx, ny });
        }
        let finite = x0.is_finite() && x1.is_finite() && y0.is_finite() && y1.is_finite();
        if !finite || x1 <= x0 || y1 <= y0 {
            return Err(Error::InvalidParams("grid domain must be a finite nondegenerate rectangle"));
        }
        Ok(Self { x0, x1, y0, y1, nx, ny })
    }

    /// Square-celled grid with spacing `h` starting at `(x0, y0)`.
    pub fn with_spacing(x0: f64, y0: f64, h: f64, nx: usize, ny: usize) -> Result<Self> {
        Self::new(x0, x0 + h * (nx - 1) as f64, y0, y0 + h * (ny - 1) as f64, nx, ny)
    }

    #[inline]
    pub fn hx(&self) -> f64 {
        (self.x1 - self.x0) / (self.nx - 1) as f64
    }

    #[inline]
    pub fn hy(&self) -> f64 {
        (self.y1 - self.y0) / (self.ny - 1) as f64
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.nx {
            self.x1
        } else {
            self.x0 + i as f64 * self.hx()
        }
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        if j + 1 == self.ny {
            self.y1
        } else {
            self.y0 + j as f64 * self.hy()
        }
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn is_interior(&self, i: usize, j: usize) -> bool {
        i > 0 && j > 0 && i + 1 < self.nx && j + 1 < self.ny
    }

    /// Same rectangle with the spacing halved.
    pub fn refined(&self) -> Self {
        Self { nx: 2 * (self.nx - 1) + 1, ny: 2 * (self.ny - 1) + 1, ..*self }
    }

    /// Grid node closest to `(x, y)`, clamped into the grid.
    pub fn nearest(&self, x: f64, y: f64) -> (usize, usize) {
        let fi = ((x - self.x0) / self.hx()).round();
        let fj = ((y - self.y0) / self.hy()).round();
        let i = if fi < 0.0 { 0 } else { (fi as usize).min(self.nx - 1) };
        let j = if fj < 0.0 { 0 } else { (fj as usize).min(self.ny - 1) };
        (i, j)
    }

    pub(crate) fn require_min(&self, n: usize) -> Result<()> {
        if self.nx < n || self.ny < n {
            Err(Error::TooFewNodes { nx: self.nx, ny: self.ny })
        } else {
            Ok(())
        }
    }
}

/// Per-node scalar with undefined entries (singular, boundary, or outside
/// the domain of a formula).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarGrid {
    pub spec: GridSpec,
    pub values: Vec<Option<f64>>,
}

impl ScalarGrid {
    pub fn undefined(spec: GridSpec) -> Self {
        Self { spec, values: vec![None; spec.len()] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values[self.spec.idx(i, j)]
    }

    pub fn defined(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let nx = self.spec.nx;
        self.values.iter().enumerate().filter_map(move |(k, v)| v.map(|v| (k % nx, k / nx, v)))
    }

    pub fn count(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    /// Largest absolute defined value (0 when nothing is defined).
    pub fn max_abs(&self) -> f64 {
        self.values.iter().flatten().fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    /// Largest absolute value over nodes whose coordinates satisfy `keep`.
    pub fn max_abs_where<P: Fn(f64, f64) -> bool>(&self, keep: P) -> f64 {
        self.defined()
            .filter(|&(i, j, _)| keep(self.spec.x(i), self.spec.y(j)))
            .fold(0.0, |m: f64, (_, _, v)| m.max(v.abs()))
    }

    /// Pointwise `self - other` where both are defined.
    pub fn difference(&self, other: &ScalarGrid) -> Result<ScalarGrid> {
        if self.spec != other.spec {
            return Err(Error::GridMismatch("scalar grids differ"));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| match (a, b) {
                (Some(a), Some(b)) => Some(a - b),
                _ => None,
            })
            .collect();
        Ok(ScalarGrid { spec: self.spec, values })
    }
}

/// Marks every node whose 3x3 neighbourhood touches a flagged node.
pub fn dilate(spec: &GridSpec, mask: &[bool]) -> Vec<bool> {
    let mut out = vec![false; mask.len()];
    for j in 0..spec.ny {
        for i in 0..spec.nx {
            if !mask[spec.idx(i, j)] {
                continue;
            }
            for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if ii >= 0 && jj >= 0 && (ii as usize) < spec.nx && (jj as usize) < spec.ny {
                        out[spec.idx(ii as usize, jj as usize)] = true;
                    }
                }
            }
        }
    }
    out
}

/// Centred second-order difference operators on a full node array.
///
/// Callers guarantee `(i, j)` is interior.
pub(crate) struct Stencil<'a> {
    pub spec: &'a GridSpec,
    pub v: &'a [f64],
    hx: f64,
    hy: f64,
}

impl<'a> Stencil<'a> {
    pub fn new(spec: &'a GridSpec, v: &'a [f64]) -> Self {
        Self { spec, v, hx: spec.hx(), hy: spec.hy() }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.v[self.spec.idx(i, j)]
    }

    #[inline]
    pub fn dx(&self, i: usize, j: usize) -> f64 {
        (self.at(i + 1, j) - self.at(i - 1, j)) / (2.0 * self.hx)
    }

    #[inline]
    pub fn dy(&self, i: usize, j: usize) -> f64 {
        (self.at(i, j + 1) - self.at(i, j - 1)) / (2.0 * self.hy)
    }

    #[inline]
    pub fn dxx(&self, i: usize, j: usize) -> f64 {
        (self.at(i + 1, j) - 2.0 * self.at(i, j) + self.at(i - 1, j)) / (self.hx * self.hx)
    }

    #[inline]
    pub fn dyy(&self, i: usize, j: usize) -> f64 {
        (self.at(i, j + 1) - 2.0 * self.at(i, j) + self.at(i, j - 1)) / (self.hy * self.hy)
    }

    #[inline]
    pub fn laplacian(&self, i: usize, j: usize) -> f64 {
        self.dxx(i, j) + self.dyy(i, j)
    }

    /// Four-point cross stencil for the mixed derivative.
    #[inline]
    pub fn dxy(&self, i: usize, j: usize) -> f64 {
        (self.at(i + 1, j + 1) - self.at(i + 1, j - 1) - self.at(i - 1, j + 1)
            + self.at(i - 1, j - 1))
            / (4.0 * self.hx * self.hy)
    }
}

/// Nodes at which a 3x3 stencil sees only unflagged nodes.
pub(crate) fn stencil_ok(spec: &GridSpec, dilated: &[bool], i: usize, j: usize) -> bool {
    spec.is_interior(i, j) && !dilated[spec.idx(i, j)]
}
