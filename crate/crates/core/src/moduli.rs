//! Parameter algebra on `(c0, c, d)` and classification of the
//! two-parameter family.
//!
//! The profiles satisfy `-f_x^2 = f^4 + cbar f^2 + c` and
//! `-g_y^2 = g^4 + dbar g^2 + d` with `cbar = c0 + a`, `dbar = c0 - a`.
//! `f^2` ranges between the roots of `P(X) = X^2 + cbar X + c`, `g^2`
//! between the roots of `Q(Y) = Y^2 + dbar Y + d`. Both quadratics share
//! the discriminant `delta` because `cbar^2 - dbar^2 = 4 c0 a = 4 (c - d)`.

use alloc::vec::Vec;
use core::fmt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::Real;

/// Relative tolerance for the "equals zero" tests in [`classify`].
const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModuliPoint {
    pub c0: f64,
    pub c: f64,
    pub d: f64,
    /// Separation constant; only read when `c0 == 0` (defaults to 0).
    #[serde(default)]
    pub a: Option<f64>,
}

impl ModuliPoint {
    pub fn new(c0: f64, c: f64, d: f64) -> Self {
        Self { c0, c, d, a: None }
    }

    /// Flat-case point `c = d` with an explicit separation constant.
    pub fn flat(c: f64, a: f64) -> Self {
        Self { c0: 0.0, c, d: c, a: Some(a) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c0.is_finite() && self.c.is_finite() && self.d.is_finite()) {
            return Err(Error::InvalidParams("c0, c and d must be finite"));
        }
        if let Some(a) = self.a {
            if !a.is_finite() {
                return Err(Error::InvalidParams("separation constant must be finite"));
            }
        }
        if self.c0 == 0.0 {
            let scale = 1f64.max(self.c.abs()).max(self.d.abs());
            if (self.c - self.d).abs() > BOUNDARY_TOL * scale {
                return Err(Error::InvalidParams("c0 = 0 requires c = d"));
            }
        }
        Ok(())
    }
}

/// Roots of `P` and `Q`, present only when `delta >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Roots {
    pub xplus: f64,
    pub xminus: f64,
    pub yplus: f64,
    pub yminus: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    pub c0: f64,
    pub c: f64,
    pub d: f64,
    pub a: f64,
    pub cbar: f64,
    pub dbar: f64,
    pub delta: f64,
    pub roots: Option<Roots>,
}

impl DerivedParams {
    /// `(cbar, c)` for the f-profile or `(dbar, d)` for the g-profile.
    pub fn coefficients(&self, g: bool) -> (f64, f64) {
        if g {
            (self.dbar, self.d)
        } else {
            (self.cbar, self.c)
        }
    }
}

pub fn derive_params(p: &ModuliPoint) -> Result<DerivedParams> {
    p.validate()?;
    let (c0, c, d) = (p.c0, p.c, p.d);
    let a = if c0 == 0.0 { p.a.unwrap_or(0.0) } else { (c - d) / c0 };
    let cbar = c0 + a;
    let dbar = c0 - a;
    let delta = cbar * cbar - 4.0 * c;
    let roots = (delta >= 0.0).then(|| {
        let s = delta.sqrt();
        Roots {
            xplus: 0.5 * (-cbar + s),
            xminus: 0.5 * (-cbar - s),
            yplus: 0.5 * (-dbar + s),
            yminus: 0.5 * (-dbar - s),
        }
    });
    Ok(DerivedParams { c0, c, d: if c0 == 0.0 { c } else { d }, a, cbar, dbar, delta, roots })
}

/// Sign of `c0` and the coordinate scale `sqrt|c0|` (1 when `c0 = 0`).
///
/// Rescaling `z -> sqrt|c0| z` maps the problem for `c0` to the one for
/// `sign(c0)` with `(c, d) -> (c / c0^2, d / c0^2)`.
pub fn normalize_curvature(c0: f64) -> (i8, f64) {
    if c0 > 0.0 {
        (1, c0.sqrt())
    } else if c0 < 0.0 {
        (-1, (-c0).sqrt())
    } else {
        (0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    OnduloidRotational,
    HelicoidS2,
    RiemannTypeS2,
    FlatVerticalAnnulus,
    GammaHelicoidalType,
    HorizontalGeodesicFoliation,
    ObliquePlane,
    CatenoidRotational,
    CatenoidEquidistant,
    GraphEquidistant,
    AnnulusFamily,
    OndulatedHelicoid,
    BlowedHelicoid,
    RiemannFamilyH2,
    ClassicalRiemannR3,
    VerticalGeodesicPlane,
    OutsideModuli,
}

impl Region {
    pub const ALL: [Region; 17] = [
        Region::OnduloidRotational,
        Region::HelicoidS2,
        Region::RiemannTypeS2,
        Region::FlatVerticalAnnulus,
        Region::GammaHelicoidalType,
        Region::HorizontalGeodesicFoliation,
        Region::ObliquePlane,
        Region::CatenoidRotational,
        Region::CatenoidEquidistant,
        Region::GraphEquidistant,
        Region::AnnulusFamily,
        Region::OndulatedHelicoid,
        Region::BlowedHelicoid,
        Region::RiemannFamilyH2,
        Region::ClassicalRiemannR3,
        Region::VerticalGeodesicPlane,
        Region::OutsideModuli,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Region::OnduloidRotational => "OnduloidRotational",
            Region::HelicoidS2 => "HelicoidS2",
            Region::RiemannTypeS2 => "RiemannTypeS2",
            Region::FlatVerticalAnnulus => "FlatVerticalAnnulus",
            Region::GammaHelicoidalType => "GammaHelicoidalType",
            Region::HorizontalGeodesicFoliation => "HorizontalGeodesicFoliation",
            Region::ObliquePlane => "ObliquePlane",
            Region::CatenoidRotational => "CatenoidRotational",
            Region::CatenoidEquidistant => "CatenoidEquidistant",
            Region::GraphEquidistant => "GraphEquidistant",
            Region::AnnulusFamily => "AnnulusFamily",
            Region::OndulatedHelicoid => "OndulatedHelicoid",
            Region::BlowedHelicoid => "BlowedHelicoid",
            Region::RiemannFamilyH2 => "RiemannFamilyH2",
            Region::ClassicalRiemannR3 => "ClassicalRiemannR3",
            Region::VerticalGeodesicPlane => "VerticalGeodesicPlane",
            Region::OutsideModuli => "OutsideModuli",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One evaluated membership inequality.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub inequality: &'static str,
    pub lhs: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionReport {
    pub label: Region,
    /// Inequalities in evaluation order, on the normalized parameters
    /// `(c / c0^2, d / c0^2)` when `c0 != 0`.
    pub certificate: Vec<Certificate>,
    pub derived: DerivedParams,
}

impl RegionReport {
    pub fn inside(&self) -> bool {
        self.label != Region::OutsideModuli
    }
}

struct Checker {
    items: Vec<Certificate>,
    tol: f64,
}

impl Checker {
    fn nonneg(&mut self, inequality: &'static str, lhs: f64) -> bool {
        let satisfied = lhs >= -self.tol;
        self.items.push(Certificate { inequality, lhs, satisfied });
        satisfied
    }

    fn nonpos(&mut self, inequality: &'static str, lhs: f64) -> bool {
        let satisfied = lhs <= self.tol;
        self.items.push(Certificate { inequality, lhs, satisfied });
        satisfied
    }
}

pub fn classify(p: &ModuliPoint) -> Result<RegionReport> {
    let derived = derive_params(p)?;
    let (sign, _) = normalize_curvature(p.c0);
    let c0sq = p.c0 * p.c0;
    let (c, d) = if sign == 0 { (p.c, p.c) } else { (p.c / c0sq, p.d / c0sq) };
    let tol = BOUNDARY_TOL * 1f64.max(c.abs()).max(d.abs());
    let zero = |v: f64| v.abs() <= tol;
    let mut chk = Checker { items: Vec::new(), tol };

    let label = match sign {
        1 => {
            let c_ok = chk.nonpos("c <= 0", c);
            let d_ok = chk.nonpos("d <= 0", d);
            if !(c_ok && d_ok) {
                Region::OutsideModuli
            } else if zero(c) && zero(d) {
                Region::FlatVerticalAnnulus
            } else if zero(c) {
                Region::OnduloidRotational
            } else if zero(d) {
                Region::HelicoidS2
            } else {
                Region::RiemannTypeS2
            }
        }
        -1 => {
            let n = derive_params(&ModuliPoint::new(-1.0, c, d))?;
            let inside = chk.nonneg("delta >= 0", n.delta) && {
                let r = n.roots.unwrap_or(Roots {
                    xplus: 0.0,
                    xminus: 0.0,
                    yplus: 0.0,
                    yminus: 0.0,
                });
                chk.nonneg("xplus >= 0", r.xplus) && chk.nonneg("yplus >= 0", r.yplus)
            };
            if !inside {
                Region::OutsideModuli
            } else {
                hyperbolic_label(c, d, n.delta, &zero)
            }
        }
        _ => {
            let n = derive_params(&ModuliPoint { c0: 0.0, c, d: c, a: p.a })?;
            let inside = chk.nonneg("delta >= 0", n.delta) && {
                let r = n.roots.expect("nonnegative discriminant has roots");
                chk.nonneg("xplus >= 0", r.xplus) && chk.nonneg("yplus >= 0", r.yplus)
            };
            if !inside || c > tol {
                Region::OutsideModuli
            } else if zero(c) {
                Region::VerticalGeodesicPlane
            } else {
                Region::ClassicalRiemannR3
            }
        }
    };
    Ok(RegionReport { label, certificate: chk.items, derived })
}

fn hyperbolic_label(c: f64, d: f64, delta: f64, zero: &dyn Fn(f64) -> bool) -> Region {
    if zero(delta) {
        Region::GammaHelicoidalType
    } else if zero(c) && zero(d) {
        Region::VerticalGeodesicPlane
    } else if zero(d) {
        if c > 0.0 {
            Region::HorizontalGeodesicFoliation
        } else {
            Region::ObliquePlane
        }
    } else if zero(c) {
        if d > 1.0 {
            Region::CatenoidRotational
        } else if d > 0.0 {
            Region::CatenoidEquidistant
        } else {
            Region::GraphEquidistant
        }
    } else {
        match (c > 0.0, d > 0.0) {
            (false, true) => Region::AnnulusFamily,
            (true, false) => Region::OndulatedHelicoid,
            (true, true) => Region::BlowedHelicoid,
            (false, false) => Region::RiemannFamilyH2,
        }
    }
}

/// One cell of a [`moduli_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanCell {
    pub c: f64,
    pub d: f64,
    pub label: Region,
}

/// Labels at the cell centres of an `nx x ny` partition of
/// `[cmin, cmax] x [dmin, dmax]`, row-major with `d` outermost.
///
/// With `c0 = 0` only the diagonal `c = d` is admissible; other cells are
/// labelled [`Region::OutsideModuli`].
pub fn moduli_scan(c0: f64, rect: (f64, f64, f64, f64), nx: usize, ny: usize) -> Result<Vec<ScanCell>> {
    let (cmin, cmax, dmin, dmax) = rect;
    let finite = c0.is_finite() && cmin.is_finite() && cmax.is_finite() && dmin.is_finite() && dmax.is_finite();
    if !finite || cmax <= cmin || dmax <= dmin {
        return Err(Error::InvalidParams("scan rectangle must be finite and nondegenerate"));
    }
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidParams("scan needs at least one cell per axis"));
    }
    let hc = (cmax - cmin) / nx as f64;
    let hd = (dmax - dmin) / ny as f64;
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let d = dmin + (j as f64 + 0.5) * hd;
        for i in 0..nx {
            let c = cmin + (i as f64 + 0.5) * hc;
            let label = match classify(&ModuliPoint::new(c0, c, d)) {
                Ok(r) => r.label,
                Err(Error::InvalidParams(_)) if c0 == 0.0 => Region::OutsideModuli,
                Err(e) => return Err(e),
            };
            out.push(ScanCell { c, d, label });
        }
    }
    Ok(out)
}
