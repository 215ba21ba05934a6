//! Construction, classification and numerical verification of minimal
//! surfaces in `M x R` (with `M` of constant curvature `c0`) that are
//! foliated by horizontal curves of constant geodesic curvature.
//!
//! The pipeline is:
//!
//! 1. [`moduli`]: the parameter algebra on `(c0, c, d)` and the region
//!    classification of the two-parameter family.
//! 2. [`profile`]: the separated quartic-oscillator ODEs for the profile
//!    functions `f(x)` and `g(y)`, with exact periods.
//! 3. [`field`]: the conformal exponent `omega` (metric `cosh^2(omega)|dz|^2`)
//!    assembled on a grid, its singular set, the sinh-Gordon residual and a
//!    Newton relaxation solver for Dirichlet problems.
//! 4. [`shiffman`]: the Shiffman Jacobi field, the Jacobi operator potential
//!    and the Gauss curvature, all computed intrinsically from `omega`.
//! 5. [`chart`], [`frame`] and [`immersion`]: conformal charts of `M`, the
//!    frame equations for the harmonic map `F`, and the immersion
//!    `X = (F, y)` with its diagnostics.
//!
//! The crate is `no_std` (it needs `alloc`). File formats and the command
//! line live in the `foliata` crate.
#![no_std]
// `math::Real` is redundant whenever std is anywhere in the crate graph
// (rayon, or a dependency built with its `std` feature): std's inherent
// float methods then take precedence.
#![allow(unused_imports)]

extern crate alloc;
#[cfg(any(test, feature = "parallel"))]
extern crate std;

pub mod chart;
pub mod convergence;
pub mod error;
pub mod field;
pub mod frame;
pub mod grid;
pub mod immersion;
pub mod moduli;
pub mod profile;
pub mod shiffman;
pub mod source;

mod banded;
mod math;
mod par;

pub use chart::{chart_factor, ChartKind, ChartSpace};
pub use error::{Error, Result};
pub use field::{
    assemble_omega, assemble_omega_degenerate, level_curvatures, singular_set,
    sinh_gordon_residual, solve_sinh_gordon, AssemblyOptions, LevelCurvatures, OmegaField,
    Provenance, Reconstruction, RelaxOptions, ResidualStats,
};
pub use frame::{integrate_frame, FrameField, FrameOptions, FrameSeed, NodeStatus};
pub use grid::{GridSpec, ScalarGrid};
pub use immersion::{
    axis_seed, build_mesh, harmonic_residual, harmonic_residual_grid, holonomy, isometry_check,
    row_geodesic_curvature, weierstrass_flat, HolonomyKind, HolonomyReport, IsometryReport, SurfaceMesh,
};
pub use moduli::{
    classify, derive_params, moduli_scan, normalize_curvature, Certificate, DerivedParams,
    ModuliPoint, Region, RegionReport, Roots, ScanCell,
};
pub use profile::{
    admissible_interval, degenerate_constants, integrate_profile, profile_period, Branch,
    ProfileKind, ProfileOptions, ProfileSolution,
};
pub use shiffman::{
    gauss_curvature, gauss_curvature_fd, jacobi_potential, jacobi_report, jacobi_residual,
    shiffman_field, shiffman_field_via_curvature, JacobiReport,
};
pub use source::{DegenerateSource, GridSource, OmegaSample, OmegaSource, ProfileSource};

/// Denominator threshold used by the reconstruction formulas and by every
/// "is this quantity zero" test on profile data.
pub const EPS_DEN: f64 = 1e-9;

/// `|sinh(omega)|` above this value marks a node as lying on the singular set.
pub const OVERFLOW_GUARD: f64 = 1e8;
