#![allow(dead_code)]

use foliata_core::{
    assemble_omega, axis_seed, derive_params, integrate_frame, integrate_profile, AssemblyOptions, Branch,
    ChartSpace, FrameField, FrameOptions, GridSpec, ModuliPoint, OmegaField, OmegaSource, ProfileKind,
    ProfileOptions, ProfileSolution, ProfileSource,
};

pub fn profile(p: &ModuliPoint, kind: ProfileKind, range: (f64, f64), step: f64, branch: Branch) -> ProfileSolution {
    let dp = derive_params(p).unwrap();
    let opts = ProfileOptions { branch, ..ProfileOptions::default() };
    integrate_profile(&dp, kind, range, step, &opts).unwrap()
}

/// Field and matching source on `spec`, profiles sampled at the grid step
/// or finer.
pub fn reconstruct_with(p: &ModuliPoint, spec: &GridSpec, f_branch: Branch, g_branch: Branch) -> (OmegaField, ProfileSource) {
    let h = spec.hx().min(spec.hy());
    let step = h / (h / 0.005).ceil();
    let f = profile(p, ProfileKind::F, (spec.x0, spec.x1), step, f_branch);
    let g = profile(p, ProfileKind::G, (spec.y0, spec.y1), step, g_branch);
    let field = assemble_omega(&f, &g, spec, &AssemblyOptions::default()).unwrap();
    (field, ProfileSource::new(f, g, AssemblyOptions::default()).unwrap())
}

pub fn reconstruct(p: &ModuliPoint, spec: &GridSpec) -> (OmegaField, ProfileSource) {
    reconstruct_with(p, spec, Branch::Canonical, Branch::Canonical)
}

pub fn frame(field: &OmegaField, src: &dyn OmegaSource, f: Option<&ProfileSolution>, substeps: usize) -> FrameField {
    let seed = axis_seed(field, f).unwrap();
    let opts = FrameOptions { substeps, ..FrameOptions::default() };
    integrate_frame(field, src, &ChartSpace::for_curvature(field.c0), &seed, &opts).unwrap()
}

pub fn square(x0: f64, x1: f64, n: usize) -> GridSpec {
    GridSpec::new(x0, x1, x0, x1, n, n).unwrap()
}
