mod common;

use common::{frame, reconstruct, reconstruct_with, square};
use foliata_core::{
    assemble_omega_degenerate, build_mesh, harmonic_residual, holonomy, integrate_frame, weierstrass_flat,
    AssemblyOptions, Branch, ChartSpace, DegenerateSource, FrameOptions, FrameSeed, GridSpec, HolonomyKind,
    ModuliPoint, OmegaSource,
};
use rand::{Rng, SeedableRng};

fn onduloid(spec: &GridSpec) -> (foliata_core::OmegaField, foliata_core::ProfileSource) {
    reconstruct_with(&ModuliPoint::new(1.0, 0.0, -0.25), spec, Branch::Trivial, Branch::Canonical)
}

#[test]
fn onduloid_period_map_is_a_rotation_about_the_axis() {
    let spec = GridSpec::new(0.0, 2.0, -1.0, 1.0, 201, 201).unwrap();
    let (field, src) = onduloid(&spec);
    let fr = frame(&field, &src, None, 2);
    let period = 1.5;
    let hol = holonomy(&fr, &src, period, 4, 9).unwrap();
    assert_eq!(hol.kind, HolonomyKind::Elliptic);
    assert!(!hol.closed);
    assert!(hol.residual <= 1e-6, "residual {}", hol.residual);

    // A circle of geodesic curvature k on the unit sphere, traversed at
    // speed v, turns about its centre at rate v * sqrt(1 + k^2).
    let y0 = spec.y(fr.seed.j);
    let s = src.sample(spec.x(fr.seed.i), y0).unwrap();
    let g = src.g.eval(y0).unwrap().0;
    let expected = period * s.omega.cosh() * (1.0 + g * g).sqrt();
    let wrap = |a: f64| (a + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI) - std::f64::consts::PI;
    let got = hol.angle_or_length;
    assert!(wrap(got - expected).abs() < 1e-6 || wrap(got + expected).abs() < 1e-6, "angle {got} vs {expected}");

    // The fixed point is the common centre of the horizontal circles, away
    // from the seed point itself.
    let c = hol.fixed_point.unwrap();
    assert!(c[0].hypot(c[1]) > 1e-3);
}

#[test]
fn onduloid_meridians_are_great_circles() {
    let spec = GridSpec::new(0.0, 1.0, -1.0, 1.0, 101, 201).unwrap();
    let (field, src) = onduloid(&spec);
    let fr = frame(&field, &src, None, 2);
    // Seed column through the chart origin with psi0 = 0 stays on u1 = 0.
    for j in 0..spec.ny {
        assert!(fr.u[spec.idx(fr.seed.i, j)][0].abs() < 1e-12);
    }
    // Stereographic images of great circles: |centre|^2 + 1 = radius^2.
    for i in [20, 60, 100] {
        let p = |j: usize| fr.u[spec.idx(i, j)];
        let (a, b, c) = (p(10), p(100), p(190));
        let d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]));
        let n = |q: [f64; 2]| q[0] * q[0] + q[1] * q[1];
        let cx = (n(a) * (b[1] - c[1]) + n(b) * (c[1] - a[1]) + n(c) * (a[1] - b[1])) / d;
        let cy = (n(a) * (c[0] - b[0]) + n(b) * (a[0] - c[0]) + n(c) * (b[0] - a[0])) / d;
        let r2 = (a[0] - cx).powi(2) + (a[1] - cy).powi(2);
        assert!((r2 - cx * cx - cy * cy - 1.0).abs() < 1e-6, "column {i}");
        for j in (0..spec.ny).step_by(7) {
            let q = p(j);
            assert!(((q[0] - cx).powi(2) + (q[1] - cy).powi(2) - r2).abs() < 1e-6);
        }
    }
}

#[test]
fn gamma_axis_turns_at_constant_rate() {
    // c0 = -1, c = d = 1/4: alpha = beta = 1/sqrt(2), axis x + y = 0.
    let (alpha, beta) = (0.5f64.sqrt(), 0.5f64.sqrt());
    let spec = GridSpec::new(-0.5, 0.5, -0.5, 0.5, 201, 201).unwrap();
    let field = assemble_omega_degenerate(alpha, beta, &spec, &AssemblyOptions::default()).unwrap();
    let src = DegenerateSource::new(alpha, beta);
    let fr = integrate_frame(&field, &src, &ChartSpace::for_curvature(-1.0), &FrameSeed::at(100, 100), &FrameOptions::default()).unwrap();
    let h = spec.hy();
    for i in [60, 100, 140] {
        let j = spec.nx - 1 - i;
        assert!(field.get(i, j).unwrap().abs() < 1e-12);
        let psi = |j: usize| fr.psi[spec.idx(i, j)];
        let psi_y = (psi(j + 1) - psi(j - 1)) / (2.0 * h);
        assert!((psi_y + alpha).abs() < 1e-4, "psi_y {psi_y}");
    }
}

#[test]
fn harmonic_residual_converges_and_detects_noise() {
    let p = ModuliPoint::new(-1.0, -1.0, -1.0);
    let mut clean = Vec::new();
    let mut noisy = Vec::new();
    let mut rng = rand::rngs::StdRng::seed_from_u64(3);
    for n in [51, 101] {
        let spec = square(0.0, 0.5, n);
        let (field, src) = reconstruct(&p, &spec);
        let mut fr = frame(&field, &src, Some(&src.f), 2);
        clean.push(harmonic_residual(&fr).unwrap().linf);
        for u in fr.u.iter_mut() {
            u[0] += 1e-3 * rng.gen_range(-1.0..1.0);
            u[1] += 1e-3 * rng.gen_range(-1.0..1.0);
        }
        noisy.push(harmonic_residual(&fr).unwrap().linf);
    }
    let ratio = clean[0] / clean[1];
    assert!((ratio - 4.0).abs() < 0.5, "clean ratio {ratio}");
    assert!(noisy[1] > noisy[0], "noisy residuals {noisy:?}");
}

#[test]
fn path_compatibility_refines() {
    let p = ModuliPoint::new(1.0, -1.0, -1.0);
    let mut compat = Vec::new();
    for n in [26, 51] {
        let spec = square(0.0, 1.0, n);
        let (field, src) = reconstruct(&p, &spec);
        compat.push(frame(&field, &src, Some(&src.f), 1).compat_linf);
    }
    assert!(compat[1] < compat[0] / 4.0 && compat[1] <= 1e-6, "{compat:?}");
}

#[test]
fn annulus_region_mesh_is_clipped_at_the_singular_set() {
    // Region 1: g^2 = 1 on horizontal lines bounds the strips.
    let p = ModuliPoint::new(-1.0, -1.0, 1.0);
    let spec = GridSpec::new(-1.0, 1.0, -2.0, 2.0, 81, 161).unwrap();
    let (field, src) = reconstruct(&p, &spec);
    assert!(field.singular_count() > 0);
    let fr = frame(&field, &src, Some(&src.f), 1);
    let mesh = build_mesh(&fr, &field).unwrap();
    assert!(!mesh.faces.is_empty());
    assert!(mesh.faces.len() < (spec.nx - 1) * (spec.ny - 1));
    for face in &mesh.faces {
        for &v in face {
            assert!(!field.singular_mask[mesh.nodes[v]]);
        }
    }
    assert!(mesh.quadric_linf() < 1e-10);
}

#[test]
fn weierstrass_height_is_the_conformal_coordinate() {
    let p = ModuliPoint::new(0.0, -0.25, -0.25);
    let spec = square(0.5, 3.0, 101);
    let (field, src) = reconstruct(&p, &spec);
    let fr = frame(&field, &src, Some(&src.f), 2);
    let mesh = weierstrass_flat(&field, &fr).unwrap();
    let j0 = fr.seed.j;
    for (node, x) in mesh.nodes.iter().zip(&mesh.chart_coords) {
        let j = node / spec.nx;
        assert!((x[2] - spec.y(j)).abs() < 1e-12, "row {j} vs seed row {j0}");
    }
}
