mod common;

use common::{profile, reconstruct, reconstruct_with, square};
use foliata_core::convergence::observed_order;
use foliata_core::{
    derive_params, gauss_curvature, jacobi_potential, jacobi_report, level_curvatures, profile_period,
    shiffman_field, shiffman_field_via_curvature, sinh_gordon_residual, solve_sinh_gordon, Branch, GridSpec,
    ModuliPoint, ProfileKind, RelaxOptions,
};

#[test]
fn quartic_identity_and_compatibility_constants() {
    for p in [
        ModuliPoint::new(1.0, -1.0, -1.0),
        ModuliPoint::new(-1.0, -1.0, 1.0),
        ModuliPoint::new(-1.0, 0.3, -0.2),
        ModuliPoint::new(0.0, -0.25, -0.25),
    ] {
        let dp = derive_params(&p).unwrap();
        let f = profile(&p, ProfileKind::F, (0.0, 3.0), 1e-3, Branch::Canonical);
        let g = profile(&p, ProfileKind::G, (0.0, 3.0), 1e-3, Branch::Canonical);
        for k in (0..f.len()).step_by(97) {
            for q in (0..g.len()).step_by(89) {
                let (fv, fx, gv, gy) = (f.values[k], f.derivs[k], g.values[q], g.derivs[q]);
                let lhs = fx * fx - gy * gy;
                let rhs = (p.c0 + gv * gv + fv * fv) * (gv * gv - fv * fv - dp.a);
                assert!((lhs - rhs).abs() <= 1e-8 * (1.0 + lhs.abs()), "{p:?}");
                let e1 = fv * (p.c0 * p.c0 - dp.cbar * p.c0 + dp.c - dp.d) + fv * gv * gv * (2.0 * p.c0 - dp.cbar - dp.dbar);
                let e2 = gv * (p.c0 * p.c0 - dp.dbar * p.c0 + dp.d - dp.c) + gv * fv * fv * (2.0 * p.c0 - dp.cbar - dp.dbar);
                assert!(e1.abs() <= 1e-10 && e2.abs() <= 1e-10);
            }
        }
    }
}

#[test]
fn profile_invariants() {
    let p = ModuliPoint::new(1.0, -1.0, 0.0);
    let dp = derive_params(&p).unwrap();
    let period = profile_period(&dp, ProfileKind::F).unwrap();
    let f = profile(&p, ProfileKind::F, (0.0, 3.0 * period), 1e-3, Branch::Canonical);
    let (lo, hi) = f.square_range();
    assert!(lo >= -1e-10 && hi <= 1.0 + 1e-10);
    for x in [0.1, 0.7, 2.3, 4.0] {
        let a = f.eval(x).unwrap().0;
        let b = f.eval(x + 0.5 * period).unwrap().0;
        let c = f.eval(x + period).unwrap().0;
        assert!((a + b).abs() < 1e-8 && (a - c).abs() < 1e-8);
    }

    // Constant-sign oscillation between two positive roots.
    let p = ModuliPoint::new(-1.0, -0.25, 0.0);
    let dp = derive_params(&p).unwrap();
    let period = profile_period(&dp, ProfileKind::F).unwrap();
    let f = profile(&p, ProfileKind::F, (0.0, 5.0 * period), 1e-3, Branch::Canonical);
    let measured = f.measured_period().unwrap();
    assert!((measured - period).abs() / period <= 1e-8);
}

#[test]
fn horizontal_curvature_depends_on_height_only() {
    let p = ModuliPoint::new(1.0, 0.0, -0.25);
    let mut errs = Vec::new();
    for n in [41, 81] {
        let spec = GridSpec::new(0.0, 1.0, -1.0, 1.0, n, 2 * n - 1).unwrap();
        let (field, src) = reconstruct_with(&p, &spec, Branch::Trivial, Branch::Canonical);
        let k = level_curvatures(&field).k_h;
        let mut e = 0.0f64;
        for (_, j, v) in k.defined() {
            e = e.max((v - src.g.eval(spec.y(j)).unwrap().0).abs());
        }
        errs.push(e);
    }
    assert!(observed_order(errs[0], errs[1], 2.0) > 1.8, "{errs:?}");
}

#[test]
fn vertical_curvature_recovers_f() {
    let p = ModuliPoint::new(1.0, -1.0, 0.0);
    let spec = square(0.1, 1.1, 201);
    let (field, src) = reconstruct(&p, &spec);
    let kv = level_curvatures(&field).k_v;
    let mut worst = 0.0f64;
    for (i, j, v) in kv.defined() {
        let w = field.get(i, j).unwrap();
        if w.abs() < 0.05 {
            continue;
        }
        worst = worst.max((v * w.tanh() + src.f.eval(spec.x(i)).unwrap().0).abs());
    }
    assert!(worst < 1e-3, "{worst}");
}

#[test]
fn relaxation_with_a_bumped_edge_converges() {
    let p = ModuliPoint::new(-1.0, -0.25, -0.25);
    let spec = square(0.0, 1.0, 41);
    let (exact, _) = reconstruct(&p, &spec);
    let bump = |t: f64| if t <= 0.0 || t >= 1.0 { 0.0 } else { 0.1 * 4f64.exp() * (-1.0 / (t * (1.0 - t))).exp() };
    let boundary: Vec<f64> =
        (0..spec.len()).map(|k| exact.omega[k] + if k < spec.nx { bump(spec.x(k)) } else { 0.0 }).collect();
    let field = solve_sinh_gordon(-1.0, &spec, &boundary, &RelaxOptions::default()).unwrap();
    assert!(sinh_gordon_residual(&field).unwrap().linf < 1e-10);
    // The perturbed solution is not in the foliated family.
    assert!(shiffman_field(&field).unwrap().max_abs() > 1e-3);
}

#[test]
fn jacobi_quantities_on_reconstructed_fields() {
    let p = ModuliPoint::new(1.0, -1.0, 0.0);
    let (field, _) = reconstruct(&p, &square(0.0, 1.0, 101));
    assert!(jacobi_potential(&field).defined().all(|(_, _, v)| v >= 0.0));
    assert!(gauss_curvature(&field).defined().all(|(_, _, v)| v <= 1.0));
    let rep = jacobi_report(&field).unwrap();
    assert!(rep.max_u < 1e-3);
    assert!(rep.jacobi_residual.linf < 1e-2);
    assert!(rep.potential_identity_linf < 1e-3);
    assert!(rep.curvature_route_linf < 1e-3);
}

#[test]
fn shiffman_routes_agree_to_second_order() {
    let mut gaps = Vec::new();
    for n in [41, 81] {
        let spec = square(0.0, 1.0, n);
        let boundary: Vec<f64> = (0..spec.len()).map(|k| 0.4 * spec.x(k % n) * spec.y(k / n) + 0.2 * spec.x(k % n)).collect();
        let field = solve_sinh_gordon(-1.0, &spec, &boundary, &RelaxOptions::default()).unwrap();
        let a = shiffman_field(&field).unwrap();
        let b = shiffman_field_via_curvature(&field).unwrap();
        let d = a.difference(&b).unwrap();
        // Away from the boundary layer of the relaxed solution.
        let inner = |t: f64| (0.25..=0.75).contains(&t);
        gaps.push(d.max_abs_where(|x, y| inner(x) && inner(y)));
    }
    assert!(observed_order(gaps[0], gaps[1], 2.0) > 1.7, "{gaps:?}");
}
