use foliata_core::{classify, derive_params, integrate_profile, moduli_scan, ModuliPoint, ProfileKind, ProfileOptions};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn certificate_reproduces_the_label(c0 in prop::sample::select(vec![-4.0, -1.0, 0.0, 1.0, 2.5]), c in -3.0f64..3.0, d in -3.0f64..3.0) {
        let p = if c0 == 0.0 { ModuliPoint::new(0.0, c, c) } else { ModuliPoint::new(c0, c, d) };
        let rep = classify(&p).unwrap();
        let all_hold = rep.certificate.iter().all(|cert| cert.satisfied);
        // c0 = 0 additionally needs c <= 0, which is not a certificate entry.
        if c0 != 0.0 {
            prop_assert_eq!(rep.inside(), all_hold);
        } else if !all_hold {
            prop_assert!(!rep.inside());
        }
    }

    #[test]
    fn discriminants_agree(c0 in -2.0f64..2.0, c in -2.0f64..2.0, d in -2.0f64..2.0) {
        prop_assume!(c0.abs() > 0.1);
        let dp = derive_params(&ModuliPoint::new(c0, c, d)).unwrap();
        let a = dp.cbar * dp.cbar - 4.0 * dp.c;
        let b = dp.dbar * dp.dbar - 4.0 * dp.d;
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()) + dp.cbar * dp.cbar + dp.dbar * dp.dbar));
    }

    #[test]
    fn scan_is_a_function_of_the_cell_centre(nx in 2usize..6, ny in 2usize..6) {
        let rect = (-2.0, 2.0, -1.5, 2.5);
        let cells = moduli_scan(-1.0, rect, nx, ny).unwrap();
        prop_assert_eq!(cells.len(), nx * ny);
        for cell in &cells {
            let rep = classify(&ModuliPoint::new(-1.0, cell.c, cell.d)).unwrap();
            prop_assert_eq!(rep.label, cell.label);
        }
    }

    #[test]
    fn profiles_stay_in_their_interval(c in -1.5f64..-0.05, d in -1.5f64..-0.05) {
        let dp = derive_params(&ModuliPoint::new(1.0, c, d)).unwrap();
        for kind in [ProfileKind::F, ProfileKind::G] {
            let sol = integrate_profile(&dp, kind, (0.0, 10.0), 2e-3, &ProfileOptions::default()).unwrap();
            let (m, big_m) = foliata_core::admissible_interval(&dp, kind).unwrap();
            let (lo, hi) = sol.square_range();
            prop_assert!(lo >= m - 1e-10 && hi <= big_m + 1e-10);
            prop_assert!(sol.first_integral_drift <= 1e-9);
        }
    }
}
