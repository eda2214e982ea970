use magnon_blockade::nonreciprocity::{contrast_double, contrast_single};
use magnon_blockade::optimal::{self, Branch};
use magnon_blockade::{weakdrive, SystemSpec};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / a.abs().max(b.abs())).abs()
    }
}

fn kerr() -> impl Strategy<Value = f64> {
    (1e-3..5e-2f64, any::<bool>()).prop_map(|(k, neg)| if neg { -k } else { k })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mirror_symmetry(d in -1.5..1.5f64, g in 0.2..20.0f64, k in kerr(), om in 0.01..0.5f64) {
        let a = weakdrive::g2(&SystemSpec::single(d, g, k, om)).unwrap();
        let b = weakdrive::g2(&SystemSpec::single(-d, g, -k, om)).unwrap();
        prop_assert!(rel(a, b) < 1e-9, "{} vs {}", a, b);
    }

    #[test]
    fn sphere_labels_are_interchangeable(
        d in -3.0..3.0f64, g1 in 0.5..60.0f64, g2 in 0.5..60.0f64, k1 in kerr(), k2 in kerr(),
    ) {
        let s = SystemSpec::double(d, [g1, g2], [k1, k2], 0.1);
        let a = weakdrive::g2(&s).unwrap();
        let b = weakdrive::g2(&s.swapped_magnons()).unwrap();
        prop_assert!(rel(a, b) < 1e-9, "{} vs {}", a, b);
    }

    #[test]
    fn optimal_detuning_solves_its_quadratic(k in kerr(), om in 0.0..1.0f64) {
        for branch in [Branch::Plus, Branch::Minus] {
            let d = optimal::delta_opt(k, om, 1.0, branch);
            let lhs = 12.0 * d * d + 28.0 * d * k + 14.0 * k * k;
            prop_assert!((lhs - (2.0 * om * om + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_optimum_is_a_perfect_blockade(k in kerr(), om in 0.01..0.5f64) {
        let p = optimal::closed_form_optimum(k, om, 1.0).unwrap();
        let spec = SystemSpec::single(p.delta, p.g, k, om);
        let g2 = weakdrive::g2(&spec).unwrap();
        prop_assert!(g2 < 1e-18, "g2 = {}", g2);
        // the K-reversed system at the same point is far from blockade
        let rev = weakdrive::g2(&SystemSpec::single(p.delta, p.g, -k, om)).unwrap();
        prop_assert!(rev > 0.1);
    }

    #[test]
    fn contrast_is_bounded(d in -1.5..1.5f64, g in 0.2..20.0f64, k in kerr()) {
        let c = contrast_single(&SystemSpec::single(d, g, k, 0.1)).unwrap().contrast;
        prop_assert!((0.0..=1.0).contains(&c));
        let c2 = contrast_double(&SystemSpec::double(d, [g, 0.7 * g], [k, -k], 0.1)).unwrap().contrast;
        prop_assert!((0.0..=1.0).contains(&c2));
    }

    #[test]
    fn single_sphere_contrast_is_even_in_detuning(d in 0.0..1.5f64, g in 0.2..20.0f64, k in kerr()) {
        let a = contrast_single(&SystemSpec::single(d, g, k, 0.1)).unwrap().contrast;
        let b = contrast_single(&SystemSpec::single(-d, g, k, 0.1)).unwrap().contrast;
        prop_assert!((a - b).abs() < 1e-9, "{} vs {}", a, b);
    }

    #[test]
    fn feasibility_gate(d in -1.0..1.0f64, k in -0.05..0.05f64) {
        let ok = optimal::g_opt(d, k, 1.0).is_ok();
        prop_assert_eq!(ok, (4.0 * d + 3.0 * k) * k > 0.0);
    }
}
