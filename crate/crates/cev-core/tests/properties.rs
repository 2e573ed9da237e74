//! Property-based invariants: homogeneity/monotonicity of the exponent
//! rectangle, Fubini consistency on random spectral measures, inverse round
//! trips for the function registry, and empirical-CDF shape guarantees.

use cev_core::models::LogisticDependence;
use cev_core::montecarlo::{ks_distance, two_sample_ks};
use cev_core::rv::{left_continuous_inverse, parse_function_spec};
use cev_core::spectral::{
    validate_normalization, Atom, MuStar, Representation, SpectralMeasure,
};

use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn logistic_rectangle_is_homogeneous_and_monotone(
        theta in 0.05f64..0.95,
        x in 0.05f64..20.0,
        y in 0.05f64..20.0,
        c in 0.1f64..10.0,
    ) {
        let dep = LogisticDependence::new(theta).unwrap();
        let v = dep.nu_rect(x, y);
        prop_assert!(v >= 0.0);
        // homogeneity of order -1
        let scaled = dep.nu_rect(c * x, c * y);
        prop_assert!((scaled - v / c).abs() <= 1e-9 * (1.0 + v / c));
        // monotone in x, antitone in y
        prop_assert!(dep.nu_rect(x * 1.5, y) + 1e-12 >= v);
        prop_assert!(dep.nu_rect(x, y * 1.5) <= v + 1e-12);
        // x -> inf limit is 1/y
        prop_assert!((dep.nu_rect(1e9 * x.max(1.0), y) - 1.0 / y).abs() < 1e-4 / y + 1e-6);
    }

    #[test]
    fn rectangle_routes_agree_on_random_atomic_measures(
        seedw in proptest::collection::vec((0.0f64..0.95, 0.05f64..2.0), 1..6),
        x in 0.1f64..10.0,
        y in 0.1f64..10.0,
    ) {
        let atoms: Vec<Atom> = seedw.iter().map(|&(w, m)| Atom { w, mass: m }).collect();
        let s = SpectralMeasure::new(Representation::Atoms { atoms }).unwrap();
        let (s, _) = validate_normalization(&s).unwrap();
        let mu = MuStar::new(s);
        let a = mu.rect(x, y).unwrap();
        let b = mu.rect_fubini(x, y).unwrap();
        prop_assert!((a - b).abs() <= 1e-6, "{a} vs {b}");
        // rectangle values are nonnegative, monotone in x, antitone in y
        prop_assert!(a >= 0.0);
        prop_assert!(mu.rect(2.0 * x, y).unwrap() + 1e-12 >= a);
        prop_assert!(mu.rect(x, 2.0 * y).unwrap() <= a + 1e-12);
    }

    #[test]
    fn registry_inverse_round_trips(p in 0.2f64..3.0, t in 0.01f64..1e6) {
        let h = parse_function_spec(&format!("pow:{p}")).unwrap();
        let y = h.eval(t);
        let back = left_continuous_inverse(&h, y).unwrap();
        prop_assert!((back - t).abs() <= 1e-8 * t.max(1.0));
    }

    #[test]
    fn generalized_inverse_is_left_continuous_infimum(t in 1.01f64..1e4) {
        // u(y) = floor-ish step function: inf{y : u(y) >= t} takes the left
        // endpoint of the step; identity is the smooth sanity case.
        let id = parse_function_spec("identity").unwrap();
        let v = left_continuous_inverse(&id, t).unwrap();
        prop_assert!((v - t).abs() <= 1e-9 * t);
    }

    #[test]
    fn ks_statistics_land_in_unit_interval(
        emp in proptest::collection::vec(0.0f64..=1.0, 8..64),
    ) {
        let mut emp = emp;
        emp.sort_by(f64::total_cmp);
        let xs: Vec<f64> = (0..emp.len()).map(|i| i as f64).collect();
        let d = ks_distance(&xs, &emp, |x| (x / emp.len() as f64).clamp(0.0, 1.0));
        prop_assert!((0.0..=1.0).contains(&d));
        let d2 = two_sample_ks(&emp, &emp);
        prop_assert!(d2 == 0.0);
    }
}
