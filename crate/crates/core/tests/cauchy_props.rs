use cantor_riemannium::cauchy::{primitive_at, CauchyEvaluator};
use cantor_riemannium::measures::truncate_mu;
use cantor_riemannium::path::PolyPath;
use num::complex::Complex64;
use proptest::prelude::*;

fn upper() -> impl Strategy<Value = Complex64> {
    (-1.5f64..1.5, 0.05f64..1.5).prop_map(|(x, y)| Complex64::new(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transform_is_odd(z in upper(), n in 1u32..=10) {
        let ev = CauchyEvaluator::new(&truncate_mu(n).unwrap());
        prop_assert!((ev.f(-z) + ev.f(z)).norm() < 1e-12);
    }

    #[test]
    fn tail_bounds_are_honest(z in upper(), n in 2u32..=8) {
        let a = CauchyEvaluator::new(&truncate_mu(n).unwrap());
        let b = CauchyEvaluator::new(&truncate_mu(n + 4).unwrap());
        let diff = (a.f(z) - b.f(z)).norm();
        prop_assert!(diff <= a.tail_bound(z) + b.tail_bound(z) + 1e-14, "{diff} at {z}");
    }

    #[test]
    fn primitive_differentiates_to_transform(x in -1.0f64..1.0, y in 0.2f64..1.0) {
        let ev = CauchyEvaluator::new(&truncate_mu(8).unwrap());
        let z = Complex64::new(x, y);
        let h = 1e-4;
        let d = (ev.primitive_direct(z + h) - ev.primitive_direct(z - h)) / (2.0 * h);
        prop_assert!((d - ev.f(z)).norm() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn primitive_is_path_independent(z in upper(), a in 0.1f64..1.0) {
        let t = truncate_mu(6).unwrap();
        let zero = Complex64::new(0.0, 0.0);
        let direct = PolyPath::open(vec![zero, z]).unwrap();
        let bent = PolyPath::open(vec![zero, Complex64::new(0.0, a), z]).unwrap();
        let p = primitive_at(&t, &direct, 1e-11).unwrap();
        let q = primitive_at(&t, &bent, 1e-11).unwrap();
        prop_assert!((p.value - q.value).norm() < 1e-9);
        let ev = CauchyEvaluator::new(&t);
        prop_assert!((p.value - ev.primitive_direct(z)).norm() < 1e-9);
        prop_assert!((ev.continue_along(&bent).unwrap() - p.value).norm() < 1e-9);
    }
}
