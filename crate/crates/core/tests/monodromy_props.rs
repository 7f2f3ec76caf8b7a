use cantor_riemannium::cauchy::primitive_at;
use cantor_riemannium::geometry::{BinaryWord, EndpointScheme};
use cantor_riemannium::measures::{make_nu, Base, LambdaRule};
use cantor_riemannium::monodromy::{
    borel_extension, group_membership, piece_loop, weierstrass_monodromy, BorelOptions, GroupSpec,
};
use cantor_riemannium::path::{CrossingPath, PolyPath};
use num::complex::Complex64;
use proptest::prelude::*;

fn word(min: usize, max: usize) -> impl Strategy<Value = BinaryWord> {
    prop::collection::vec(0u8..=1, min..=max).prop_map(|d| BinaryWord::from_digits(d).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn monodromy_is_additive(a in word(1, 4), b in word(1, 4)) {
        let rule = LambdaRule::default();
        for base in [Base::Mu, Base::Nu] {
            let la = piece_loop(&a, 0.1).unwrap();
            let lb = piece_loop(&b, 0.15).unwrap();
            let (ma, _) = weierstrass_monodromy(&la, base, &rule, 8, 1e-8).unwrap();
            let (mb, _) = weierstrass_monodromy(&lb, base, &rule, 8, 1e-8).unwrap();
            let (mab, _) = weierstrass_monodromy(&la.concat(&lb).unwrap(), base, &rule, 8, 1e-8).unwrap();
            prop_assert_eq!(mab.center, &ma.center + &mb.center);
        }
    }

    #[test]
    fn monodromy_values_lie_in_their_groups(w in word(1, 4)) {
        let rule = LambdaRule::default();
        let lp = piece_loop(&w, 0.1).unwrap();
        let (mu, rep) = weierstrass_monodromy(&lp, Base::Mu, &rule, 8, 1e-8).unwrap();
        prop_assert!(rep.diff < 1e-6);
        prop_assert!(group_membership(&mu, &GroupSpec::DyadicMu, 8).unwrap().is_member());
        let (nu, _) = weierstrass_monodromy(&lp, Base::Nu, &rule, 8, 1e-8).unwrap();
        let g = GroupSpec::PieceGenerated { rule: rule.clone(), scheme: EndpointScheme::default() };
        prop_assert!(group_membership(&nu, &g, w.level() as u32).unwrap().is_member());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn crossing_free_extension_is_the_primitive(x in -1.0f64..1.0, y in 0.1f64..1.0) {
        let rule = LambdaRule::default();
        let path = PolyPath::open(vec![Complex64::new(0.0, 0.0), Complex64::new(x, y)]).unwrap();
        let rep = borel_extension(&rule, &CrossingPath::without_crossings(path.clone()), &BorelOptions::new(&rule, 1e-7)).unwrap();
        let direct = primitive_at(&make_nu(&rule, 16).unwrap(), &path, 1e-11).unwrap();
        prop_assert!((rep.value() - direct.value).norm() < 1e-6 + direct.total_error());
    }
}
