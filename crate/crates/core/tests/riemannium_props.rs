use cantor_riemannium::geometry::sample_good_points;
use cantor_riemannium::path::{crossing_loop, Crossing};
use cantor_riemannium::rational::Rational;
use cantor_riemannium::riemannium::{
    fiber_distance, node_count_bound, FiberPoint, Quotient, SheetId, SheetModel, ThetaSequence,
};
use num::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use std::sync::OnceLock;

fn setup() -> &'static (SheetModel, Vec<Rational>) {
    static SETUP: OnceLock<(SheetModel, Vec<Rational>)> = OnceLock::new();
    SETUP.get_or_init(|| {
        let m = SheetModel::with_defaults();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let pool = sample_good_points(&mut rng, 8, &m.cfg, 16, 8).unwrap().into_iter().map(|g| g.x).collect();
        (m, pool)
    })
}

fn sequence(max: usize) -> impl Strategy<Value = ThetaSequence> {
    prop::collection::vec((0usize..8, prop::bool::ANY), 0..=max).prop_map(|v| {
        let pool = &setup().1;
        ThetaSequence::new(v.into_iter().map(|(i, d)| Crossing { x: pool[i].clone(), dir: if d { 1 } else { -1 } }).collect())
    })
}

const QUOTIENTS: [Quotient; 5] = [Quotient::H0, Quotient::H1, Quotient::H2, Quotient::H3, Quotient::H4];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quotients_are_coherent(a in sequence(5), b in sequence(5)) {
        let m = &setup().0;
        let raw = m.sheet_of(&a, Quotient::H0).unwrap();
        for q in QUOTIENTS {
            let s = m.sheet_of(&a, q).unwrap();
            prop_assert_eq!(&m.reduce(&raw.label, q), &s.label);
            prop_assert_eq!(m.reduce(&s.label, q), s.label.clone());
            let t = m.sheet_of(&b, q).unwrap();
            let joined = m.sheet_of(&a.then(&b), q).unwrap();
            prop_assert_eq!(m.reduce(&(&s.label + &t.label), q), joined.label);
            prop_assert_eq!(m.sheet_of(&a.then(&a.inverse()), q).unwrap(), SheetId::principal());
        }
        prop_assert!(m.sheet_of(&a, Quotient::H1).unwrap().label.is_zero());
    }

    #[test]
    fn fiber_distance_is_a_metric(a in sequence(4), b in sequence(4), c in sequence(4), i in 0usize..8) {
        let (m, pool) = setup();
        let p = |s: &ThetaSequence| FiberPoint { base: pool[i].clone(), sheet: m.sheet_of(s, Quotient::H0).unwrap() };
        let (pa, pb, pc) = (p(&a), p(&b), p(&c));
        let ab = fiber_distance(&pa, &pb).unwrap();
        prop_assert_eq!(&ab, &fiber_distance(&pb, &pa).unwrap());
        prop_assert_eq!(ab.is_zero(), pa == pb);
        prop_assert!(ab <= fiber_distance(&pa, &pc).unwrap() + fiber_distance(&pc, &pb).unwrap());
        let elsewhere = FiberPoint { base: pool[(i + 1) % 8].clone(), sheet: pb.sheet.clone() };
        prop_assert!(fiber_distance(&pa, &elsewhere).is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lifting_there_and_back_returns(i in 0usize..8, dir in prop::bool::ANY, start in sequence(3)) {
        let (m, pool) = setup();
        let lp = crossing_loop(&pool[i], if dir { 1 } else { -1 }, 0.1).unwrap();
        let round = lp.concat(&lp.reversed()).unwrap();
        for q in QUOTIENTS {
            let s = m.sheet_of(&start, q).unwrap();
            let there = m.lift_path(&lp, &s, q).unwrap();
            match q {
                Quotient::H0 => prop_assert_ne!(&there.end, &s),
                Quotient::H1 => prop_assert_eq!(&there.end, &s),
                _ => {}
            }
            prop_assert_eq!(m.lift_path(&round, &s, q).unwrap().end, s);
        }
    }

    #[test]
    fn sheet_graph_respects_bound(k in 1usize..=4, budget in 0usize..=3) {
        let (m, pool) = setup();
        for q in [Quotient::H0, Quotient::H2, Quotient::H4] {
            let g = m.build_sheet_graph(&pool[..k], budget, q).unwrap();
            prop_assert!(g.node_count() as u128 <= node_count_bound(k, budget));
            prop_assert!(g.is_symmetric());
            prop_assert!(g.contains_label(&Rational::zero()));
        }
    }
}
