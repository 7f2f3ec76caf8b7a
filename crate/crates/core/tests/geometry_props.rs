use cantor_riemannium::geometry::{
    classify_point, endpoints_of_order, good_point_test, piece_interval, point_of_address, BinaryWord, CantorAddress,
    EndpointScheme, GoodPointConfig, GoodVerdict, PointClass,
};
use cantor_riemannium::rational::{pow, ratio, Rational};
use num::{One, Signed, Zero};
use proptest::prelude::*;

fn word(max: usize) -> impl Strategy<Value = BinaryWord> {
    prop::collection::vec(0u8..=1, 0..=max).prop_map(|d| BinaryWord::from_digits(d).unwrap())
}

fn nonconstant(max: usize) -> impl Strategy<Value = BinaryWord> {
    prop::collection::vec(0u8..=1, 2..=max)
        .prop_filter("constant period", |d| d.iter().any(|&x| x != d[0]))
        .prop_map(|d| BinaryWord::from_digits(d).unwrap())
}

/// Survives `depth` inverse steps of the two contractions.
fn ifs_survives(x: &Rational, depth: u32) -> bool {
    let one = Rational::one();
    let third = ratio(1, 3);
    let two_thirds = ratio(2, 3);
    let mut y = x + ratio(1, 2);
    for _ in 0..depth {
        if y < Rational::zero() || y > one {
            return false;
        }
        if y <= third {
            y *= Rational::from_integer(3.into());
        } else if y >= two_thirds {
            y = y * Rational::from_integer(3.into()) - Rational::from_integer(2.into());
        } else {
            return false;
        }
    }
    y >= Rational::zero() && y <= one
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gaps_are_positive(w in word(12)) {
        let a = piece_interval(&w.child(0));
        let b = piece_interval(&w.child(1));
        prop_assert!(a.hi < b.lo);
        prop_assert_eq!(&b.lo - &a.hi, pow(&ratio(1, 3), w.level() as u32 + 1));
    }

    #[test]
    fn addresses_are_injective(p1 in word(5), q1 in nonconstant(5), p2 in word(5), q2 in nonconstant(5)) {
        let a = CantorAddress::new(p1, q1).normalized();
        let b = CantorAddress::new(p2, q2).normalized();
        let same_point = point_of_address(&a) == point_of_address(&b);
        let same_sequence = (0..64).all(|j| a.digit(j) == b.digit(j));
        prop_assert_eq!(same_point, same_sequence);
    }

    #[test]
    fn endpoint_addresses_agree(w in word(8)) {
        let left = CantorAddress::new(w.child(0), "1".parse().unwrap());
        let right = CantorAddress::new(w.child(1), "0".parse().unwrap());
        prop_assert_eq!(point_of_address(&left), piece_interval(&w.child(0)).hi);
        prop_assert_eq!(point_of_address(&right), piece_interval(&w.child(1)).lo);
    }

    #[test]
    fn classification_matches_ifs_cover(p in word(8), q in nonconstant(6), w in word(10)) {
        let x = point_of_address(&CantorAddress::new(p, q));
        prop_assert_eq!(classify_point(&x).unwrap(), PointClass::InnerPoint);
        prop_assert!(ifs_survives(&x, 20));
        // centre of the gap removed from piece w
        let piece = piece_interval(&w);
        let mid = (&piece.lo + &piece.hi) / Rational::from_integer(2.into());
        prop_assert_eq!(classify_point(&mid).unwrap(), PointClass::InGap);
        prop_assert!(!ifs_survives(&mid, 20));
    }

    #[test]
    fn classification_is_consistent_with_cover(n in -600i64..=600, d in 1i64..=700) {
        let x = ratio(n, d);
        match classify_point(&x).unwrap() {
            PointClass::InGap | PointClass::Outside => {}
            _ => prop_assert!(ifs_survives(&x, 20)),
        }
        if !ifs_survives(&x, 20) {
            prop_assert!(matches!(classify_point(&x).unwrap(), PointClass::InGap | PointClass::Outside));
        }
    }
}

#[test]
fn endpoint_counts() {
    for scheme in [EndpointScheme::CumulativePieceEndpoints, EndpointScheme::LeftEndpoints] {
        assert_eq!(endpoints_of_order(0, scheme).len(), 1);
        for k in 1..=10 {
            let e = endpoints_of_order(k, scheme);
            assert_eq!(e.len(), 1 << k);
            for x in &e {
                assert!(matches!(classify_point(x).unwrap(), PointClass::Endpoint(_)));
            }
        }
    }
}

#[test]
fn endpoints_are_never_good() {
    let cfg = GoodPointConfig::new(ratio(7, 2), 12);
    for k in cfg.k0..=8 {
        for x in endpoints_of_order(k, cfg.scheme) {
            match good_point_test(&x, &cfg).unwrap() {
                GoodVerdict::Bad { k: kb, l, distance } => {
                    assert!(kb <= k);
                    let e = &endpoints_of_order(kb, cfg.scheme)[l as usize];
                    assert_eq!((&x - e).abs(), distance);
                }
                v => panic!("endpoint {x} passed: {v:?}"),
            }
        }
    }
}
