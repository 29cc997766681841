use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use brauer::arith::{is_prime_u64, SquareClass};
use brauer::bm::{adelic_sum, evaluate_at_local_point, evaluate_representation, AdelicPoint, LocalPoint, SymbolClassOnVariety};
use brauer::conic::{
    brute_force_local_oracle, conic_everywhere_locally_soluble, conic_locally_soluble, normalize_conic_i64,
};
use brauer::padic::{locally_soluble, ResidueEngine};
use brauer::poly::SystemDocument;
use brauer::quaternion::QuaternionClass;
use brauer::registry;
use brauer::search::{search_rational_points, ProjectiveRationalPoint};
use brauer::symbols::{hilbert_symbol, Place};

fn nonzero(range: i64) -> impl Strategy<Value = i64> {
    (-range..=range).prop_filter("nonzero", |n| *n != 0)
}

fn ratio(n: i64, d: i64) -> SquareClass {
    SquareClass::from_rational(&BigRational::new(BigInt::from(n), BigInt::from(d))).unwrap()
}

fn places_of(a: i64, b: i64, c: i64) -> Vec<Place> {
    let m = (a * b * c).unsigned_abs();
    let mut v = vec![Place::Real, Place::Finite(2)];
    v.extend((3..=m).filter(|p| m % p == 0 && is_prime_u64(*p)).map(Place::Finite));
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn conic_solubility_is_the_hilbert_symbol(a in nonzero(40), b in nonzero(40), c in nonzero(40)) {
        let conic = normalize_conic_i64(a, b, c).unwrap();
        for v in places_of(a, b, c) {
            let symbol = hilbert_symbol(&ratio(-a, c), &ratio(-b, c), v);
            prop_assert_eq!(symbol == 1, conic_locally_soluble(&conic, v), "place {}", v);
        }
    }

    #[test]
    fn normalization_keeps_local_behaviour(a in nonzero(30), b in nonzero(30), c in nonzero(30)) {
        let conic = normalize_conic_i64(a, b, c).unwrap();
        let again = normalize_conic_i64(a * 4, b * 9, c).unwrap();
        for v in places_of(a, b, c) {
            prop_assert_eq!(conic_locally_soluble(&conic, v), conic_locally_soluble(&again, v));
        }
    }

    #[test]
    fn conic_deciders_agree(a in nonzero(30), b in nonzero(30), c in nonzero(30)) {
        let report = conic_everywhere_locally_soluble(&normalize_conic_i64(a, b, c).unwrap()).unwrap();
        prop_assert!(report.consistent());
    }

    #[test]
    fn local_decider_matches_the_oracle(a in nonzero(15), b in nonzero(15), c in nonzero(15)) {
        let conic = normalize_conic_i64(a, b, c).unwrap();
        let (x, y, z) = conic.coefficients();
        let coeffs: Vec<i64> = [x, y, z].iter().map(|n| n.to_string().parse().unwrap()).collect();
        for v in places_of(coeffs[0], coeffs[1], coeffs[2]) {
            if let Place::Finite(p) = v {
                if let Some(expected) = brute_force_local_oracle(coeffs[0], coeffs[1], coeffs[2], p) {
                    prop_assert_eq!(conic_locally_soluble(&conic, v), expected, "place {}", p);
                }
            }
        }
    }

    #[test]
    fn quaternion_ramification_is_even(a in nonzero(500), b in nonzero(500)) {
        let q = QuaternionClass::from_i64(a, b).unwrap();
        let r = q.ramification_set().unwrap();
        prop_assert_eq!(r.len() % 2, 0);
        prop_assert_eq!(q.is_globally_trivial().unwrap(), r.is_empty());
        prop_assert!(q.same_class(&q.swapped()).unwrap());
        prop_assert!(q.multiply_same_slot(&q).unwrap().ramification_set().unwrap().is_empty());
    }

    #[test]
    fn quaternion_square_slots_do_not_matter(a in nonzero(200), b in nonzero(200), s in 1i64..12) {
        let q = QuaternionClass::from_i64(a, b).unwrap();
        prop_assert!(q.same_class(&QuaternionClass::from_i64(a * s * s, b).unwrap()).unwrap());
    }

    #[test]
    fn same_slot_product_is_associative(a in nonzero(60), b in nonzero(60), c in nonzero(60), d in nonzero(60)) {
        let (x, y, z) = (
            QuaternionClass::from_i64(a, b).unwrap(),
            QuaternionClass::from_i64(a, c).unwrap(),
            QuaternionClass::from_i64(a, d).unwrap(),
        );
        let left = x.multiply_same_slot(&y).unwrap().multiply_same_slot(&z).unwrap();
        let right = x.multiply_same_slot(&y.multiply_same_slot(&z).unwrap()).unwrap();
        prop_assert!(left.same_class(&right).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn local_solubility_agrees_with_the_conic_decider(a in nonzero(20), b in nonzero(20), c in nonzero(20)) {
        let conic = normalize_conic_i64(a, b, c).unwrap();
        let system = conic.system();
        for v in places_of(a, b, c) {
            if let Place::Finite(p) = v {
                let verdict = locally_soluble(&system, p, 8).unwrap();
                prop_assert!(!verdict.is_yes() || conic_locally_soluble(&conic, v));
                prop_assert!(!verdict.is_no() || !conic_locally_soluble(&conic, v));
            }
        }
    }

    #[test]
    fn verdicts_never_flip_with_depth(a in nonzero(20), b in nonzero(20), c in nonzero(20), n in 1u32..6) {
        let system = normalize_conic_i64(a, b, c).unwrap().system();
        for p in [2u64, 3, 5, 7] {
            let shallow = locally_soluble(&system, p, n).unwrap();
            let deep = locally_soluble(&system, p, n + 3).unwrap();
            prop_assert!(!(shallow.is_yes() && deep.is_no()) && !(shallow.is_no() && deep.is_yes()));
        }
    }

    #[test]
    fn lifts_reduce_to_their_source(a in nonzero(20), b in nonzero(20), c in nonzero(20), pi in 0usize..4) {
        let p = [2u64, 3, 5, 7][pi];
        let system = normalize_conic_i64(a, b, c).unwrap().system();
        let engine = ResidueEngine::new(&system, p).unwrap();
        for pt in engine.enumerate(2).unwrap() {
            prop_assert!(pt.lies_on(&system));
            for q in engine.lift_fiber(&pt).unwrap() {
                prop_assert_eq!(q.reduce(2), pt.clone());
                prop_assert_eq!(q.reduce(1), pt.reduce(1));
            }
        }
    }

    #[test]
    fn search_is_canonical_and_monotone(a in nonzero(12), b in nonzero(12), c in nonzero(12), bound in 1u64..8) {
        let system = normalize_conic_i64(a, b, c).unwrap().system();
        let small = search_rational_points(&system, bound, usize::MAX).unwrap();
        let large = search_rational_points(&system, bound + 4, usize::MAX).unwrap();
        for p in &small {
            prop_assert!(system.contains_point(&p.coords));
            prop_assert_eq!(ProjectiveRationalPoint::new(&p.coords), Some(p.clone()));
            prop_assert!(large.contains(p));
        }
        let mut sorted = small.clone();
        sorted.sort();
        prop_assert_eq!(sorted, small);
    }

    #[test]
    fn search_finds_points_exactly_on_soluble_conics(a in nonzero(10), b in nonzero(10), c in nonzero(10)) {
        let conic = normalize_conic_i64(a, b, c).unwrap();
        let soluble = conic_everywhere_locally_soluble(&conic).unwrap().everywhere_locally_soluble();
        let found = !search_rational_points(&conic.system(), 200, 1).unwrap().is_empty();
        prop_assert_eq!(soluble, found);
    }

    #[test]
    fn system_text_round_trips(a in nonzero(1000), b in nonzero(1000), c in nonzero(1000)) {
        let system = normalize_conic_i64(a, b, c).unwrap().system();
        let doc = SystemDocument::parse(&system.to_text()).unwrap();
        prop_assert_eq!(doc.system, system);
    }
}

fn bsd_points(p: u64) -> Vec<brauer::padic::ResiduePoint> {
    let system = registry::bsd_surface();
    ResidueEngine::new(&system, p).unwrap().enumerate(2).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn representations_agree_where_determinable(pi in 0usize..4, idx in any::<prop::sample::Index>()) {
        let p = [3u64, 7, 11, 13][pi];
        let alpha = registry::bsd_class();
        let points = bsd_points(p);
        let pt = idx.get(&points);
        let values: BTreeSet<_> =
            (0..alpha.representations.len()).filter_map(|i| evaluate_representation(&alpha, i, pt)).collect();
        prop_assert!(values.len() <= 1, "representations disagree at {:?}", pt);
    }

    #[test]
    fn evaluation_is_stable_under_lifting(pi in 0usize..3, idx in any::<prop::sample::Index>()) {
        let p = [3u64, 5, 7][pi];
        let alpha = registry::bsd_class();
        let system = registry::bsd_surface();
        let engine = ResidueEngine::new(&system, p).unwrap();
        let points = bsd_points(p);
        let pt = idx.get(&points).clone();
        let place = Place::Finite(p);
        if let Ok(value) = evaluate_at_local_point(&alpha, &LocalPoint::Residue { point: pt.clone() }, place) {
            for child in engine.lift_fiber(&pt).unwrap() {
                let deeper = evaluate_at_local_point(&alpha, &LocalPoint::Residue { point: child }, place).unwrap();
                prop_assert_eq!(deeper, value);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn constant_classes_sum_to_zero(a in nonzero(30), b in nonzero(30)) {
        let (ca, cb) = (SquareClass::from_i64(a).unwrap(), SquareClass::from_i64(b).unwrap());
        prop_assume!(!ca.is_square());
        let alpha = SymbolClassOnVariety::constant_class("constant", registry::bsd_surface(), ca, cb).unwrap();
        let places = alpha.exceptional_places().unwrap();
        let x = AdelicPoint::assemble(&alpha, &places, 30).unwrap();
        prop_assert!(adelic_sum(&alpha, &x).unwrap().total.is_zero());
    }
}
