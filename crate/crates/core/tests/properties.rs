use proptest::prelude::*;

use regop::counterexample::{lambda, meet_via_components, CoordinateFunctional};
use regop::lattice::enumerate_components;
use regop::regular_op::{meet_oracle, modulus_oracle};
use regop::report::canonical_json;
use regop::{LatticeVector, PartitionStrategy, Rational, RegularOperator, Scalar, Superoperator, Tolerance};

type M = RegularOperator<Rational>;
type V = LatticeVector<Rational>;

fn entry(positive: bool) -> impl Strategy<Value = Rational> {
    let lo = if positive { 0 } else { -12 };
    (lo..=12i64, 1..=4i64).prop_map(|(p, q)| Rational::from_ratio(p, q))
}

fn vector(n: usize, positive: bool) -> impl Strategy<Value = V> {
    prop::collection::vec(entry(positive), n).prop_map(|xs| V::new(xs).unwrap())
}

fn matrix(r: usize, c: usize, positive: bool) -> impl Strategy<Value = M> {
    prop::collection::vec(prop::collection::vec(entry(positive), c), r)
        .prop_map(|rows| M::from_rows(rows).unwrap())
}

fn vector_pair() -> impl Strategy<Value = (V, V)> {
    (1..=5usize).prop_flat_map(|n| (vector(n, false), vector(n, false)))
}

fn dims() -> impl Strategy<Value = (usize, usize, usize, usize)> {
    (1..=3usize, 1..=3usize, 1..=3usize, 1..=3usize)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lattice_identities((x, y) in vector_pair()) {
        prop_assert_eq!(&x.meet(&y).unwrap() + &x.join(&y).unwrap(), &x + &y);
        prop_assert_eq!(x.abs(), &x.pos_part() + &x.neg_part());
        prop_assert_eq!(&x.pos_part() - &x.neg_part(), x.clone());
        prop_assert!(x.pos_part().meet(&x.neg_part()).unwrap().is_zero());
        let shifted = &x + &y.abs();
        prop_assert!(x.le(&shifted, Tolerance::EXACT).unwrap());
    }

    #[test]
    fn components_are_valid_and_counted(e in (1..=5usize).prop_flat_map(|n| vector(n, true))) {
        let comps: Vec<_> = enumerate_components(&e).unwrap().collect();
        prop_assert_eq!(comps.len(), 1usize << e.support().len());
        for c in &comps {
            prop_assert!(c.is_valid());
        }
    }

    #[test]
    fn modulus_oracle_matches_closed_form(
        (b, w) in (1..=3usize, 1..=3usize)
            .prop_flat_map(|(r, c)| (matrix(r, c, false), vector(c, true)))
    ) {
        let exact = b.modulus_closed_form().apply(&w).unwrap();
        let all = PartitionStrategy::Disjoint { max_parts: usize::MAX };
        prop_assert_eq!(modulus_oracle(&b, &w, &all).unwrap(), exact.clone());
        let coarse = PartitionStrategy::RandomConvex { count: 4, parts: 3, seed: 1 };
        let below = modulus_oracle(&b, &w, &coarse).unwrap();
        prop_assert!(below.le(&exact, Tolerance::EXACT).unwrap());
    }

    #[test]
    fn meet_oracle_matches_closed_form(
        (s, t, w) in (1..=3usize, 1..=3usize)
            .prop_flat_map(|(r, c)| (matrix(r, c, true), matrix(r, c, true), vector(c, true)))
    ) {
        let exact = s.meet_closed_form(&t).unwrap().apply(&w).unwrap();
        let all = PartitionStrategy::Disjoint { max_parts: usize::MAX };
        prop_assert_eq!(meet_oracle(&s, &t, &w, &all).unwrap(), exact.clone());
        let coarse = PartitionStrategy::Dyadic;
        let above = meet_oracle(&s, &t, &w, &coarse).unwrap();
        prop_assert!(exact.le(&above, Tolerance::EXACT).unwrap());
    }

    #[test]
    fn kronecker_modulus_and_evaluation(
        (a, b, t) in dims().prop_flat_map(|(w, x, y, z)| {
            (matrix(z, y, false), matrix(x, w, false), matrix(y, x, false))
        })
    ) {
        let m = Superoperator::build(&a, &b);
        let factored = Superoperator::build(&a.modulus_closed_form(), &b.modulus_closed_form());
        let modulus = m.modulus();
        prop_assert_eq!(modulus.rep(), factored.rep());
        prop_assert_eq!(m.apply_via_rep(&t).unwrap(), a.matmul(&t).unwrap().matmul(&b).unwrap());
    }

    #[test]
    fn bilinearity(
        (a, c, b, d) in dims().prop_flat_map(|(w, x, y, z)| {
            (matrix(z, y, false), matrix(z, y, false), matrix(x, w, false), matrix(x, w, false))
        })
    ) {
        let left = Superoperator::build(&(&a + &c), &b);
        let right = Superoperator::build(&a, &b).try_add(&Superoperator::build(&c, &b)).unwrap();
        prop_assert_eq!(left.rep(), right.rep());
        let left = Superoperator::build(&a, &(&b + &d));
        let right = Superoperator::build(&a, &b).try_add(&Superoperator::build(&a, &d)).unwrap();
        prop_assert_eq!(left.rep(), right.rep());
    }

    #[test]
    fn composition_law(
        (a, b, c, d) in (dims(), 1..=3usize, 1..=3usize).prop_flat_map(|((w, x, y, z), y2, x2)| {
            // M_{C,D}: y2×x2 → y×x, M_{A,B}: y×x → z×w
            (matrix(z, y, false), matrix(x, w, false), matrix(y, y2, false), matrix(x2, x, false))
        })
    ) {
        let outer = Superoperator::build(&a, &b);
        let inner = Superoperator::build(&c, &d);
        let composed = outer.compose(&inner).unwrap();
        let direct = Superoperator::build(&a.matmul(&c).unwrap(), &d.matmul(&b).unwrap());
        prop_assert_eq!(composed.rep(), direct.rep());
    }

    #[test]
    fn positivity_and_domination(
        (a, b) in dims().prop_flat_map(|(w, x, y, z)| (matrix(z, y, false), matrix(x, w, false)))
    ) {
        let m = Superoperator::build(&a, &b);
        let dom = Superoperator::build(&a.modulus_closed_form(), &b.modulus_closed_form());
        prop_assert!(dom.is_positive(Tolerance::EXACT));
        prop_assert!(dom.try_sub(&m).unwrap().is_positive(Tolerance::EXACT));
        prop_assert!(dom.try_add(&m).unwrap().is_positive(Tolerance::EXACT));
        let pos = Superoperator::build(&a.pos_part(), &b.pos_part());
        prop_assert!(pos.is_positive(Tolerance::EXACT));
    }

    #[test]
    fn components_formula_matches_superoperator(
        (t, k) in (2..=4usize).prop_flat_map(|n| (matrix(n, n, true), 0..n))
    ) {
        let f = CoordinateFunctional::new(t.rows(), k).unwrap();
        let e = V::ones(t.rows());
        let via_rep = lambda::<Rational>(&f).apply(&t).unwrap().apply(&e).unwrap();
        prop_assert_eq!(meet_via_components(&t, &f).unwrap(), via_rep.clone());
        prop_assert_eq!(via_rep, t.column(k));
    }

    #[test]
    fn scalar_text_round_trip(p in -1000i64..1000, q in 1i64..50) {
        let r = Rational::from_ratio(p, q);
        prop_assert_eq!(Rational::from_json(&r.to_json()).unwrap(), r.clone());
        let text = regop::scalar::rational_string(&r);
        prop_assert_eq!(Rational::parse_str(&text).unwrap(), r);
    }

    #[test]
    fn canonical_floats_round_trip(x in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL) {
        let text = canonical_json(&serde_json::json!([x]));
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back[0].as_f64().unwrap(), x);
    }
}
