use num_bigint::BigInt;
use proptest::prelude::*;

use rf_core::k2::{k2_combine, k2_normal_form, K2Element, K2Op};
use rf_core::laurent::TLaurent;
use rf_core::residue::{embeddable, is_pm_power, ResidueElem, ResidueField};
use rf_core::tower::build_tower;
use rf_core::{explicit_p2, towers_equal, PadicScalar, SeriesKind, Tower, TowerElement, XSeries};

const P: u64 = 5;

fn scalar(n: i64, prec: u32) -> PadicScalar {
    PadicScalar::from_int(P, n, prec)
}

fn tower() -> &'static Tower {
    use std::sync::OnceLock;
    static T: OnceLock<Tower> = OnceLock::new();
    T.get_or_init(|| explicit_p2(&scalar(1, 12), 12).unwrap())
}

fn element(coeffs: Vec<i64>) -> TowerElement {
    coeffs
        .into_iter()
        .enumerate()
        .fold(TowerElement::zero(P, 2), |x, (i, c)| x.add(&TowerElement::monomial(scalar(c, 12), i, 2)))
}

fn elem_strategy() -> impl Strategy<Value = TowerElement> {
    prop::collection::vec(-60i64..60, 25).prop_map(element)
}

fn laurent(terms: Vec<(i64, i64)>, prec: i64) -> TLaurent {
    TLaurent::from_terms(P, prec, terms.into_iter().map(|(t, c)| (t, scalar(c, prec as u32))))
}

fn k2_strategy() -> impl Strategy<Value = K2Element> {
    prop::collection::vec((-40i64..40, -300i64..300), 0..6).prop_map(|raw| {
        let raw: Vec<(i64, BigInt)> = raw.into_iter().map(|(j, c)| (j, BigInt::from(c))).collect();
        k2_normal_form(P, 12, &raw).unwrap()
    })
}

fn rational_field() -> ResidueField {
    ResidueField::rational_function(P, 1).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tower_ring_axioms(a in elem_strategy(), b in elem_strategy(), c in elem_strategy()) {
        let t = tower();
        prop_assert!(t.mul(&t.mul(&a, &b), &c).sub(&t.mul(&a, &t.mul(&b, &c))).is_zero());
        prop_assert!(t.mul(&a, &b).sub(&t.mul(&b, &a)).is_zero());
        prop_assert!(t.mul(&a, &b.add(&c)).sub(&t.mul(&a, &b).add(&t.mul(&a, &c))).is_zero());
        prop_assert!(t.mul(&a, &t.one()).sub(&a).is_zero());
    }

    #[test]
    fn tower_valuation_is_additive(a in elem_strategy(), b in elem_strategy()) {
        let t = tower();
        prop_assume!(!a.is_zero() && !b.is_zero());
        let (va, vb) = (t.valuation(&a), t.valuation(&b));
        prop_assume!(va.is_ok() && vb.is_ok());
        let vab = t.valuation(&t.mul(&a, &b));
        prop_assert_eq!(vab.unwrap(), va.unwrap() + vb.unwrap());
    }

    #[test]
    fn reversion_round_trip(
        lead in 1i64..5,
        rest in prop::collection::vec(prop::collection::vec((-3i64..3, -200i64..200), 0..3), 6),
    ) {
        let (prec, hi) = (10i64, 6i64);
        let mut entries = vec![(0, laurent(vec![(1, lead)], prec))];
        for (i, terms) in rest.into_iter().enumerate() {
            entries.push((i as i64 + 1, laurent(terms, prec)));
        }
        let r = XSeries::from_entries(P, prec, SeriesKind::Nonneg, (0, hi), entries).unwrap();
        let s = r.reversion().unwrap();
        let x = XSeries::x(P, prec, hi);
        prop_assert!(XSeries::compose(&r, &s).unwrap().sub(&x).unwrap().is_zero());
        prop_assert!(XSeries::compose(&s, &r).unwrap().sub(&x).unwrap().is_zero());
    }

    #[test]
    fn laurent_eval_is_a_homomorphism(
        f in prop::collection::vec((-6i64..6, -500i64..500), 0..5),
        g in prop::collection::vec((-6i64..6, -500i64..500), 0..5),
        x in 1i64..1000,
    ) {
        prop_assume!(x % 5 != 0);
        let (f, g) = (laurent(f, 8), laurent(g, 8));
        let x = scalar(x, 8);
        let lhs = f.mul(&g).eval(&x).unwrap();
        let rhs = f.eval(&x).unwrap().mul(&g.eval(&x).unwrap());
        prop_assert!(lhs.sub(&rhs).is_zero());
        let sum = f.add(&g).eval(&x).unwrap();
        prop_assert!(sum.sub(&f.eval(&x).unwrap().add(&g.eval(&x).unwrap())).is_zero());
    }

    #[test]
    fn symbol_group_axioms(x in k2_strategy(), y in k2_strategy(), z in k2_strategy(), c in -1000i64..1000) {
        let add = |a: &K2Element, b: &K2Element| k2_combine(K2Op::Add(b), a).unwrap();
        prop_assert!(add(&add(&x, &y), &z).same(&add(&x, &add(&y, &z))));
        prop_assert!(add(&x, &y).same(&add(&y, &x)));
        prop_assert!(add(&x, &k2_combine(K2Op::Neg, &x).unwrap()).is_zero());
        prop_assert!(add(&x, &K2Element::zero(P, 12)).same(&x));
        let c = scalar(c, 12);
        let cx = |v: &K2Element| k2_combine(K2Op::ScalarMul(&c), v).unwrap();
        prop_assert!(cx(&add(&x, &y)).same(&add(&cx(&x), &cx(&y))));
    }

    #[test]
    fn pm_power_round_trip(seed in any::<u64>(), m in 0u32..3) {
        use rand::SeedableRng;
        let k = rational_field();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let b = k.random(&mut rng, 3);
        let c = k.frobenius_pow(&b, m);
        let root = is_pm_power(&k, &c, m);
        prop_assert_eq!(root.as_ref(), Some(&b));
        // a p^m-th power is a p^l-th power for every l <= m
        for l in 0..=m {
            prop_assert!(is_pm_power(&k, &c, l).is_some());
            prop_assert!(embeddable(&k, &c, l + 1));
        }
    }

    #[test]
    fn finite_fields_are_perfect(seed in any::<u64>(), m in 1usize..4, n in 1u32..5) {
        use rand::SeedableRng;
        let k = ResidueField::finite(P, m).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let b = k.random(&mut rng, 0);
        prop_assert!(embeddable(&k, &b, n));
        let root = is_pm_power(&k, &b, n).unwrap();
        prop_assert_eq!(k.frobenius_pow(&root, n), b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn towers_equal_is_stable_under_small_perturbation(
        k1 in 2u32..6,
        k2 in 1u32..6,
        c1 in 1i64..25,
        e2 in 0usize..5,
        c2 in 1i64..25,
    ) {
        let t = tower();
        let mut spec = t.spec.clone();
        let prec = spec.prec;
        let bump = |k: u32, c: i64| PadicScalar::p_power(P, k as i64, prec).mul(&scalar(c, prec));
        spec.rhs[0] = spec.rhs[0].add(&TowerElement::scalar(bump(k1, c1), 0));
        spec.rhs[1] = spec.rhs[1].add(&TowerElement::monomial(bump(k2, c2), e2, 1));
        let perturbed = build_tower(&spec).unwrap();
        let r = towers_equal(t, &perturbed, 2).unwrap();
        prop_assert!(r.equal, "{:?}", r.levels);
    }
}

#[test]
fn embedding_examples() {
    let k = rational_field();
    let t = k.t_pow(1).unwrap();
    let t5 = k.t_pow(5).unwrap();
    assert!(!embeddable(&k, &t, 2));
    assert!(embeddable(&k, &t5, 2));
    assert!(!embeddable(&k, &t5, 3));
    assert!(matches!(is_pm_power(&k, &t5, 1), Some(ResidueElem::Rational(_))));
}
