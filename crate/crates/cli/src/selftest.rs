//! Seeded randomized property checks across the library.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use rf_core::k2::{k2_combine, k2_normal_form, K2Element, K2Op};
use rf_core::{
    explicit_p2, is_pm_power, Exec, PadicScalar, ResidueField, SeriesKind, TLaurent, Tower, TowerElement, XSeries,
};

#[derive(Debug, Serialize)]
pub struct PropertyResult {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    pub first_failure: Option<usize>,
}

fn check<F: Fn(&mut ChaCha8Rng) -> bool + Sync>(
    name: &str,
    seed: u64,
    cases: usize,
    exec: Exec,
    f: F,
) -> PropertyResult {
    // one stream per case keeps results independent of the scheduling
    let ok = exec.map_range(cases, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        f(&mut rng)
    });
    let failures = ok.iter().filter(|&&b| !b).count();
    PropertyResult { name: name.into(), cases, failures, first_failure: ok.iter().position(|&b| !b) }
}

fn random_scalar(rng: &mut ChaCha8Rng, p: u64, prec: u32) -> PadicScalar {
    PadicScalar::from_int(p, rng.gen_range(-200..=200), prec)
}

fn random_element(rng: &mut ChaCha8Rng, t: &Tower) -> TowerElement {
    let mut x = TowerElement::zero(t.p, t.n);
    for i in 0..t.dim(t.n) {
        if rng.gen_bool(0.4) {
            let c = random_scalar(rng, t.p, t.prec);
            x = x.add(&TowerElement::monomial(c, i, t.n));
        }
    }
    x
}

fn random_k2(rng: &mut ChaCha8Rng, p: u64, prec: u32) -> K2Element {
    let raw: Vec<(i64, BigInt)> =
        (0..rng.gen_range(0..5)).map(|_| (rng.gen_range(-30..=30), BigInt::from(rng.gen_range(-500..=500)))).collect();
    k2_normal_form(p, prec, &raw).expect("integral coefficients")
}

fn reversion_roundtrip(rng: &mut ChaCha8Rng, p: u64) -> bool {
    let (prec, hi) = (10, 6);
    let lead = TLaurent::from_terms(p, prec, [(1, PadicScalar::from_int(p, rng.gen_range(1..p as i64), prec as u32))]);
    let mut entries = vec![(0, lead)];
    for i in 1..=hi {
        let terms: Vec<(i64, PadicScalar)> =
            (0..2).map(|_| (rng.gen_range(-2..=2), random_scalar(rng, p, prec as u32))).collect();
        entries.push((i, TLaurent::from_terms(p, prec, terms)));
    }
    let run = || -> rf_core::Result<bool> {
        let r = XSeries::from_entries(p, prec, SeriesKind::Nonneg, (0, hi), entries)?;
        let s = r.reversion()?;
        let x = XSeries::x(p, prec, hi);
        Ok(XSeries::compose(&r, &s)?.sub(&x)?.is_zero() && XSeries::compose(&s, &r)?.sub(&x)?.is_zero())
    };
    run().unwrap_or(false)
}

pub fn run(p: u64, seed: u64, cases: usize, exec: Exec) -> Vec<PropertyResult> {
    let prec = 10;
    let tower = explicit_p2(&PadicScalar::one(p, prec), prec).ok();
    let mut out = Vec::new();
    if let Some(t) = &tower {
        out.push(check("tower ring axioms", seed, cases, exec, |rng| {
            let (a, b, c) = (random_element(rng, t), random_element(rng, t), random_element(rng, t));
            let assoc = t.mul(&t.mul(&a, &b), &c).sub(&t.mul(&a, &t.mul(&b, &c))).is_zero();
            let comm = t.mul(&a, &b).sub(&t.mul(&b, &a)).is_zero();
            let dist = t.mul(&a, &b.add(&c)).sub(&t.mul(&a, &b).add(&t.mul(&a, &c))).is_zero();
            assoc && comm && dist
        }));
    }
    out.push(check("series reversion round trip", seed ^ 1, cases.min(50), exec, |rng| reversion_roundtrip(rng, p)));
    out.push(check("symbol group axioms", seed ^ 2, cases, exec, |rng| {
        let (x, y, z) = (random_k2(rng, p, prec), random_k2(rng, p, prec), random_k2(rng, p, prec));
        let add = |a: &K2Element, b: &K2Element| k2_combine(K2Op::Add(b), a).expect("same prime");
        let assoc = add(&add(&x, &y), &z).same(&add(&x, &add(&y, &z)));
        let comm = add(&x, &y).same(&add(&y, &x));
        let inv = add(&x, &k2_combine(K2Op::Neg, &x).expect("negation")).is_zero();
        let c = random_scalar(rng, p, prec);
        let cx = |v: &K2Element| k2_combine(K2Op::ScalarMul(&c), v).expect("integral scalar");
        let lin = cx(&add(&x, &y)).same(&add(&cx(&x), &cx(&y)));
        assoc && comm && inv && lin
    }));
    if let Ok(k) = ResidueField::rational_function(p, 1) {
        out.push(check("p-power root round trip", seed ^ 3, cases, exec, |rng| {
            let b = k.random(rng, 3);
            let m = rng.gen_range(0..=2);
            let c = k.frobenius_pow(&b, m);
            match is_pm_power(&k, &c, m) {
                Some(r) => k.frobenius_pow(&r, m) == c && r == b,
                None => false,
            }
        }));
    }
    out.push(check("scalar division", seed ^ 4, cases, exec, |rng| {
        let a = random_scalar(rng, p, prec);
        let b = random_scalar(rng, p, prec);
        if b.is_zero() {
            return true;
        }
        b.div(&b).is_ok_and(|one| one.sub(&PadicScalar::one(p, prec)).is_zero())
            && a.mul(&b).div(&b).is_ok_and(|q| q.sub(&a).is_zero())
    }));
    out
}
