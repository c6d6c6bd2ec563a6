//! The presented group of principal-unit symbols of the two-dimensional local
//! field `Q_p{{t}}`: one free `Z_p` coordinate for `j = 0` and, for each
//! nonzero `j`, a cyclic coordinate of order `p^{v_p(j)+1}` on `{1 - p t^j, t}`.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{ppow, PadicScalar, ScalarJson};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Order {
    Finite(BigUint),
    Infinite,
}

fn vp(p: u64, mut j: i64) -> u32 {
    let mut v = 0;
    j = j.abs();
    while j != 0 && j % p as i64 == 0 {
        j /= p as i64;
        v += 1;
    }
    v
}

/// Order of the generator with index `j`.
pub fn generator_order(p: u64, j: i64) -> Order {
    if j == 0 {
        Order::Infinite
    } else {
        Order::Finite(ppow(p, vp(p, j) + 1))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct K2Element {
    pub p: u64,
    pub n0: PadicScalar,
    pub torsion: BTreeMap<i64, BigUint>,
    pub prec: u32,
}

pub enum K2Op<'a> {
    Add(&'a K2Element),
    Neg,
    ScalarMul(&'a PadicScalar),
}

fn reduce(p: u64, j: i64, c: &BigInt) -> BigUint {
    let Order::Finite(ord) = generator_order(p, j) else { unreachable!() };
    c.mod_floor(&BigInt::from(ord)).to_biguint().unwrap()
}

impl K2Element {
    pub fn zero(p: u64, prec: u32) -> Self {
        Self { p, n0: PadicScalar::zero_abs(p, prec as i64), torsion: BTreeMap::new(), prec }
    }

    /// The generator `{1 - p t^j, t}`.
    pub fn generator(p: u64, j: i64, prec: u32) -> Self {
        k2_normal_form(p, prec, &[(j, BigInt::from(1))]).expect("integral coefficient")
    }

    pub fn is_zero(&self) -> bool {
        self.torsion.is_empty() && self.n0.is_zero()
    }

    fn normalized(mut self) -> Self {
        self.n0 = self.n0.truncate_abs(self.prec as i64);
        self.torsion.retain(|_, c| !c.is_zero());
        self
    }

    /// Equality of normal forms at the common precision of the free coordinate.
    pub fn same(&self, o: &Self) -> bool {
        let prec = self.prec.min(o.prec) as i64;
        self.p == o.p && self.torsion == o.torsion && self.n0.truncate_abs(prec).sub(&o.n0.truncate_abs(prec)).is_zero()
    }

    pub fn to_json(&self) -> K2Json {
        K2Json {
            schema: "k2/1".into(),
            p: self.p,
            prec: self.prec,
            n0: (&self.n0).into(),
            torsion: self.torsion.iter().map(|(&j, c)| TorsionJson { j, c: c.to_string() }).collect(),
        }
    }
}

/// Applies a group operation and returns the normal form.
pub fn k2_combine(op: K2Op<'_>, x: &K2Element) -> Result<K2Element> {
    let p = x.p;
    match op {
        K2Op::Add(y) => {
            if y.p != p {
                return Err(Error::InvalidInput("different primes".into()));
            }
            let prec = x.prec.min(y.prec);
            let mut torsion = x.torsion.clone();
            for (&j, c) in &y.torsion {
                let s = torsion.get(&j).cloned().unwrap_or_default() + c;
                torsion.insert(j, reduce(p, j, &BigInt::from(s)));
            }
            Ok(K2Element { p, n0: x.n0.add(&y.n0), torsion, prec }.normalized())
        }
        K2Op::Neg => {
            let torsion = x.torsion.iter().map(|(&j, c)| (j, reduce(p, j, &-BigInt::from(c.clone())))).collect();
            Ok(K2Element { p, n0: x.n0.neg(), torsion, prec: x.prec }.normalized())
        }
        K2Op::ScalarMul(c) => {
            if c.valuation().is_some_and(|v| v < 0) {
                return Err(Error::InvalidInput("scalar must be a p-adic integer".into()));
            }
            let mut torsion = BTreeMap::new();
            for (&j, t) in &x.torsion {
                let digits = vp(p, j) + 1;
                let cl = c
                    .lift_mod(digits)
                    .ok_or_else(|| Error::PrecisionExhausted(format!("scalar known to fewer than {digits} digits")))?;
                torsion.insert(j, reduce(p, j, &BigInt::from(cl * t)));
            }
            Ok(K2Element { p, n0: x.n0.mul(c), torsion, prec: x.prec }.normalized())
        }
    }
}

/// Normal form of `sum c_j {1 - p t^j, t}`.
pub fn k2_normal_form(p: u64, prec: u32, raw: &[(i64, BigInt)]) -> Result<K2Element> {
    let mut n0 = PadicScalar::zero_abs(p, prec as i64);
    let mut acc: BTreeMap<i64, BigInt> = BTreeMap::new();
    for (j, c) in raw {
        if *j == 0 {
            n0 = n0.add(&PadicScalar::from_bigint(p, c, prec));
        } else {
            *acc.entry(*j).or_default() += c;
        }
    }
    let torsion = acc.into_iter().map(|(j, c)| (j, reduce(p, j, &c))).collect();
    Ok(K2Element { p, n0, torsion, prec }.normalized())
}

/// Smallest `k ≥ 1` with `k * generator_j = 0`, searched up to `limit`.
pub fn observed_order(p: u64, j: i64, prec: u32, limit: u64) -> Option<u64> {
    let g = K2Element::generator(p, j, prec);
    let mut acc = g.clone();
    for k in 1..=limit {
        if acc.is_zero() {
            return Some(k);
        }
        acc = k2_combine(K2Op::Add(&g), &acc).ok()?;
    }
    None
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TorsionJson {
    pub j: i64,
    pub c: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct K2Json {
    pub schema: String,
    pub p: u64,
    pub prec: u32,
    pub n0: ScalarJson,
    pub torsion: Vec<TorsionJson>,
}

impl Order {
    pub fn to_u64(&self) -> Option<u64> {
        match self {
            Order::Finite(n) => n.to_u64(),
            Order::Infinite => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders() {
        assert_eq!(generator_order(5, 1).to_u64(), Some(5));
        assert_eq!(generator_order(5, 5).to_u64(), Some(25));
        assert_eq!(generator_order(5, -50).to_u64(), Some(125));
        assert_eq!(generator_order(5, 0), Order::Infinite);
    }

    #[test]
    fn normal_forms() {
        let b = |x: i64| BigInt::from(x);
        assert!(k2_normal_form(5, 10, &[(1, b(5))]).unwrap().is_zero());
        assert!(k2_normal_form(5, 10, &[(2, b(3)), (2, b(-3))]).unwrap().is_zero());
        assert!(!k2_normal_form(5, 10, &[(5, b(5))]).unwrap().is_zero());
    }

    #[test]
    fn inverse_and_torsion() {
        let x = k2_normal_form(5, 10, &[(0, BigInt::from(7)), (3, BigInt::from(2)), (-10, BigInt::from(9))]).unwrap();
        let nx = k2_combine(K2Op::Neg, &x).unwrap();
        assert!(k2_combine(K2Op::Add(&nx), &x).unwrap().is_zero());
        for j in [1i64, 5, 25] {
            let ord = generator_order(5, j).to_u64().unwrap() as i64;
            let g = K2Element::generator(5, j, 10);
            let c = PadicScalar::from_int(5, ord, 10);
            assert!(k2_combine(K2Op::ScalarMul(&c), &g).unwrap().is_zero());
        }
        let g0 = K2Element::generator(5, 0, 10);
        let p = PadicScalar::from_int(5, 5, 10);
        assert!(!k2_combine(K2Op::ScalarMul(&p), &g0).unwrap().is_zero());
    }
}
