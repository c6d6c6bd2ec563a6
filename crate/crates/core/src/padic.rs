//! Capped-relative-precision p-adic scalars.
//!
//! A nonzero scalar is `p^val * unit` with `unit` a residue modulo `p^prec`
//! coprime to `p`. A zero scalar remembers the absolute precision it is known
//! to (`O(p^val)`); the exact zero uses an infinite absolute precision.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute precision of an exact zero.
pub const INF: i64 = i64::MAX / 4;

thread_local! {
    static POW_CACHE: RefCell<HashMap<(u64, u32), BigUint>> = RefCell::new(HashMap::new());
}

/// `p^k` as a big integer, cached per thread.
pub fn ppow(p: u64, k: u32) -> BigUint {
    POW_CACHE.with(|c| c.borrow_mut().entry((p, k)).or_insert_with(|| BigUint::from(p).pow(k)).clone())
}

fn sat_add(a: i64, b: i64) -> i64 {
    if a >= INF || b >= INF {
        INF
    } else {
        a + b
    }
}

/// Modular inverse of `a` modulo `m` (assumes gcd = 1).
fn mod_inverse(a: &BigUint, m: &BigUint) -> BigUint {
    if m.is_one() {
        return BigUint::zero();
    }
    let a = BigInt::from_biguint(Sign::Plus, a.clone());
    let m = BigInt::from_biguint(Sign::Plus, m.clone());
    let e = a.extended_gcd(&m);
    debug_assert!(e.gcd.is_one());
    e.x.mod_floor(&m).to_biguint().unwrap()
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PadicScalar {
    p: u64,
    val: i64,
    unit: BigUint,
    prec: u32,
}

impl PadicScalar {
    /// The exact zero.
    pub fn zero(p: u64) -> Self {
        Self { p, val: INF, unit: BigUint::zero(), prec: 0 }
    }

    /// Zero known modulo `p^abs`.
    pub fn zero_abs(p: u64, abs: i64) -> Self {
        Self { p, val: abs.min(INF), unit: BigUint::zero(), prec: 0 }
    }

    pub fn one(p: u64, prec: u32) -> Self {
        Self::from_int(p, 1, prec)
    }

    /// `p^k` with `prec` significant digits.
    pub fn p_power(p: u64, k: i64, prec: u32) -> Self {
        Self::from_parts(p, k, BigUint::one(), prec)
    }

    pub fn from_int(p: u64, n: i64, prec: u32) -> Self {
        Self::from_bigint(p, &BigInt::from(n), prec)
    }

    /// An integer, kept to `prec` significant p-adic digits.
    pub fn from_bigint(p: u64, n: &BigInt, prec: u32) -> Self {
        if n.is_zero() {
            return Self::zero(p);
        }
        let mut a = n.abs().to_biguint().unwrap();
        let mut v = 0i64;
        let pb = BigUint::from(p);
        loop {
            let (q, r) = a.div_rem(&pb);
            if !r.is_zero() {
                break;
            }
            a = q;
            v += 1;
        }
        let m = ppow(p, prec);
        let mut u = a % &m;
        if n.is_negative() && !u.is_zero() {
            u = &m - u;
        }
        Self { p, val: v, unit: u, prec }.canon()
    }

    /// The rational number `num/den`, kept to `prec` significant digits.
    pub fn from_ratio(p: u64, num: i64, den: i64, prec: u32) -> Result<Self> {
        let n = Self::from_int(p, num, prec);
        let d = Self::from_int(p, den, prec);
        n.div(&d)
    }

    /// Builds `p^val * unit` (unit is reduced modulo `p^prec`; it must be coprime to p).
    pub fn from_parts(p: u64, val: i64, unit: BigUint, prec: u32) -> Self {
        if prec == 0 {
            return Self::zero_abs(p, val);
        }
        let u = unit % ppow(p, prec);
        debug_assert!(!(&u % p).is_zero(), "unit part divisible by p");
        Self { p, val, unit: u, prec }
    }

    fn canon(self) -> Self {
        if self.prec == 0 || self.unit.is_zero() {
            return Self::zero_abs(self.p, self.val);
        }
        self
    }

    /// Normalises `p^v * a` where `a` is known modulo `p^k`.
    fn normalize(p: u64, v: i64, a: BigUint, k: u32) -> Self {
        if a.is_zero() {
            return Self::zero_abs(p, v + k as i64);
        }
        let mut a = a;
        let mut c = 0u32;
        while (&a % p).is_zero() {
            a /= p;
            c += 1;
        }
        Self { p, val: v + c as i64, unit: a, prec: k - c }.canon()
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.unit.is_zero()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.is_zero() && self.val >= INF
    }

    /// p-adic valuation; `None` for zero (at the known precision).
    pub fn valuation(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.val)
        }
    }

    /// Valuation, treating a zero as having valuation equal to its absolute precision.
    pub fn val_or_abs(&self) -> i64 {
        self.val
    }

    pub fn unit(&self) -> &BigUint {
        &self.unit
    }

    pub fn rel_prec(&self) -> u32 {
        self.prec
    }

    /// The power of p modulo which the value is known.
    pub fn abs_prec(&self) -> i64 {
        if self.is_zero() {
            self.val
        } else {
            self.val + self.prec as i64
        }
    }

    fn check_p(&self, o: &Self) {
        assert_eq!(self.p, o.p, "mixing scalars over different primes");
    }

    /// Drops digits at and beyond `p^abs`.
    pub fn truncate_abs(&self, abs: i64) -> Self {
        if abs >= self.abs_prec() {
            return self.clone();
        }
        if self.is_zero() || abs <= self.val {
            return Self::zero_abs(self.p, abs);
        }
        let k = (abs - self.val) as u32;
        Self::from_parts(self.p, self.val, self.unit.clone(), k)
    }

    /// Caps the relative precision.
    pub fn with_rel_prec(&self, prec: u32) -> Self {
        if self.is_zero() || prec >= self.prec {
            return self.clone();
        }
        Self::from_parts(self.p, self.val, self.unit.clone(), prec)
    }

    pub fn add(&self, o: &Self) -> Self {
        self.check_p(o);
        let abs = self.abs_prec().min(o.abs_prec());
        if self.is_zero() {
            return o.truncate_abs(abs);
        }
        if o.is_zero() {
            return self.truncate_abs(abs);
        }
        let vmin = self.val.min(o.val);
        if abs <= vmin {
            return Self::zero_abs(self.p, abs);
        }
        let k = (abs - vmin) as u32;
        let m = ppow(self.p, k);
        let a = &self.unit * ppow(self.p, (self.val - vmin) as u32) + &o.unit * ppow(self.p, (o.val - vmin) as u32);
        Self::normalize(self.p, vmin, a % m, k)
    }

    pub fn neg(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let m = ppow(self.p, self.prec);
        Self { p: self.p, val: self.val, unit: &m - &self.unit, prec: self.prec }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.check_p(o);
        match (self.is_zero(), o.is_zero()) {
            (true, true) => Self::zero_abs(self.p, sat_add(self.val, o.val)),
            (true, false) => Self::zero_abs(self.p, sat_add(self.val, o.val)),
            (false, true) => Self::zero_abs(self.p, sat_add(self.val, o.val)),
            (false, false) => {
                let prec = self.prec.min(o.prec);
                let u = (&self.unit * &o.unit) % ppow(self.p, prec);
                Self { p: self.p, val: self.val + o.val, unit: u, prec }
            }
        }
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_exact_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.is_zero() {
            return Err(Error::PrecisionExhausted(format!("inverting O({}^{})", self.p, self.val)));
        }
        let m = ppow(self.p, self.prec);
        Ok(Self { p: self.p, val: -self.val, unit: mod_inverse(&self.unit, &m), prec: self.prec })
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, m: i64) -> Result<Self> {
        if m < 0 {
            return self.inv()?.pow(-m);
        }
        if m == 0 {
            let prec = if self.is_zero() { 0 } else { self.prec };
            return Ok(if prec == 0 { Self::one(self.p, 64) } else { Self::one(self.p, prec) });
        }
        if self.is_zero() {
            return Ok(Self::zero_abs(self.p, self.val.saturating_mul(m).min(INF)));
        }
        let modulus = ppow(self.p, self.prec);
        let u = self.unit.modpow(&BigUint::from(m as u64), &modulus);
        Ok(Self { p: self.p, val: self.val * m, unit: u, prec: self.prec })
    }

    /// Multiplies by `p^k`.
    pub fn shift(&self, k: i64) -> Self {
        if self.is_zero() {
            return Self::zero_abs(self.p, sat_add(self.val, k));
        }
        Self { val: self.val + k, ..self.clone() }
    }

    /// Residue class modulo p of an integral scalar.
    pub fn residue(&self) -> Option<u64> {
        if self.val > 0 && self.abs_prec() >= 1 {
            return Some(0);
        }
        if self.val < 0 || self.abs_prec() < 1 {
            return None;
        }
        (&self.unit % self.p).to_u64()
    }

    /// The least nonnegative integer congruent to the value modulo `p^abs`
    /// (requires valuation ≥ 0 and `abs ≤ abs_prec`).
    pub fn lift_mod(&self, abs: u32) -> Option<BigUint> {
        if self.is_zero() {
            return if self.val >= abs as i64 { Some(BigUint::zero()) } else { None };
        }
        if self.val < 0 || self.abs_prec() < abs as i64 {
            return None;
        }
        if self.val >= abs as i64 {
            return Some(BigUint::zero());
        }
        Some((&self.unit * ppow(self.p, self.val as u32)) % ppow(self.p, abs))
    }

    /// Signed integer representative in `(-p^abs/2, p^abs/2]` of an integral scalar.
    pub fn symmetric_lift(&self, abs: u32) -> Option<BigInt> {
        let u = self.lift_mod(abs)?;
        let m = ppow(self.p, abs);
        let half = &m >> 1;
        let u = BigInt::from_biguint(Sign::Plus, u);
        Some(if u > BigInt::from_biguint(Sign::Plus, half) { u - BigInt::from_biguint(Sign::Plus, m) } else { u })
    }

    /// True if `self - o` vanishes at the common precision.
    pub fn eq_at_prec(&self, o: &Self) -> bool {
        self.sub(o).is_zero()
    }
}

impl fmt::Debug for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact_zero() {
            return write!(f, "0");
        }
        if self.is_zero() {
            return write!(f, "O({}^{})", self.p, self.val);
        }
        write!(f, "{}*{}^{} + O({}^{})", self.unit, self.p, self.val, self.p, self.abs_prec())
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident) => {
        impl<'a> $tr<&'a PadicScalar> for &'a PadicScalar {
            type Output = PadicScalar;
            fn $m(self, o: &'a PadicScalar) -> PadicScalar {
                PadicScalar::$m(self, o)
            }
        }
    };
}
forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Neg for PadicScalar {
    type Output = PadicScalar;
    fn neg(self) -> PadicScalar {
        PadicScalar::neg(&self)
    }
}

impl Neg for &PadicScalar {
    type Output = PadicScalar;
    fn neg(self) -> PadicScalar {
        PadicScalar::neg(self)
    }
}

/// JSON form of a scalar: valuation, unit as a decimal string, relative precision.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq, Eq)]
pub struct ScalarJson {
    pub p: u64,
    pub prec: u32,
    /// `null` for zero.
    pub val: Option<i64>,
    pub unit: String,
    /// Absolute precision of a zero; omitted for nonzero values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs: Option<i64>,
}

impl From<&PadicScalar> for ScalarJson {
    fn from(x: &PadicScalar) -> Self {
        ScalarJson {
            p: x.p,
            prec: x.prec,
            val: x.valuation(),
            unit: x.unit.to_string(),
            abs: if x.is_zero() && !x.is_exact_zero() { Some(x.val) } else { None },
        }
    }
}

impl TryFrom<&ScalarJson> for PadicScalar {
    type Error = Error;
    fn try_from(j: &ScalarJson) -> Result<Self> {
        match j.val {
            None => Ok(match j.abs {
                Some(a) => PadicScalar::zero_abs(j.p, a),
                None => PadicScalar::zero(j.p),
            }),
            Some(v) => {
                let u: BigUint = j.unit.parse().map_err(|_| Error::InvalidInput(format!("bad unit '{}'", j.unit)))?;
                if (&u % j.p).is_zero() || j.prec == 0 {
                    return Err(Error::InvalidInput("unit divisible by p".into()));
                }
                Ok(PadicScalar::from_parts(j.p, v, u, j.prec))
            }
        }
    }
}

impl Serialize for PadicScalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ScalarJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for PadicScalar {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = ScalarJson::deserialize(d)?;
        PadicScalar::try_from(&j).map_err(serde::de::Error::custom)
    }
}

/// Parses a decimal integer or fraction `a/b` into a scalar.
pub fn parse_scalar(p: u64, s: &str, prec: u32) -> Result<PadicScalar> {
    let bad = || Error::InvalidInput(format!("cannot parse '{s}' as a rational number"));
    match s.split_once('/') {
        Some((a, b)) => {
            let a: BigInt = a.trim().parse().map_err(|_| bad())?;
            let b: BigInt = b.trim().parse().map_err(|_| bad())?;
            PadicScalar::from_bigint(p, &a, prec).div(&PadicScalar::from_bigint(p, &b, prec))
        }
        None => {
            let a: BigInt = s.trim().parse().map_err(|_| bad())?;
            Ok(PadicScalar::from_bigint(p, &a, prec))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: i64) -> PadicScalar {
        PadicScalar::from_int(5, n, 2)
    }

    #[test]
    fn inverse_of_two_mod_25() {
        let x = s(2).inv().unwrap();
        assert_eq!(x.valuation(), Some(0));
        assert_eq!(x.unit(), &BigUint::from(13u32));
    }

    #[test]
    fn p_times_p_inverse_is_one() {
        let p = PadicScalar::p_power(5, 1, 10);
        let q = PadicScalar::p_power(5, -1, 10);
        let one = p.mul(&q);
        assert_eq!(one, PadicScalar::one(5, 10));
        assert_eq!(one.valuation(), Some(0));
    }

    #[test]
    fn power_of_minus_p() {
        let mp = PadicScalar::from_int(5, -5, 6);
        let c = mp.pow(3).unwrap();
        assert_eq!(c.valuation(), Some(3));
        // unit ≡ -1 mod p^N
        assert_eq!(c.unit() + &BigUint::one(), ppow(5, 6));
    }

    #[test]
    fn cancellation_loses_precision() {
        let a = PadicScalar::from_int(5, 26, 3); // 1 + 5^2 + O(5^3)
        let b = PadicScalar::from_int(5, 1, 3);
        let d = a.sub(&b);
        assert_eq!(d.valuation(), Some(2));
        assert_eq!(d.abs_prec(), 3);
        assert_eq!(d.rel_prec(), 1);
        let z = b.sub(&b);
        assert!(z.is_zero() && !z.is_exact_zero());
        assert_eq!(z.abs_prec(), 3);
    }

    #[test]
    fn inverse_errors() {
        assert_eq!(PadicScalar::zero(5).inv(), Err(Error::DivisionByZero));
        assert!(matches!(PadicScalar::zero_abs(5, 3).inv(), Err(Error::PrecisionExhausted(_))));
    }

    #[test]
    fn json_round_trip() {
        let x = PadicScalar::from_ratio(5, 7, 10, 8).unwrap();
        let j = serde_json::to_string(&x).unwrap();
        let y: PadicScalar = serde_json::from_str(&j).unwrap();
        assert_eq!(x, y);
        assert_eq!(serde_json::to_string(&y).unwrap(), j);
    }

    #[test]
    fn residues_and_lifts() {
        let x = PadicScalar::from_int(5, -1, 4);
        assert_eq!(x.residue(), Some(4));
        assert_eq!(x.symmetric_lift(4), Some(BigInt::from(-1)));
        assert_eq!(PadicScalar::p_power(5, -1, 3).residue(), None);
    }
}
