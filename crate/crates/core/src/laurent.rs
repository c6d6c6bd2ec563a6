//! Laurent polynomials in `T` with p-adic coefficients.
//!
//! This is the working model of the coefficient ring: `T` is a unit and the
//! valuation of an element is the minimum p-adic valuation of its coefficients.
//! All coefficients share one absolute precision `prec`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::PadicScalar;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TLaurent {
    p: u64,
    prec: i64,
    coeffs: BTreeMap<i64, PadicScalar>,
}

impl TLaurent {
    pub fn zero(p: u64, prec: i64) -> Self {
        Self { p, prec, coeffs: BTreeMap::new() }
    }

    pub fn from_terms<I: IntoIterator<Item = (i64, PadicScalar)>>(p: u64, prec: i64, terms: I) -> Self {
        let mut f = Self::zero(p, prec);
        for (e, c) in terms {
            f.add_term(e, &c);
        }
        f
    }

    /// `c * T^e`.
    pub fn monomial(c: PadicScalar, e: i64, prec: i64) -> Self {
        let p = c.p();
        Self::from_terms(p, prec, [(e, c)])
    }

    pub fn constant(c: PadicScalar, prec: i64) -> Self {
        Self::monomial(c, 0, prec)
    }

    /// `T^e` with coefficient one.
    pub fn t_pow(p: u64, e: i64, prec: i64) -> Self {
        Self::monomial(PadicScalar::one(p, prec.max(1) as u32), e, prec)
    }

    pub fn one(p: u64, prec: i64) -> Self {
        Self::t_pow(p, 0, prec)
    }

    fn add_term(&mut self, e: i64, c: &PadicScalar) {
        let cur = self.coeffs.remove(&e).unwrap_or_else(|| PadicScalar::zero(self.p));
        let s = cur.add(c).truncate_abs(self.prec);
        if !s.is_zero() {
            self.coeffs.insert(e, s);
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn prec(&self) -> i64 {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, e: i64) -> PadicScalar {
        self.coeffs.get(&e).cloned().unwrap_or_else(|| PadicScalar::zero_abs(self.p, self.prec))
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &PadicScalar)> {
        self.coeffs.iter().map(|(e, c)| (*e, c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Minimum coefficient valuation (`None` for zero).
    pub fn valuation(&self) -> Option<i64> {
        self.coeffs.values().filter_map(|c| c.valuation()).min()
    }

    /// Range of T-exponents present.
    pub fn t_range(&self) -> Option<(i64, i64)> {
        Some((*self.coeffs.keys().next()?, *self.coeffs.keys().next_back()?))
    }

    pub fn truncate(&self, prec: i64) -> Self {
        Self::from_terms(self.p, prec.min(self.prec), self.coeffs.iter().map(|(e, c)| (*e, c.clone())))
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = Self { p: self.p, prec: self.prec.min(o.prec), coeffs: BTreeMap::new() };
        for (e, c) in self.coeffs.iter().chain(o.coeffs.iter()) {
            r.add_term(*e, c);
        }
        r
    }

    pub fn neg(&self) -> Self {
        Self { p: self.p, prec: self.prec, coeffs: self.coeffs.iter().map(|(e, c)| (*e, c.neg())).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    /// Multiplies by a scalar; the absolute precision shifts by the scalar's valuation.
    pub fn scale(&self, c: &PadicScalar) -> Self {
        let shift = c.valuation().unwrap_or(0);
        let prec = (self.prec + shift).min(c.abs_prec() + self.valuation().unwrap_or(0));
        Self::from_terms(self.p, prec, self.coeffs.iter().map(|(e, x)| (*e, x.mul(c))))
    }

    pub fn mul(&self, o: &Self) -> Self {
        // prec(fg) = min(prec f + v(g), prec g + v(f))
        let vf = self.valuation();
        let vg = o.valuation();
        let prec = match (vf, vg) {
            (Some(a), Some(b)) => (self.prec + b).min(o.prec + a),
            (None, Some(b)) => self.prec + b,
            (Some(a), None) => o.prec + a,
            (None, None) => self.prec + o.prec,
        };
        let mut r = Self::zero(self.p, prec);
        for (e1, c1) in &self.coeffs {
            for (e2, c2) in &o.coeffs {
                r.add_term(e1 + e2, &c1.mul(c2));
            }
        }
        r
    }

    /// Multiplies by `T^k`.
    pub fn shift_t(&self, k: i64) -> Self {
        Self { p: self.p, prec: self.prec, coeffs: self.coeffs.iter().map(|(e, c)| (e + k, c.clone())).collect() }
    }

    /// Substitution `T -> T^m`.
    pub fn scale_t(&self, m: i64) -> Self {
        assert!(m > 0, "T-exponent scale must be positive");
        Self { p: self.p, prec: self.prec, coeffs: self.coeffs.iter().map(|(e, c)| (e * m, c.clone())).collect() }
    }

    /// Inverse in the coefficient ring. Exists iff, after removing the content
    /// `p^v`, the reduction mod p is a single monomial `c T^k`.
    pub fn inv(&self) -> Result<Self> {
        let v = self.valuation().ok_or(Error::DivisionByZero)?;
        let unit_terms: Vec<_> = self.coeffs.iter().filter(|(_, c)| c.valuation() == Some(v)).collect();
        if unit_terms.len() != 1 {
            return Err(Error::NonInvertibleLeadingTerm(format!(
                "{} terms of minimal valuation in {self}",
                unit_terms.len()
            )));
        }
        let (k, lead) = (*unit_terms[0].0, unit_terms[0].1.clone());
        let lead_inv = TLaurent::monomial(lead.inv()?, -k, self.prec - 2 * v);
        // self * lead_inv = 1 + w with v(w) >= 1
        let one = TLaurent::one(self.p, self.prec - 2 * v);
        let w = self.mul(&lead_inv).sub(&one);
        let mut sum = one.clone();
        let mut term = one;
        let limit = (self.prec - 2 * v).max(1);
        for _ in 0..limit + 1 {
            term = term.mul(&w).neg();
            if term.is_zero() {
                break;
            }
            sum = sum.add(&term);
        }
        Ok(sum.mul(&lead_inv))
    }

    pub fn pow(&self, m: i64) -> Result<Self> {
        if m < 0 {
            return self.inv()?.pow(-m);
        }
        let mut base = self.clone();
        let mut acc = TLaurent::one(self.p, self.prec);
        let mut e = m as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        Ok(acc)
    }

    /// Evaluates at a p-adic unit.
    pub fn eval(&self, x: &PadicScalar) -> Result<PadicScalar> {
        match x.valuation() {
            Some(0) => {}
            Some(v) => return Err(Error::NonUnitSubstitution(v)),
            None => return Err(Error::NonUnitSubstitution(x.abs_prec())),
        }
        let mut acc = PadicScalar::zero_abs(self.p, self.prec);
        if self.coeffs.is_empty() {
            return Ok(acc);
        }
        let (lo, hi) = self.t_range().unwrap();
        let mut pw = x.pow(lo)?;
        for e in lo..=hi {
            if let Some(c) = self.coeffs.get(&e) {
                acc = acc.add(&c.mul(&pw));
            }
            pw = pw.mul(x);
        }
        Ok(acc)
    }
}

impl fmt::Display for TLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "O({}^{})", self.p, self.prec);
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|(e, c)| {
                let lift =
                    c.symmetric_lift(self.prec.max(0) as u32).map(|x| x.to_string()).unwrap_or_else(|| c.to_string());
                format!("({lift})*T^{e}")
            })
            .collect();
        write!(f, "{} + O({}^{})", parts.join(" + "), self.p, self.prec)
    }
}

impl fmt::Debug for TLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// One term of the canonical series JSON form.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq, Eq)]
pub struct TermJson {
    pub i: i64,
    pub t_exp: i64,
    pub val: i64,
    pub unit: String,
}

/// Canonical JSON form shared by scalars, Laurent polynomials and X-series.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq, Eq)]
pub struct SeriesJson {
    pub p: u64,
    pub prec: i64,
    pub terms: Vec<TermJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[i64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
}

pub(crate) fn term_json(i: i64, t_exp: i64, c: &PadicScalar) -> TermJson {
    TermJson { i, t_exp, val: c.valuation().expect("stored terms are nonzero"), unit: c.unit().to_string() }
}

pub(crate) fn term_from_json(p: u64, prec: i64, t: &TermJson) -> Result<PadicScalar> {
    let u: num_bigint::BigUint = t.unit.parse().map_err(|_| Error::InvalidInput(format!("bad unit '{}'", t.unit)))?;
    let rel = prec - t.val;
    if rel <= 0 || (&u % p) == num_bigint::BigUint::from(0u32) {
        return Err(Error::InvalidInput(format!("term {:?} inconsistent with prec {prec}", t)));
    }
    Ok(PadicScalar::from_parts(p, t.val, u, rel as u32))
}

impl TLaurent {
    pub fn to_json(&self) -> SeriesJson {
        SeriesJson {
            p: self.p,
            prec: self.prec,
            terms: self.coeffs.iter().map(|(e, c)| term_json(0, *e, c)).collect(),
            window: None,
            kind: None,
        }
    }

    pub fn from_json(j: &SeriesJson) -> Result<Self> {
        let mut f = Self::zero(j.p, j.prec);
        for t in &j.terms {
            if t.i != 0 {
                return Err(Error::InvalidInput("Laurent polynomial term with i != 0".into()));
            }
            f.add_term(t.t_exp, &term_from_json(j.p, j.prec, t)?);
        }
        Ok(f)
    }
}

impl PadicScalar {
    /// Canonical series JSON of a scalar (one term at `i = 0, t_exp = 0`).
    pub fn to_series_json(&self) -> SeriesJson {
        let terms = if self.is_zero() { vec![] } else { vec![term_json(0, 0, self)] };
        SeriesJson { p: self.p(), prec: self.abs_prec(), terms, window: None, kind: None }
    }
}
