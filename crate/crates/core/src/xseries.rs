//! Series `sum_i c_i(T) X^{i(p-1)+1}` with Laurent-polynomial coefficients.
//!
//! A series knows its coefficients for indices in `window = [lo, hi]`; indices
//! below `lo` are zero and indices above `hi` are unknown. Composition and
//! reversion go through the weighted kernel in [`crate::engine`] and report the
//! largest window on which the result is determined modulo `p^prec`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::engine::{self, Ctx, Ser};
use crate::error::{Error, Result};
use crate::laurent::{term_from_json, term_json, SeriesJson, TLaurent};
use crate::padic::PadicScalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    TwoSided,
    Nonneg,
}

impl SeriesKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SeriesKind::TwoSided => "two_sided",
            SeriesKind::Nonneg => "nonneg",
        }
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct XSeries {
    p: u64,
    prec: i64,
    entries: BTreeMap<i64, TLaurent>,
    window: (i64, i64),
    kind: SeriesKind,
}

/// X-exponent carried by index `i`.
pub fn exponent(p: u64, i: i64) -> i64 {
    i * (p as i64 - 1) + 1
}

/// Index carrying X-exponent `e`, if `e` is of the admissible form.
pub fn index_of(p: u64, e: i64) -> Option<i64> {
    let q = p as i64 - 1;
    if (e - 1).rem_euclid(q) == 0 {
        Some((e - 1).div_euclid(q))
    } else {
        None
    }
}

impl XSeries {
    pub fn zero(p: u64, prec: i64, kind: SeriesKind, window: (i64, i64)) -> Self {
        Self { p, prec, entries: BTreeMap::new(), window, kind }
    }

    pub fn from_entries<I: IntoIterator<Item = (i64, TLaurent)>>(
        p: u64,
        prec: i64,
        kind: SeriesKind,
        window: (i64, i64),
        entries: I,
    ) -> Result<Self> {
        if kind == SeriesKind::Nonneg && window.0 < 0 {
            return Err(Error::InvalidInput("nonneg series with negative window".into()));
        }
        let mut s = Self::zero(p, prec, kind, window);
        for (i, c) in entries {
            if i < window.0 || i > window.1 {
                return Err(Error::InvalidInput(format!("index {i} outside window {window:?}")));
            }
            s.set(i, c);
        }
        Ok(s)
    }

    /// The series `X`, known through index `hi`.
    pub fn x(p: u64, prec: i64, hi: i64) -> Self {
        let mut s = Self::zero(p, prec, SeriesKind::Nonneg, (0, hi));
        s.set(0, TLaurent::one(p, prec));
        s
    }

    fn set(&mut self, i: i64, c: TLaurent) {
        let c = c.truncate(self.prec);
        if c.is_zero() {
            self.entries.remove(&i);
        } else {
            self.entries.insert(i, c);
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn prec(&self) -> i64 {
        self.prec
    }

    pub fn window(&self) -> (i64, i64) {
        self.window
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    pub fn coeff(&self, i: i64) -> TLaurent {
        self.entries.get(&i).cloned().unwrap_or_else(|| TLaurent::zero(self.p, self.prec))
    }

    pub fn entries(&self) -> impl Iterator<Item = (i64, &TLaurent)> {
        self.entries.iter().map(|(i, c)| (*i, c))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Restricts the known window to `[lo, hi]` (never widens it).
    pub fn restrict(&self, hi: i64) -> Self {
        let mut s = self.clone();
        s.window.1 = s.window.1.min(hi);
        s.entries.retain(|&i, _| i <= hi);
        s
    }

    /// Reduces every coefficient modulo `p^prec`.
    pub fn truncate(&self, prec: i64) -> Self {
        let mut s = Self::zero(self.p, prec.min(self.prec), self.kind, self.window);
        for (&i, c) in &self.entries {
            s.set(i, c.clone());
        }
        s
    }

    /// Multiplies every coefficient by `T^m`-substitution `T -> T^m`.
    pub fn scale_t(&self, m: i64) -> Self {
        let mut s = self.clone();
        for c in s.entries.values_mut() {
            *c = c.scale_t(m);
        }
        s
    }

    /// Minimum p-adic valuation over stored coefficients.
    pub fn valuation(&self) -> Option<i64> {
        self.entries.values().filter_map(|c| c.valuation()).min()
    }

    // ---- kernel conversion ----

    pub(crate) fn to_ser(&self, ctx: &Ctx) -> Result<Ser> {
        let mut s = Ser::zero(ctx);
        for (&i, c) in &self.entries {
            let e = exponent(self.p, i);
            for (t, x) in c.terms() {
                let r = x.lift_mod(ctx.n).ok_or_else(|| {
                    Error::InvalidInput(format!("coefficient at index {i}, T^{t} is not integral to {} digits", ctx.n))
                })?;
                let r: u64 = r.try_into().expect("residue below 64-bit modulus");
                s.add_term(ctx, e, t, r);
            }
        }
        s.valid = exponent(self.p, self.window.1 + 1).min(ctx.wt);
        Ok(s)
    }

    /// Builds the public series from kernel output, keeping the indices that
    /// are determined modulo `p^N`.
    pub(crate) fn from_ser(p: u64, ctx: &Ctx, s: &Ser, kind: SeriesKind, lo: i64) -> Result<Self> {
        let mut hi = lo - 1;
        while exponent(p, hi + 1) + ctx.kappa * (ctx.n as i64 - 1) < s.valid {
            hi += 1;
        }
        if hi < lo {
            return Err(Error::WindowTooSmall(format!(
                "no index is determined modulo {p}^{} (valid weight {})",
                ctx.n, s.valid
            )));
        }
        let prec = ctx.n as i64;
        let mut out = Self::zero(p, prec, kind, (lo, hi));
        let mut by_index: BTreeMap<i64, Vec<(i64, PadicScalar)>> = BTreeMap::new();
        for (&(e, t), &c) in &s.terms {
            let i =
                index_of(p, e).unwrap_or_else(|| panic!("exponent {e} is not of the form i(p-1)+1 (closure violated)"));
            if i > hi {
                continue;
            }
            if i < lo {
                return Err(Error::WindowTooSmall(format!("nonzero coefficient at index {i} below window")));
            }
            let x = PadicScalar::from_bigint(p, &BigUint::from(c).into(), ctx.n);
            by_index.entry(i).or_default().push((t, x));
        }
        for (i, terms) in by_index {
            out.set(i, TLaurent::from_terms(p, prec, terms));
        }
        Ok(out)
    }

    /// Weight slope making every term of these series, other than the
    /// leading `X`, of positive weight relative to `X`.
    pub(crate) fn kappa_for(series: &[&XSeries]) -> Result<i64> {
        let mut kappa = 1;
        for s in series {
            for (&i, c) in &s.entries {
                let e = exponent(s.p, i);
                if e > 0 {
                    continue;
                }
                let v = c.valuation().unwrap_or(i64::MAX);
                if v <= 0 {
                    return Err(Error::DivergentComposition(format!(
                        "index {i} has unit coefficient at non-positive X-exponent {e}"
                    )));
                }
                kappa = kappa.max((1 - e) / v + 1);
            }
        }
        Ok(kappa)
    }

    pub(crate) fn ctx_for(series: &[&XSeries], prec: i64, hi: i64, extra_kappa: i64) -> Result<Ctx> {
        let p = series[0].p;
        if prec < 1 {
            return Err(Error::PrecisionExhausted("series precision below one digit".into()));
        }
        let n = prec as u32;
        if n > Ctx::max_prec(p) {
            return Err(Error::PrecisionExhausted(format!(
                "precision {n} exceeds the series kernel limit {} for p = {p}",
                Ctx::max_prec(p)
            )));
        }
        let kappa = Self::kappa_for(series)?.max(extra_kappa);
        let wt = exponent(p, hi) + kappa * (n as i64 - 1) + 1;
        Ctx::new(p, n, kappa, wt)
    }

    fn lowest(&self) -> i64 {
        self.window.0
    }

    // ---- algebra ----

    pub fn add(&self, o: &XSeries) -> Result<XSeries> {
        self.linear(o, false)
    }

    pub fn sub(&self, o: &XSeries) -> Result<XSeries> {
        self.linear(o, true)
    }

    fn linear(&self, o: &XSeries, negate: bool) -> Result<XSeries> {
        let prec = self.prec.min(o.prec);
        let lo = self.window.0.min(o.window.0);
        let hi = self.window.1.min(o.window.1);
        let kind = if self.kind == SeriesKind::Nonneg && o.kind == SeriesKind::Nonneg {
            SeriesKind::Nonneg
        } else {
            SeriesKind::TwoSided
        };
        let mut out = Self::zero(self.p, prec, kind, (lo, hi));
        for i in lo..=hi {
            let a = self.coeff(i);
            let b = o.coeff(i);
            out.set(i, if negate { a.sub(&b) } else { a.add(&b) });
        }
        Ok(out)
    }

    /// `self^m` for a positive integer `m`; the exponent set is preserved only
    /// for `m ≡ 1 mod (p - 1)`.
    pub fn pow(&self, m: i64) -> Result<XSeries> {
        if (m - 1).rem_euclid(self.p as i64 - 1) != 0 {
            return Err(Error::InvalidInput(format!("power {m} leaves the exponent set i(p-1)+1")));
        }
        let ctx = Self::ctx_for(&[self], self.prec, self.window.1, 1)?;
        let s = self.to_ser(&ctx)?;
        let r = engine::lead_pow(&ctx, &s, 1, m)?;
        let lo = if m >= 0 { self.lowest().min(0) * m.max(1) } else { self.lowest().min(0) };
        Self::from_ser(self.p, &ctx, &r, self.kind, lo.min(r.min_x().and_then(|e| index_of(self.p, e)).unwrap_or(lo)))
    }

    /// Formal substitution `outer(inner(X))`.
    pub fn compose(outer: &XSeries, inner: &XSeries) -> Result<XSeries> {
        if outer.p != inner.p {
            return Err(Error::InvalidInput("mismatched primes".into()));
        }
        let p = outer.p;
        let prec = outer.prec.min(inner.prec);
        let hi = outer.window.1.max(inner.window.1);
        let ctx = Self::ctx_for(&[outer, inner], prec, hi, 1)?;
        let o = outer.to_ser(&ctx)?;
        let i = inner.to_ser(&ctx)?;
        let r = engine::compose(&ctx, &o, &i, 1)?;
        let kind = if outer.kind == SeriesKind::Nonneg && inner.kind == SeriesKind::Nonneg {
            SeriesKind::Nonneg
        } else {
            SeriesKind::TwoSided
        };
        let lo_guess = if kind == SeriesKind::Nonneg { 0 } else { outer.window.0.min(inner.window.0) };
        let lo = r.min_x().and_then(|e| index_of(p, e)).map_or(lo_guess, |i| i.min(lo_guess));
        Self::from_ser(p, &ctx, &r, kind, lo)
    }

    /// Compositional inverse of a nonneg series with unit leading coefficient.
    pub fn reversion(&self) -> Result<XSeries> {
        if self.kind != SeriesKind::Nonneg {
            return Err(Error::InvalidInput("reversion requires a nonneg series".into()));
        }
        let p = self.p;
        let r0 = self.coeff(0);
        if r0.is_zero() {
            return Err(Error::NonInvertibleLeadingTerm("X-coefficient is zero".into()));
        }
        let hi = self.window.1;
        let ctx = Self::ctx_for(&[self], self.prec, hi, 1)?;
        let r = self.to_ser(&ctx)?;
        let lead = r.x_coeff(1);
        let lead_inv = engine::tpoly_inv(&ctx, &lead)?;
        let mut s = Ser::zero(&ctx);
        for (t, c) in &lead_inv {
            s.add_term(&ctx, 1, *t, *c);
        }
        for i in 1..=hi {
            let e = exponent(p, i);
            let partial = engine::compose(&ctx, &r, &s, 1)?;
            let c = partial.x_coeff(e);
            let neg: BTreeMap<i64, u64> = c.iter().map(|(t, x)| (*t, ctx.negmod(*x))).collect();
            for (t, x) in engine::tpoly_mul(&ctx, &neg, &lead_inv) {
                s.add_term(&ctx, e, t, x);
            }
        }
        s.valid = exponent(p, hi + 1).min(ctx.wt);
        let mut out = Self::from_ser(p, &ctx, &s, SeriesKind::Nonneg, 0)?;
        out.window.1 = out.window.1.min(hi);
        out.entries.retain(|&i, _| i <= hi);
        Ok(out)
    }

    // ---- JSON ----

    pub fn to_json(&self) -> SeriesJson {
        let mut terms = Vec::new();
        for (&i, c) in &self.entries {
            for (t, x) in c.terms() {
                terms.push(term_json(i, t, x));
            }
        }
        SeriesJson {
            p: self.p,
            prec: self.prec,
            terms,
            window: Some([self.window.0, self.window.1]),
            kind: Some(self.kind.as_str().to_string()),
        }
    }

    pub fn from_json(j: &SeriesJson) -> Result<Self> {
        let kind = match j.kind.as_deref() {
            Some("nonneg") => SeriesKind::Nonneg,
            Some("two_sided") | None => SeriesKind::TwoSided,
            Some(k) => return Err(Error::InvalidInput(format!("unknown series kind '{k}'"))),
        };
        let window = match j.window {
            Some([a, b]) => (a, b),
            None => {
                let lo = j.terms.iter().map(|t| t.i).min().unwrap_or(0);
                let hi = j.terms.iter().map(|t| t.i).max().unwrap_or(0);
                (lo, hi)
            }
        };
        let mut by_index: BTreeMap<i64, Vec<(i64, PadicScalar)>> = BTreeMap::new();
        for t in &j.terms {
            by_index.entry(t.i).or_default().push((t.t_exp, term_from_json(j.p, j.prec, t)?));
        }
        Self::from_entries(
            j.p,
            j.prec,
            kind,
            window,
            by_index.into_iter().map(|(i, ts)| (i, TLaurent::from_terms(j.p, j.prec, ts))),
        )
    }
}

impl fmt::Display for XSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.entries.iter().map(|(&i, c)| format!("[{c}]*X^{}", exponent(self.p, i))).collect();
        if parts.is_empty() {
            write!(f, "0")?;
        } else {
            write!(f, "{}", parts.join(" + "))?;
        }
        write!(f, "  (window {:?}, {})", self.window, self.kind.as_str())
    }
}

impl fmt::Debug for XSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(p: u64, prec: i64, terms: &[(i64, i64)]) -> TLaurent {
        TLaurent::from_terms(p, prec, terms.iter().map(|&(e, c)| (e, PadicScalar::from_int(p, c, prec as u32))))
    }

    fn nonneg(p: u64, prec: i64, hi: i64, e: &[(i64, &[(i64, i64)])]) -> XSeries {
        XSeries::from_entries(p, prec, SeriesKind::Nonneg, (0, hi), e.iter().map(|(i, ts)| (*i, lp(p, prec, ts))))
            .unwrap()
    }

    #[test]
    fn exponent_index_roundtrip() {
        for i in -5..10 {
            assert_eq!(index_of(5, exponent(5, i)), Some(i));
        }
        assert_eq!(index_of(5, 2), None);
    }

    #[test]
    fn compose_with_identity() {
        let g = nonneg(5, 3, 3, &[(0, &[(0, 1)]), (1, &[(2, 5)]), (2, &[(-1, 3)])]);
        let x = XSeries::x(5, 3, 3);
        assert_eq!(XSeries::compose(&x, &g).unwrap(), g);
        assert_eq!(XSeries::compose(&g, &x).unwrap(), g);
    }

    #[test]
    fn linear_reversion() {
        let r = nonneg(5, 4, 3, &[(0, &[(1, 1)])]);
        let s = r.reversion().unwrap();
        assert_eq!(s, nonneg(5, 4, 3, &[(0, &[(-1, 1)])]));
        let id = XSeries::compose(&r, &s).unwrap();
        assert_eq!(id, XSeries::x(5, 4, 3));
    }

    #[test]
    fn expansion_example() {
        // (TX + X^5) o (T^-1 X) = X + T^-5 X^5
        let outer = nonneg(5, 3, 2, &[(0, &[(1, 1)]), (1, &[(0, 1)])]);
        let inner = nonneg(5, 3, 2, &[(0, &[(-1, 1)])]);
        let c = XSeries::compose(&outer, &inner).unwrap();
        assert_eq!(c, nonneg(5, 3, 2, &[(0, &[(0, 1)]), (1, &[(-5, 1)])]));
    }

    #[test]
    fn reversion_through_index_one() {
        // R = TX + R1 X^p  =>  S = T^-1 X - R1 T^-(p+1) X^p + ...
        let r = nonneg(5, 3, 1, &[(0, &[(1, 1)]), (1, &[(2, 7), (0, 1)])]);
        let s = r.reversion().unwrap();
        let expect = nonneg(5, 3, 1, &[(0, &[(-1, 1)]), (1, &[(-4, -7), (-6, -1)])]);
        assert_eq!(s, expect);
    }

    #[test]
    fn two_sided_inner() {
        // outer = X, inner = X + 5 T X^{-3}
        let mut g = XSeries::zero(5, 2, SeriesKind::TwoSided, (-1, 3));
        g.set(0, TLaurent::one(5, 2));
        g.set(-1, lp(5, 2, &[(1, 5)]));
        let x = XSeries::x(5, 2, 3);
        // the p-divisible negative term can pull the unknown tail down by one index
        assert_eq!(XSeries::compose(&x, &g).unwrap(), g.restrict(2));
    }

    #[test]
    fn json_roundtrip() {
        let r = nonneg(5, 4, 3, &[(0, &[(1, 1)]), (2, &[(-3, 10), (4, 2)])]);
        let j = serde_json::to_string(&r.to_json()).unwrap();
        let back = XSeries::from_json(&serde_json::from_str(&j).unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
