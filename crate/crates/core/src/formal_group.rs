//! The Lubin–Tate formal group with `[p](X) = pX + X^p`.
//!
//! The law is built one homogeneous layer at a time from
//! `(p - p^k) F_k = [F_{<k}(pX + X^p, pY + Y^p)]_k - [(F_{<k})^p]_k`.
//! Every division by `p - p^k` costs one p-adic digit, so the build runs with
//! guard digits and reports the precision it actually reached.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::engine::{self, Bivar, Ctx, Ser};
use crate::error::{Error, Result};
use crate::padic::{PadicScalar, ScalarJson};
use crate::xseries::{SeriesKind, XSeries};

/// Truncated bivariate power series with p-adic coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BivarSeries {
    pub p: u64,
    pub coeffs: BTreeMap<(u32, u32), PadicScalar>,
    pub maxdeg: u32,
}

impl BivarSeries {
    pub fn coeff(&self, i: u32, j: u32) -> PadicScalar {
        self.coeffs.get(&(i, j)).cloned().unwrap_or_else(|| PadicScalar::zero(self.p))
    }

    /// Homogeneous part of total degree `k`.
    pub fn layer(&self, k: u32) -> BTreeMap<(u32, u32), PadicScalar> {
        self.coeffs.iter().filter(|((i, j), _)| i + j == k).map(|(k, c)| (*k, c.clone())).collect()
    }

    /// Residues modulo `p^n` for the series kernel.
    pub(crate) fn residues(&self, ctx: &Ctx) -> Result<Bivar> {
        let mut coeffs = BTreeMap::new();
        for (&k, c) in &self.coeffs {
            let r = c.lift_mod(ctx.n).ok_or_else(|| {
                Error::PrecisionExhausted(format!("group-law coefficient {k:?} known to fewer than {} digits", ctx.n))
            })?;
            let r: u64 = r.try_into().expect("residue below kernel modulus");
            if r != 0 {
                coeffs.insert(k, r);
            }
        }
        Ok(Bivar { coeffs, maxdeg: self.maxdeg })
    }
}

#[derive(Serialize, Deserialize)]
struct BivarTermJson {
    i: u32,
    j: u32,
    c: ScalarJson,
}

#[derive(Serialize, Deserialize)]
pub struct BivarJson {
    p: u64,
    maxdeg: u32,
    terms: Vec<BivarTermJson>,
}

impl BivarSeries {
    pub fn to_json(&self) -> BivarJson {
        BivarJson {
            p: self.p,
            maxdeg: self.maxdeg,
            terms: self.coeffs.iter().map(|(&(i, j), c)| BivarTermJson { i, j, c: c.into() }).collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct GroupLaw {
    pub p: u64,
    pub f: BivarSeries,
    pub maxdeg: u32,
    /// Absolute p-adic precision to which every coefficient is known.
    pub prec: u32,
}

type Poly = BTreeMap<(u32, u32), PadicScalar>;

fn poly_mul_trunc(a: &Poly, b: &Poly, maxdeg: u32) -> Poly {
    let mut r: Poly = BTreeMap::new();
    for (&(i1, j1), c1) in a {
        for (&(i2, j2), c2) in b {
            if i1 + i2 + j1 + j2 > maxdeg {
                continue;
            }
            let k = (i1 + i2, j1 + j2);
            let prod = c1.mul(c2);
            match r.get_mut(&k) {
                Some(x) => *x = x.add(&prod),
                None => {
                    r.insert(k, prod);
                }
            }
        }
    }
    r
}

fn binom_u(n: u32, k: u32) -> BigInt {
    engine::binom(n as i64, k as u64)
}

/// Builds the group law to total degree `maxdeg`, every coefficient known
/// modulo `p^prec`.
pub fn build_group_law(p: u64, maxdeg: u32, prec: u32) -> Result<GroupLaw> {
    if maxdeg < 1 {
        return Err(Error::InvalidInput("maxdeg must be at least 1".into()));
    }
    if prec < 1 {
        return Err(Error::InvalidInput("precision must be at least 1".into()));
    }
    let layers = (maxdeg - 1) / (p as u32 - 1) + 1;
    let mut guard = layers + 2;
    for _ in 0..4 {
        let law = build_at(p, maxdeg, prec + guard)?;
        if law.prec >= prec {
            return Ok(truncate_law(&law, prec));
        }
        guard *= 2;
    }
    Err(Error::PrecisionExhausted(format!("group law to degree {maxdeg} did not reach {prec} digits")))
}

fn truncate_law(law: &GroupLaw, prec: u32) -> GroupLaw {
    let coeffs =
        law.f.coeffs.iter().map(|(k, c)| (*k, c.truncate_abs(prec as i64))).filter(|(_, c)| !c.is_zero()).collect();
    GroupLaw { p: law.p, f: BivarSeries { p: law.p, coeffs, maxdeg: law.maxdeg }, maxdeg: law.maxdeg, prec }
}

fn build_at(p: u64, maxdeg: u32, work: u32) -> Result<GroupLaw> {
    let pi = p as u32;
    let one = PadicScalar::one(p, work);
    let mut f: Poly = BTreeMap::new();
    f.insert((1, 0), one.clone());
    f.insert((0, 1), one.clone());
    // (pX + X^p)^a = sum_r C(a,r) p^(a-r) X^(a + (p-1) r), cached per a
    let mut lt_pow: Vec<Vec<(u32, PadicScalar)>> = vec![vec![(0, one.clone())]];
    for a in 1..=maxdeg {
        let mut terms = Vec::new();
        for r in 0..=a {
            let deg = a + (pi - 1) * r;
            if deg > maxdeg {
                break;
            }
            let c =
                PadicScalar::from_bigint(p, &binom_u(a, r), work).mul(&PadicScalar::p_power(p, (a - r) as i64, work));
            terms.push((deg, c));
        }
        lt_pow.push(terms);
    }
    for k in 2..=maxdeg {
        if (k - 1) % (pi - 1) != 0 {
            continue;
        }
        // first term: substitution into the lower layers
        let mut lhs: Poly = BTreeMap::new();
        for (&(a, b), c) in &f {
            for (da, ca) in &lt_pow[a as usize] {
                for (db, cb) in &lt_pow[b as usize] {
                    if da + db != k {
                        continue;
                    }
                    let term = c.mul(ca).mul(cb);
                    let key = (*da, *db);
                    match lhs.get_mut(&key) {
                        Some(x) => *x = x.add(&term),
                        None => {
                            lhs.insert(key, term);
                        }
                    }
                }
            }
        }
        // second term: p-th power of the lower layers
        let mut pw: Poly = BTreeMap::from([((0, 0), one.clone())]);
        for _ in 0..p {
            pw = poly_mul_trunc(&pw, &f, k);
        }
        let denom =
            PadicScalar::from_int(p, p as i64, work).sub(&PadicScalar::from_bigint(p, &BigInt::from(p).pow(k), work));
        let dinv = denom.inv()?;
        for i in 0..=k {
            let key = (i, k - i);
            let a = lhs.get(&key).cloned().unwrap_or_else(|| PadicScalar::zero_abs(p, work as i64));
            let b = pw.get(&key).cloned().unwrap_or_else(|| PadicScalar::zero_abs(p, work as i64));
            let c = a.sub(&b).mul(&dinv);
            if c.abs_prec() < 1 {
                return Err(Error::PrecisionExhausted(format!(
                    "layer {k} lost all digits at working precision {work}"
                )));
            }
            if !c.is_zero() {
                f.insert(key, c);
            } else {
                f.insert(key, PadicScalar::zero_abs(p, c.abs_prec()));
            }
        }
    }
    let reached = f.values().map(|c| c.abs_prec()).min().unwrap_or(work as i64).max(0) as u32;
    let coeffs = f.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    Ok(GroupLaw { p, f: BivarSeries { p, coeffs, maxdeg }, maxdeg, prec: reached.min(work) })
}

/// Formal-group sum `F(a, b)` of two series.
pub fn fg_add(law: &GroupLaw, a: &XSeries, b: &XSeries) -> Result<XSeries> {
    let p = law.p;
    let prec = a.prec().min(b.prec()).min(law.prec as i64);
    let hi = a.window().1.max(b.window().1);
    let ctx = XSeries::ctx_for(&[a, b], prec, hi, 1)?;
    let sa = a.to_ser(&ctx)?;
    let sb = b.to_ser(&ctx)?;
    let r = engine::subst_bivar(&ctx, &law.f.residues(&ctx)?, &sa, &sb)?;
    let kind = if a.kind() == SeriesKind::Nonneg && b.kind() == SeriesKind::Nonneg {
        SeriesKind::Nonneg
    } else {
        SeriesKind::TwoSided
    };
    let lo = a.window().0.min(b.window().0).min(0);
    let lo = r.min_x().and_then(|e| crate::xseries::index_of(p, e)).map_or(lo, |i| i.min(lo));
    XSeries::from_ser(p, &ctx, &r, kind, lo)
}

/// `[p](a) = p a + a^p`.
pub fn fg_mul_p(a: &XSeries) -> Result<XSeries> {
    let p = a.p();
    let ctx = XSeries::ctx_for(&[a], a.prec(), a.window().1, 1)?;
    let s = a.to_ser(&ctx)?;
    let r = mul_p_ser(&ctx, &s)?;
    let lo = a.window().0.min(0);
    let lo = r.min_x().and_then(|e| crate::xseries::index_of(p, e)).map_or(lo, |i| i.min(lo));
    XSeries::from_ser(p, &ctx, &r, a.kind(), lo)
}

pub(crate) fn mul_p_ser(ctx: &Ctx, s: &Ser) -> Result<Ser> {
    let pw = if s.omega(ctx) > 0 { s.pow(ctx, ctx.p) } else { engine::lead_pow(ctx, s, 1, ctx.p as i64)? };
    Ok(s.scale(ctx, ctx.p % ctx.modulus).add(ctx, &pw))
}

/// Counts of coefficients violating each defining property of the law.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LawCheck {
    pub identity: usize,
    pub commutativity: usize,
    pub associativity: usize,
    pub p_compatibility: usize,
    pub integrality: usize,
}

impl LawCheck {
    pub fn total(&self) -> usize {
        self.identity + self.commutativity + self.associativity + self.p_compatibility + self.integrality
    }
}

/// Multivariate truncated polynomials modulo `p^n`, used only for the checks.
mod mpoly {
    use super::*;

    pub type MP = BTreeMap<Vec<u32>, u64>;

    pub fn deg(k: &[u32]) -> u32 {
        k.iter().sum()
    }

    pub fn add(ctx: &Ctx, a: &MP, b: &MP) -> MP {
        let mut r = a.clone();
        for (k, &c) in b {
            let e = r.entry(k.clone()).or_insert(0);
            *e = ctx.addmod(*e, c);
        }
        r.retain(|_, c| *c != 0);
        r
    }

    pub fn scale(ctx: &Ctx, a: &MP, c: u64) -> MP {
        let mut r: MP = a.iter().map(|(k, &x)| (k.clone(), ctx.mulmod(x, c))).collect();
        r.retain(|_, c| *c != 0);
        r
    }

    pub fn mul(ctx: &Ctx, a: &MP, b: &MP, maxdeg: u32) -> MP {
        let mut r: MP = BTreeMap::new();
        for (k1, &c1) in a {
            let d1 = deg(k1);
            for (k2, &c2) in b {
                if d1 + deg(k2) > maxdeg {
                    continue;
                }
                let k: Vec<u32> = k1.iter().zip(k2).map(|(x, y)| x + y).collect();
                let e = r.entry(k).or_insert(0);
                *e = ctx.addmod(*e, ctx.mulmod(c1, c2));
            }
        }
        r.retain(|_, c| *c != 0);
        r
    }

    pub fn var(nvars: usize, which: usize) -> MP {
        let mut k = vec![0; nvars];
        k[which] = 1;
        BTreeMap::from([(k, 1)])
    }

    pub fn one(nvars: usize) -> MP {
        BTreeMap::from([(vec![0; nvars], 1)])
    }

    /// `F(a, b)` truncated at `maxdeg`.
    pub fn subst(ctx: &Ctx, f: &Bivar, a: &MP, b: &MP, nvars: usize, maxdeg: u32) -> MP {
        let maxi = f.coeffs.keys().map(|k| k.0).max().unwrap_or(0);
        let maxj = f.coeffs.keys().map(|k| k.1).max().unwrap_or(0);
        let mut ap = vec![one(nvars)];
        for _ in 0..maxi {
            let n = mul(ctx, ap.last().unwrap(), a, maxdeg);
            ap.push(n);
        }
        let mut bp = vec![one(nvars)];
        for _ in 0..maxj {
            let n = mul(ctx, bp.last().unwrap(), b, maxdeg);
            bp.push(n);
        }
        let mut r = BTreeMap::new();
        for (&(i, j), &c) in &f.coeffs {
            let t = mul(ctx, &ap[i as usize], &bp[j as usize], maxdeg);
            r = add(ctx, &r, &scale(ctx, &t, c));
        }
        r
    }
}

/// Checks the defining properties of the law at its own precision.
pub fn check_law(law: &GroupLaw) -> Result<LawCheck> {
    let p = law.p;
    let n = law.prec.min(Ctx::max_prec(p));
    let ctx = Ctx::new(p, n, 1, i64::MAX / 4)?;
    let f = law.f.residues(&ctx)?;
    let md = law.maxdeg;
    let mut out = LawCheck::default();

    for (&(i, j), c) in &law.f.coeffs {
        if c.valuation().is_some_and(|v| v < 0) {
            out.integrality += 1;
        }
        if i == 0 && j == 0 {
            out.identity += 1;
        }
    }
    // F(X, 0) = X and F(0, Y) = Y
    for (&(i, j), &c) in &f.coeffs {
        let expected = u64::from((i, j) == (1, 0) || (i, j) == (0, 1));
        if (i == 0 || j == 0) && c != expected {
            out.identity += 1;
        }
    }
    for k in [(1, 0), (0, 1)] {
        if !f.coeffs.contains_key(&k) {
            out.identity += 1;
        }
    }
    // symmetry
    for (&(i, j), &c) in &f.coeffs {
        if f.coeffs.get(&(j, i)).copied().unwrap_or(0) != c {
            out.commutativity += 1;
        }
    }
    // [p]-compatibility: p F + F^p = F(pX + X^p, pY + Y^p)
    let x = mpoly::var(2, 0);
    let y = mpoly::var(2, 1);
    let fx: mpoly::MP = f.coeffs.iter().map(|(&(i, j), &c)| (vec![i, j], c)).collect();
    let mut fp = mpoly::one(2);
    for _ in 0..p {
        fp = mpoly::mul(&ctx, &fp, &fx, md);
    }
    let lhs = mpoly::add(&ctx, &mpoly::scale(&ctx, &fx, p), &fp);
    let bracket = |v: &mpoly::MP| {
        let mut vp = mpoly::one(2);
        for _ in 0..p {
            vp = mpoly::mul(&ctx, &vp, v, md);
        }
        mpoly::add(&ctx, &mpoly::scale(&ctx, v, p), &vp)
    };
    let rhs = mpoly::subst(&ctx, &f, &bracket(&x), &bracket(&y), 2, md);
    let diff = mpoly::add(&ctx, &lhs, &mpoly::scale(&ctx, &rhs, ctx.modulus - 1));
    out.p_compatibility = diff.len();
    // associativity through three variables
    let x3 = mpoly::var(3, 0);
    let y3 = mpoly::var(3, 1);
    let z3 = mpoly::var(3, 2);
    let fxy = mpoly::subst(&ctx, &f, &x3, &y3, 3, md);
    let fyz = mpoly::subst(&ctx, &f, &y3, &z3, 3, md);
    let left = mpoly::subst(&ctx, &f, &fxy, &z3, 3, md);
    let right = mpoly::subst(&ctx, &f, &x3, &fyz, 3, md);
    let diff = mpoly::add(&ctx, &left, &mpoly::scale(&ctx, &right, ctx.modulus - 1));
    out.associativity = diff.len();
    Ok(out)
}
