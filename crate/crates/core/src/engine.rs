//! Internal kernel for Laurent series in `X` with Laurent-polynomial-in-`T`
//! coefficients, computed modulo `p^N`.
//!
//! Series may carry finitely many negative powers of `X` provided their
//! coefficients are divisible by enough powers of `p`. Truncation is governed
//! by the weight `w(c X^e) = e + kappa * v_p(c)`: every term of weight at least
//! the context threshold is dropped, and every series records `valid`, the
//! weight below which all of its terms are correct. Weights are superadditive
//! under multiplication, which gives the propagation rule
//! `valid(ab) = min(valid(a) + omega(b), valid(b) + omega(a))` with `omega` the
//! least weight present.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Shared parameters of one computation.
#[derive(Clone, Debug)]
pub struct Ctx {
    pub p: u64,
    pub n: u32,
    pub modulus: u64,
    pub kappa: i64,
    /// Drop threshold: terms of weight ≥ `wt` are discarded.
    pub wt: i64,
    pows: Vec<u64>,
}

impl Ctx {
    pub fn new(p: u64, n: u32, kappa: i64, wt: i64) -> Result<Self> {
        let mut pows = vec![1u64];
        for _ in 0..n {
            let last = *pows.last().unwrap() as u128;
            let next = last * p as u128;
            if next > u64::MAX as u128 {
                return Err(Error::PrecisionExhausted(format!("series kernel modulus {p}^{n} exceeds 64 bits")));
            }
            pows.push(next as u64);
        }
        if kappa < 1 {
            return Err(Error::InvalidInput("weight slope must be positive".into()));
        }
        Ok(Self { p, n, modulus: pows[n as usize], kappa, wt, pows })
    }

    /// Largest `n` such that `p^n` fits in the kernel.
    pub fn max_prec(p: u64) -> u32 {
        let mut n = 0;
        let mut acc: u128 = 1;
        while acc * (p as u128) <= u64::MAX as u128 {
            acc *= p as u128;
            n += 1;
        }
        n
    }

    pub fn ppow(&self, k: u32) -> u64 {
        self.pows[k.min(self.n) as usize]
    }

    /// p-adic valuation of a residue (n for zero).
    pub fn val(&self, c: u64) -> u32 {
        if c == 0 {
            return self.n;
        }
        let mut c = c;
        let mut v = 0;
        while c.is_multiple_of(self.p) {
            c /= self.p;
            v += 1;
        }
        v
    }

    pub fn weight(&self, e: i64, c: u64) -> i64 {
        e + self.kappa * self.val(c) as i64
    }

    /// Number of p-adic digits retained at X-exponent `e`.
    fn digits_at(&self, e: i64) -> u32 {
        let room = self.wt - e;
        if room <= 0 {
            return 0;
        }
        let k = (room + self.kappa - 1) / self.kappa;
        (k.min(self.n as i64)) as u32
    }

    fn reduce(&self, e: i64, c: u64) -> u64 {
        let k = self.digits_at(e);
        if k == 0 {
            0
        } else {
            c % self.pows[k as usize]
        }
    }

    pub fn mulmod(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    pub fn addmod(&self, a: u64, b: u64) -> u64 {
        ((a as u128 + b as u128) % self.modulus as u128) as u64
    }

    pub fn negmod(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    /// Reduces a signed big integer modulo `p^N`.
    pub fn from_bigint(&self, x: &BigInt) -> u64 {
        let m = BigInt::from(self.modulus);
        let r = ((x % &m) + &m) % &m;
        r.to_u64().unwrap()
    }

    pub fn from_i64(&self, x: i64) -> u64 {
        let m = self.modulus as i128;
        (((x as i128 % m) + m) % m) as u64
    }

    /// Inverse of a p-adic unit modulo `p^N`.
    pub fn inv(&self, a: u64) -> Result<u64> {
        if a.is_multiple_of(self.p) {
            return Err(Error::DivisionByZero);
        }
        let (mut t, mut nt) = (0i128, 1i128);
        let (mut r, mut nr) = (self.modulus as i128, a as i128);
        while nr != 0 {
            let q = r / nr;
            (t, nt) = (nt, t - q * nt);
            (r, nr) = (nr, r - q * nr);
        }
        let m = self.modulus as i128;
        Ok((((t % m) + m) % m) as u64)
    }
}

/// A truncated series: `(x_exp, t_exp) -> residue mod p^N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ser {
    pub terms: BTreeMap<(i64, i64), u64>,
    pub valid: i64,
}

impl Ser {
    pub fn zero(ctx: &Ctx) -> Self {
        Ser { terms: BTreeMap::new(), valid: ctx.wt }
    }

    /// `c T^t X^e`.
    pub fn monomial(ctx: &Ctx, e: i64, t: i64, c: u64) -> Self {
        let mut s = Self::zero(ctx);
        s.add_term(ctx, e, t, c);
        s
    }

    pub fn x(ctx: &Ctx) -> Self {
        Self::monomial(ctx, 1, 0, 1)
    }

    pub fn one(ctx: &Ctx) -> Self {
        Self::monomial(ctx, 0, 0, 1)
    }

    pub fn add_term(&mut self, ctx: &Ctx, e: i64, t: i64, c: u64) {
        let cur = self.terms.remove(&(e, t)).unwrap_or(0);
        let s = ctx.reduce(e, ctx.addmod(cur, c));
        if s != 0 {
            self.terms.insert((e, t), s);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: i64, t: i64) -> u64 {
        self.terms.get(&(e, t)).copied().unwrap_or(0)
    }

    /// Least weight of a stored term (`valid` for the zero series).
    pub fn omega(&self, ctx: &Ctx) -> i64 {
        self.terms.iter().map(|(&(e, _), &c)| ctx.weight(e, c)).min().unwrap_or(self.valid)
    }

    pub fn min_x(&self) -> Option<i64> {
        self.terms.keys().next().map(|k| k.0)
    }

    pub fn add(&self, ctx: &Ctx, o: &Ser) -> Ser {
        let mut r = self.clone();
        r.valid = self.valid.min(o.valid);
        for (&(e, t), &c) in &o.terms {
            r.add_term(ctx, e, t, c);
        }
        r.retrim(ctx);
        r
    }

    pub fn neg(&self, ctx: &Ctx) -> Ser {
        Ser { terms: self.terms.iter().map(|(k, &c)| (*k, ctx.negmod(c))).collect(), valid: self.valid }
    }

    pub fn sub(&self, ctx: &Ctx, o: &Ser) -> Ser {
        self.add(ctx, &o.neg(ctx))
    }

    /// Drops terms at or beyond `valid` (they are not trustworthy).
    fn retrim(&mut self, ctx: &Ctx) {
        let valid = self.valid;
        self.terms.retain(|&(e, _), c| ctx.weight(e, *c) < valid);
    }

    pub fn scale(&self, ctx: &Ctx, c: u64) -> Ser {
        let mut r = Ser { terms: BTreeMap::new(), valid: self.valid };
        if c != 0 {
            r.valid = self.valid.saturating_add(ctx.kappa * ctx.val(c) as i64).min(ctx.wt);
        }
        for (&(e, t), &x) in &self.terms {
            r.add_term(ctx, e, t, ctx.mulmod(x, c));
        }
        r
    }

    /// Multiplies by `X^k`.
    pub fn shift_x(&self, ctx: &Ctx, k: i64) -> Ser {
        let mut r = Ser { terms: BTreeMap::new(), valid: (self.valid + k).min(ctx.wt) };
        for (&(e, t), &c) in &self.terms {
            r.add_term(ctx, e + k, t, c);
        }
        r.retrim(ctx);
        r
    }

    /// Multiplies by `T^k`.
    pub fn shift_t(&self, k: i64) -> Ser {
        Ser { terms: self.terms.iter().map(|(&(e, t), &c)| ((e, t + k), c)).collect(), valid: self.valid }
    }

    /// Substitution `T -> T^m`.
    pub fn scale_t(&self, m: i64) -> Ser {
        Ser { terms: self.terms.iter().map(|(&(e, t), &c)| ((e, t * m), c)).collect(), valid: self.valid }
    }

    /// Formal derivative in `X`.
    pub fn deriv_x(&self, ctx: &Ctx) -> Ser {
        let mut r = Ser { terms: BTreeMap::new(), valid: self.valid - 1 };
        for (&(e, t), &c) in &self.terms {
            if e != 0 {
                r.add_term(ctx, e - 1, t, ctx.mulmod(c, ctx.from_i64(e)));
            }
        }
        r.retrim(ctx);
        r
    }

    pub fn mul(&self, ctx: &Ctx, o: &Ser) -> Ser {
        let wa = self.omega(ctx);
        let wb = o.omega(ctx);
        let valid = (self.valid.saturating_add(wb)).min(o.valid.saturating_add(wa)).min(ctx.wt);
        let a: Vec<(i64, i64, u64, i64)> = self.terms.iter().map(|(&(e, t), &c)| (e, t, c, ctx.weight(e, c))).collect();
        let b: Vec<(i64, i64, u64, i64)> = o.terms.iter().map(|(&(e, t), &c)| (e, t, c, ctx.weight(e, c))).collect();
        let mut acc: HashMap<(i64, i64), u128> = HashMap::new();
        let m = ctx.modulus as u128;
        for &(e1, t1, c1, w1) in &a {
            if w1 + wb >= valid {
                continue;
            }
            for &(e2, t2, c2, w2) in &b {
                if w1 + w2 >= valid {
                    continue;
                }
                let prod = (c1 as u128 * c2 as u128) % m;
                *acc.entry((e1 + e2, t1 + t2)).or_insert(0) += prod;
            }
        }
        let mut r = Ser { terms: BTreeMap::new(), valid };
        for ((e, t), c) in acc {
            let c = ctx.reduce(e, (c % m) as u64);
            if c != 0 && ctx.weight(e, c) < valid {
                r.terms.insert((e, t), c);
            }
        }
        r
    }

    pub fn pow(&self, ctx: &Ctx, k: u64) -> Ser {
        let mut acc = Ser::one(ctx);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(ctx, &base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(ctx, &base);
            }
        }
        acc
    }

    /// The coefficient of `X^e` as a Laurent polynomial in `T`.
    pub fn x_coeff(&self, e: i64) -> BTreeMap<i64, u64> {
        self.terms.range((e, i64::MIN)..=(e, i64::MAX)).map(|(&(_, t), &c)| (t, c)).collect()
    }

    /// Multiplies by a Laurent polynomial in `T` (given as `t_exp -> residue`).
    pub fn mul_tpoly(&self, ctx: &Ctx, f: &BTreeMap<i64, u64>) -> Ser {
        let mut s = Ser::zero(ctx);
        for (&t, &c) in f {
            s.add_term(ctx, 0, t, c);
        }
        self.mul(ctx, &s)
    }

    /// Minimum p-adic valuation over terms with X-exponent ≤ `e_hi`.
    pub fn min_val_upto(&self, ctx: &Ctx, e_hi: i64) -> Option<u32> {
        self.terms.iter().filter(|(&(e, _), _)| e <= e_hi).map(|(_, &c)| ctx.val(c)).min()
    }

    /// True if every coefficient at X-exponent ≤ `e_hi` is determined modulo `p^N`.
    pub fn known_upto(&self, ctx: &Ctx, e_hi: i64) -> bool {
        e_hi + ctx.kappa * (ctx.n as i64 - 1) < self.valid
    }
}

/// Inverse of a Laurent polynomial in `T` that is a unit (reduction mod p a monomial).
pub fn tpoly_inv(ctx: &Ctx, f: &BTreeMap<i64, u64>) -> Result<BTreeMap<i64, u64>> {
    let units: Vec<_> = f.iter().filter(|(_, &c)| c % ctx.p != 0).collect();
    if units.len() != 1 {
        return Err(Error::NonInvertibleLeadingTerm(format!("{} unit terms in leading coefficient", units.len())));
    }
    let (&k, &c) = units[0];
    let ci = ctx.inv(c)?;
    // f = c T^k (1 + w)
    let mut w: BTreeMap<i64, u64> = BTreeMap::new();
    for (&t, &x) in f {
        if t != k {
            w.insert(t - k, ctx.mulmod(x, ci));
        } else if ctx.mulmod(x, ci) != 1 {
            w.insert(0, ctx.addmod(ctx.mulmod(x, ci), ctx.modulus - 1));
        }
    }
    let mut sum: BTreeMap<i64, u64> = BTreeMap::from([(0, 1)]);
    let mut term = sum.clone();
    for _ in 0..=ctx.n {
        term = tpoly_mul(ctx, &term, &w);
        term.iter_mut().for_each(|(_, c)| *c = ctx.negmod(*c));
        term.retain(|_, c| *c != 0);
        if term.is_empty() {
            break;
        }
        for (&t, &c) in &term {
            let e = sum.entry(t).or_insert(0);
            *e = ctx.addmod(*e, c);
        }
    }
    sum.retain(|_, c| *c != 0);
    Ok(sum.into_iter().map(|(t, x)| (t - k, ctx.mulmod(x, ci))).collect())
}

pub fn tpoly_mul(ctx: &Ctx, a: &BTreeMap<i64, u64>, b: &BTreeMap<i64, u64>) -> BTreeMap<i64, u64> {
    let mut r: BTreeMap<i64, u64> = BTreeMap::new();
    for (&t1, &c1) in a {
        for (&t2, &c2) in b {
            let e = r.entry(t1 + t2).or_insert(0);
            *e = ctx.addmod(*e, ctx.mulmod(c1, c2));
        }
    }
    r.retain(|_, c| *c != 0);
    r
}

/// Exact binomial coefficient `C(m, k)` for any integer `m`.
pub fn binom(m: i64, k: u64) -> BigInt {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for j in 0..k {
        num *= BigInt::from(m - j as i64);
        den *= BigInt::from(j + 1);
    }
    debug_assert!((&num % &den).is_zero());
    num / den
}

/// Splits `s = u X^alpha (1 + h)` where `u` is the `X^alpha` coefficient and
/// returns `(u, h)`; fails unless `u` is a unit and `h` has positive weight.
pub fn split_leading(ctx: &Ctx, s: &Ser, alpha: i64) -> Result<(BTreeMap<i64, u64>, Ser)> {
    let u = s.x_coeff(alpha);
    if u.is_empty() {
        return Err(Error::NonInvertibleLeadingTerm(format!("no X^{alpha} term")));
    }
    let ui = tpoly_inv(ctx, &u)?;
    let h = s.shift_x(ctx, -alpha).mul_tpoly(ctx, &ui).sub(ctx, &Ser::one(ctx));
    if !h.is_zero() && h.omega(ctx) <= 0 {
        return Err(Error::DivergentComposition(format!("non-leading part has weight {} ≤ 0", h.omega(ctx))));
    }
    Ok((u, h))
}

/// `s^m` for any integer `m`, where `s = u X^alpha (1 + h)`.
pub fn lead_pow(ctx: &Ctx, s: &Ser, alpha: i64, m: i64) -> Result<Ser> {
    if m >= 0 && s.omega(ctx) > 0 {
        return Ok(s.pow(ctx, m as u64));
    }
    let (u, h) = split_leading(ctx, s, alpha)?;
    let upow = if m >= 0 {
        let mut acc = BTreeMap::from([(0, 1)]);
        for _ in 0..m {
            acc = tpoly_mul(ctx, &acc, &u);
        }
        acc
    } else {
        let ui = tpoly_inv(ctx, &u)?;
        let mut acc = BTreeMap::from([(0, 1)]);
        for _ in 0..(-m) {
            acc = tpoly_mul(ctx, &acc, &ui);
        }
        acc
    };
    let mut sum = Ser::one(ctx);
    if !h.is_zero() {
        let wh = h.omega(ctx);
        let mut hk = Ser::one(ctx);
        let mut k = 0u64;
        loop {
            k += 1;
            if (k as i64) * wh >= ctx.wt - alpha * m.min(0) + ctx.kappa * ctx.n as i64 {
                break;
            }
            hk = hk.mul(ctx, &h);
            if hk.is_zero() {
                break;
            }
            let b = binom(m, k);
            if b.is_zero() {
                continue;
            }
            let c = ctx.from_bigint(&b);
            sum = sum.add(ctx, &hk.scale(ctx, c));
            sum.valid = sum.valid.min(hk.valid);
        }
        let tail = ((k as i64) * wh).min(h.valid);
        sum.valid = sum.valid.min(tail);
    }
    let mut r = sum.mul_tpoly(ctx, &upow).shift_x(ctx, alpha * m);
    r.valid = r.valid.min(ctx.wt);
    Ok(r)
}

/// Substitutes `inner` into `sum_e outer_e X^e`.
pub fn compose(ctx: &Ctx, outer: &Ser, inner: &Ser, alpha: i64) -> Result<Ser> {
    let mut exps: Vec<i64> = outer.terms.keys().map(|k| k.0).collect();
    exps.dedup();
    let mut r = Ser::zero(ctx);
    r.valid = outer.valid.min(ctx.wt);
    if exps.is_empty() {
        return Ok(r);
    }
    let w_inner = inner.omega(ctx);
    let positive_only = exps[0] >= 1 && w_inner > 0;
    // the unknown tail of the outer series limits the result to its own validity
    let mut cache: Option<(i64, Ser)> = None;
    for e in exps {
        let coeff = outer.x_coeff(e);
        let pw = if positive_only {
            let next = match cache.take() {
                Some((pe, ps)) if pe <= e => ps.mul(ctx, &inner.pow(ctx, (e - pe) as u64)),
                _ => inner.pow(ctx, e as u64),
            };
            cache = Some((e, next.clone()));
            next
        } else {
            lead_pow(ctx, inner, alpha, e)?
        };
        let term = pw.mul_tpoly(ctx, &coeff);
        r = r.add(ctx, &term);
    }
    Ok(r)
}

/// A bivariate polynomial with residues mod `p^N`, truncated at total degree `maxdeg`.
#[derive(Clone, Debug)]
pub struct Bivar {
    pub coeffs: BTreeMap<(u32, u32), u64>,
    pub maxdeg: u32,
}

/// `F(a, b) = sum F_ij a^i b^j`.
pub fn subst_bivar(ctx: &Ctx, f: &Bivar, a: &Ser, b: &Ser) -> Result<Ser> {
    let wa = a.omega(ctx);
    let wb = b.omega(ctx);
    let a_zero = a.is_zero();
    let b_zero = b.is_zero();
    if (!a_zero && wa <= 0) || (!b_zero && wb <= 0) {
        return Err(Error::DivergentComposition(format!(
            "group-law arguments have weights {wa}, {wb}; both must be positive"
        )));
    }
    let maxi = f.coeffs.keys().map(|k| k.0).max().unwrap_or(0);
    let maxj = f.coeffs.keys().map(|k| k.1).max().unwrap_or(0);
    let mut apow = vec![Ser::one(ctx)];
    for i in 1..=maxi {
        if (i as i64) * wa >= ctx.wt || a_zero {
            break;
        }
        let nxt = apow[i as usize - 1].mul(ctx, a);
        apow.push(nxt);
    }
    let mut bpow = vec![Ser::one(ctx)];
    for j in 1..=maxj {
        if (j as i64) * wb >= ctx.wt || b_zero {
            break;
        }
        let nxt = bpow[j as usize - 1].mul(ctx, b);
        bpow.push(nxt);
    }
    let mut rows: BTreeMap<u32, Ser> = BTreeMap::new();
    for (&(i, j), &c) in &f.coeffs {
        if (i as usize) >= apow.len() || (j as usize) >= bpow.len() {
            continue;
        }
        let row = rows.entry(i).or_insert_with(|| Ser::zero(ctx));
        *row = row.add(ctx, &bpow[j as usize].scale(ctx, c));
    }
    let mut r = Ser::zero(ctx);
    for (i, row) in rows {
        r = r.add(ctx, &apow[i as usize].mul(ctx, &row));
    }
    // monomials beyond the truncation degree
    let wmin = match (a_zero, b_zero) {
        (false, false) => wa.min(wb),
        (false, true) => wa,
        (true, false) => wb,
        (true, true) => ctx.wt,
    };
    let tail = (f.maxdeg as i64 + 1).saturating_mul(wmin);
    r.valid = r.valid.min(tail).min(a.valid).min(b.valid);
    // a and b themselves may be inexact: their errors propagate at least as a.valid/b.valid
    Ok(r)
}

/// Converts a signed big integer coefficient to a residue.
pub fn big_to_res(ctx: &Ctx, x: &BigInt) -> u64 {
    if x.is_negative() {
        ctx.from_bigint(x)
    } else {
        (x % BigInt::from(ctx.modulus)).to_u64().unwrap()
    }
}
