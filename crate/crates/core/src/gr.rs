//! Series pairs `(g, R)` satisfying the lifting equation
//! `F(g, [p] R(g, T)) = g(F(X, R([p]X, T^p)))`, their verification, a
//! level-by-level solver and the approximation comparison between pairs.
//!
//! Stored coefficients of a pair are treated as exact integers (their least
//! nonnegative representatives); the residual is measured on indices up to the
//! top of the window.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::engine::{self, Bivar, Ctx, Ser};
use crate::error::{Error, Result};
use crate::formal_group::{build_group_law, mul_p_ser, GroupLaw};
use crate::laurent::{SeriesJson, TLaurent};
use crate::padic::PadicScalar;
use crate::par::Exec;
use crate::xseries::{exponent, index_of, SeriesKind, XSeries};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GRPair {
    pub p: u64,
    pub prec: u32,
    pub window: (i64, i64),
    pub g: XSeries,
    pub r: XSeries,
}

/// Lower bound on `v(g_i)` for `i ≤ -1` (floors toward minus infinity).
pub fn g_bound(p: u64, i: i64) -> i64 {
    let p = p as i64;
    -i + 2 + i.div_euclid(p) + (i - 2).div_euclid(p)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// Minimum valuation of the residual over indices ≤ window top, capped at `eval_prec`.
    pub residual_valuation: i64,
    /// Digits used for the evaluation; a residual equal to it means "at least".
    pub eval_prec: u32,
    pub cond1: bool,
    pub cond2: bool,
    pub cond3: bool,
    pub window_adequate: bool,
    pub window: (i64, i64),
    /// First residual term of least valuation: (index, T-exponent, valuation).
    pub witness: Option<(i64, i64, i64)>,
}

impl ResidualReport {
    pub fn passes(&self, prec: u32) -> bool {
        self.cond1 && self.cond2 && self.cond3 && self.window_adequate && self.residual_valuation >= prec as i64
    }
}

impl GRPair {
    pub fn new(p: u64, prec: u32, window: (i64, i64), g: XSeries, r: XSeries) -> Result<Self> {
        if g.kind() != SeriesKind::TwoSided || r.kind() != SeriesKind::Nonneg {
            return Err(Error::InvalidInput("g must be two-sided and R nonneg".into()));
        }
        Ok(Self { p, prec, window, g, r })
    }

    /// Condition on the reductions: `g_0 ≡ 1`, `g_i ≡ 0` otherwise.
    pub fn cond1(&self) -> bool {
        let one = TLaurent::one(self.p, self.g.prec());
        self.g.entries().all(|(i, c)| {
            let d = if i == 0 { c.sub(&one) } else { c.clone() };
            d.is_zero() || d.valuation().is_some_and(|v| v >= 1)
        }) && !self.g.coeff(0).is_zero()
    }

    /// `R_0 = T`.
    pub fn cond2(&self) -> bool {
        self.r.coeff(0) == TLaurent::t_pow(self.p, 1, self.r.prec())
    }

    /// Valuation bounds on the negative-index coefficients of `g`.
    pub fn cond3(&self) -> bool {
        self.g.entries().filter(|(i, _)| *i <= -1).all(|(i, c)| c.valuation().is_none_or(|v| v >= g_bound(self.p, i)))
    }

    pub fn to_json(&self) -> PairJson {
        PairJson {
            p: self.p,
            prec: self.prec,
            window: [self.window.0, self.window.1],
            g: self.g.to_json(),
            r: self.r.to_json(),
        }
    }

    pub fn from_json(j: &PairJson) -> Result<Self> {
        Self::new(j.p, j.prec, (j.window[0], j.window[1]), XSeries::from_json(&j.g)?, XSeries::from_json(&j.r)?)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairJson {
    pub p: u64,
    pub prec: u32,
    pub window: [i64; 2],
    pub g: SeriesJson,
    #[serde(rename = "R")]
    pub r: SeriesJson,
}

fn scalar(p: u64, num: i64, den: i64, prec: u32) -> PadicScalar {
    PadicScalar::from_ratio(p, num, den, prec).expect("denominator prime to p")
}

/// The explicit pair valid modulo `p^2`, on window `[-3, 2]`.
pub fn builtin_gr_p2(p: u64) -> GRPair {
    builtin_gr_p2_window(p, (-3, 2))
}

pub fn builtin_gr_p2_window(p: u64, window: (i64, i64)) -> GRPair {
    builtin_gr_p2_with(p, window, 2)
}

/// The built-in pair with its rational coefficients carried to `prec` digits.
pub fn builtin_gr_p2_with(p: u64, window: (i64, i64), prec: u32) -> GRPair {
    let pi = p as i64;
    let half_p = |sign: i64| scalar(p, sign * pi, 2, prec);
    // p (T^{1-p} - 1) / 2
    let g_m1 = TLaurent::from_terms(p, prec as i64, [(1 - pi, half_p(1)), (0, half_p(-1))]);
    // 1 + p (T^{1-p} - 1)(1 - T^p) / 2 = 1 + p (T^{1-p} - T - 1 + T^p) / 2
    let g_0 = TLaurent::from_terms(
        p,
        prec as i64,
        [(0, PadicScalar::one(p, prec)), (1 - pi, half_p(1)), (1, half_p(-1)), (0, half_p(-1)), (pi, half_p(1))],
    );
    let g = XSeries::from_entries(p, prec as i64, SeriesKind::TwoSided, window, [(-1, g_m1), (0, g_0)])
        .expect("window contains -1 and 0");
    let r = XSeries::from_entries(
        p,
        prec as i64,
        SeriesKind::Nonneg,
        (0, window.1.max(0)),
        [(0, TLaurent::t_pow(p, 1, prec as i64))],
    )
    .unwrap();
    GRPair { p, prec, window, g, r }
}

/// A group law of sufficient degree and precision for pairs on `window` at `prec`.
pub fn law_for(p: u64, prec: u32, window: (i64, i64)) -> Result<GroupLaw> {
    let pi = p as i64;
    let need = exponent(p, window.1) + pi * prec as i64 + (pi - 1) * (-window.0).max(0) + 1 + pi;
    let maxdeg = need.max(pi) as u32;
    build_group_law(p, maxdeg, prec + 1)
}

// ---- evaluation of the lifting equation ----

fn exact_ser(ctx: &Ctx, s: &XSeries) -> Ser {
    let mut out = Ser::zero(ctx);
    for (i, c) in s.entries() {
        let e = exponent(s.p(), i);
        for (t, x) in c.terms() {
            let abs = x.abs_prec().max(0) as u32;
            let r = x.lift_mod(abs).unwrap_or_default() % BigUint::from(ctx.modulus);
            out.add_term(ctx, e, t, u64::try_from(r).unwrap());
        }
    }
    out
}

fn deriv_bivar(ctx: &Ctx, f: &Bivar, first: bool) -> Bivar {
    let mut coeffs = BTreeMap::new();
    for (&(i, j), &c) in &f.coeffs {
        let (k, key) = if first { (i, (i.wrapping_sub(1), j)) } else { (j, (i, j.wrapping_sub(1))) };
        if k == 0 {
            continue;
        }
        let v = ctx.mulmod(c, k as u64 % ctx.modulus);
        if v != 0 {
            coeffs.insert(key, v);
        }
    }
    Bivar { coeffs, maxdeg: f.maxdeg.saturating_sub(1) }
}

/// Intermediate series of one evaluation.
struct Eq4 {
    ctx: Ctx,
    e: Ser,
    g: Ser,
    r: Ser,
    rg: Ser,
    pp: Ser,
    w: Ser,
    z: Ser,
    px: Ser,
    f: Bivar,
}

fn eval_eq4(pair: &GRPair, law: &GroupLaw, n: u32, margin: i64) -> Result<Eq4> {
    let p = pair.p;
    if law.prec < n {
        return Err(Error::PrecisionExhausted(format!("group law known to {} digits, {} needed", law.prec, n)));
    }
    let kappa = XSeries::kappa_for(&[&pair.g, &pair.r])?.max(1);
    let wt = exponent(p, pair.window.1) + kappa * (n as i64 - 1) + 1 + margin;
    let ctx = Ctx::new(p, n, kappa, wt)?;
    let f = law.f.residues(&ctx)?;
    let g = exact_ser(&ctx, &pair.g);
    let r = exact_ser(&ctx, &pair.r);
    let rg = engine::compose(&ctx, &r, &g, 1)?;
    let pp = mul_p_ser(&ctx, &rg)?;
    let lhs = engine::subst_bivar(&ctx, &f, &g, &pp)?;
    let x = Ser::x(&ctx);
    let px = mul_p_ser(&ctx, &x)?;
    let w = engine::compose(&ctx, &r.scale_t(p as i64), &px, 1)?;
    let z = engine::subst_bivar(&ctx, &f, &x, &w)?;
    let rhs = engine::compose(&ctx, &g, &z, 1)?;
    let e = lhs.sub(&ctx, &rhs);
    Ok(Eq4 { ctx, e, g, r, rg, pp, w, z, px, f })
}

/// Evaluates with growing margins until the window is determined.
fn eval_adequate(pair: &GRPair, law: &GroupLaw, n: u32) -> Result<(Eq4, bool)> {
    let p = pair.p as i64;
    let e_hi = exponent(pair.p, pair.window.1);
    let mut margin = (p - 1) * (-pair.window.0).max(0) + p;
    let mut last = None;
    for _ in 0..3 {
        let ev = eval_eq4(pair, law, n, margin)?;
        if ev.e.known_upto(&ev.ctx, e_hi) {
            return Ok((ev, true));
        }
        margin += 2 * ev.ctx.kappa;
        last = Some(ev);
    }
    Ok((last.unwrap(), false))
}

fn residual_of(ev: &Eq4, e_hi: i64) -> (i64, Option<(i64, i64, i64)>) {
    let mut best = ev.ctx.n as i64;
    let mut wit = None;
    for (&(e, t), &c) in &ev.e.terms {
        if e > e_hi {
            continue;
        }
        let v = ev.ctx.val(c) as i64;
        if v < best {
            best = v;
            wit = Some((index_of(ev.ctx.p, e).unwrap_or(i64::MIN), t, v));
        }
    }
    (best, wit)
}

/// Checks the lifting equation and the three coefficient conditions.
pub fn verify_gr(pair: &GRPair, law: &GroupLaw) -> Result<ResidualReport> {
    let n = (pair.prec + 1).min(Ctx::max_prec(pair.p)).min(law.prec);
    let (ev, adequate) = eval_adequate(pair, law, n)?;
    let e_hi = exponent(pair.p, pair.window.1);
    let (res, wit) = residual_of(&ev, e_hi);
    Ok(ResidualReport {
        residual_valuation: res,
        eval_prec: n,
        cond1: pair.cond1(),
        cond2: pair.cond2(),
        cond3: pair.cond3(),
        window_adequate: adequate,
        window: pair.window,
        witness: wit,
    })
}

// ---- solver ----

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Kind {
    R,
    RDeferred,
    G,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Unknown {
    kind: Kind,
    i: i64,
    t: i64,
}

impl Unknown {
    fn key(&self) -> (i64, i64, Kind, i64, i64) {
        (self.i.abs(), self.t.abs(), self.kind, self.i, self.t)
    }
}

/// Linear parts of the residual with respect to single-coefficient corrections.
struct Columns {
    g_base: BTreeMap<i64, Ser>,
    r_base: BTreeMap<i64, (Ser, Ser)>,
}

fn build_columns(ev: &Eq4, g_idx: &[i64], r_idx: &[i64], exec: Exec) -> Result<Columns> {
    let ctx = &ev.ctx;
    let p = ctx.p;
    let d1 = deriv_bivar(ctx, &ev.f, true);
    let d2 = deriv_bivar(ctx, &ev.f, false);
    let a1 = engine::subst_bivar(ctx, &d1, &ev.g, &ev.pp)?;
    let a2 = engine::subst_bivar(ctx, &d2, &ev.g, &ev.pp)?;
    // [p]'(Y) = p + p Y^{p-1}
    let rg_pm1 = engine::lead_pow(ctx, &ev.rg, 1, p as i64 - 1)?;
    let pprime = rg_pm1.scale(ctx, p).add(ctx, &Ser::one(ctx).scale(ctx, p));
    let g1 = a2.mul(ctx, &pprime);
    let rx = ev.r.deriv_x(ctx);
    let rx_g = engine::compose(ctx, &rx, &ev.g, 1)?;
    let h = a1.add(ctx, &g1.mul(ctx, &rx_g));
    let g_ser = &ev.g;
    let gx = g_ser.deriv_x(ctx);
    let gx_z = engine::compose(ctx, &gx, &ev.z, 1)?;
    let x = Ser::x(ctx);
    let fx2 = engine::subst_bivar(ctx, &d2, &x, &ev.w)?;
    let g2 = gx_z.mul(ctx, &fx2);

    let g_cols: Vec<Result<(i64, Ser)>> = exec.map(g_idx, |&i| {
        let e = exponent(p, i);
        let ze = engine::lead_pow(ctx, &ev.z, 1, e)?;
        Ok((i, h.shift_x(ctx, e).sub(ctx, &ze)))
    });
    let r_cols: Vec<Result<(i64, (Ser, Ser))>> = exec.map(r_idx, |&i| {
        let e = exponent(p, i);
        let ge = engine::lead_pow(ctx, g_ser, 1, e)?;
        let pxe = engine::lead_pow(ctx, &ev.px, 1, e)?;
        Ok((i, (g1.mul(ctx, &ge), g2.mul(ctx, &pxe))))
    });
    let mut g_base = BTreeMap::new();
    for c in g_cols {
        let (i, s) = c?;
        g_base.insert(i, s);
    }
    let mut r_base = BTreeMap::new();
    for c in r_cols {
        let (i, s) = c?;
        r_base.insert(i, s);
    }
    Ok(Columns { g_base, r_base })
}

/// Rows (restricted to the window) of one unknown's column, divided by `p^shift`, mod p.
fn column_rows(ctx: &Ctx, cols: &Columns, u: &Unknown, e_hi: i64, divide: u32) -> Option<BTreeMap<(i64, i64), u64>> {
    let p = ctx.p;
    let mut out = BTreeMap::new();
    let mut push = |s: &Ser, tshift: i64, sign: bool| -> bool {
        for (&(e, t), &c) in &s.terms {
            if e > e_hi {
                continue;
            }
            let c = if sign { ctx.negmod(c) } else { c };
            let entry = out.entry((e, t + tshift)).or_insert(0u64);
            *entry = ctx.addmod(*entry, c);
        }
        true
    };
    match u.kind {
        Kind::G => {
            push(&cols.g_base[&u.i], u.t, false);
        }
        Kind::R | Kind::RDeferred => {
            let (a, b) = &cols.r_base[&u.i];
            push(a, u.t, false);
            push(b, u.t * p as i64, true);
        }
    }
    let pd = ctx.ppow(divide);
    let mut rows = BTreeMap::new();
    for (k, c) in out {
        if c % pd != 0 {
            return None;
        }
        let r = (c / pd) % p;
        if r != 0 {
            rows.insert(k, r);
        }
    }
    Some(rows)
}

/// Row-reduces `[A | b]` over F_p with columns in the given order; free
/// variables are set to zero. Returns `None` if inconsistent.
fn solve_fp(p: u64, cols: &[BTreeMap<(i64, i64), u64>], rhs: &BTreeMap<(i64, i64), u64>) -> Option<Vec<u64>> {
    let mut keys: Vec<(i64, i64)> = rhs.keys().copied().collect();
    for c in cols {
        keys.extend(c.keys().copied());
    }
    keys.sort();
    keys.dedup();
    let idx: BTreeMap<(i64, i64), usize> = keys.iter().enumerate().map(|(n, k)| (*k, n)).collect();
    let nc = cols.len();
    let mut a = vec![vec![0u64; nc + 1]; keys.len()];
    for (j, c) in cols.iter().enumerate() {
        for (k, &v) in c {
            a[idx[k]][j] = v;
        }
    }
    for (k, &v) in rhs {
        a[idx[k]][nc] = (p - v % p) % p;
    }
    let inv = |x: u64| -> u64 {
        let mut r = 1u64;
        let mut b = x % p;
        let mut e = p - 2;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        r
    };
    let mut pivots = Vec::new();
    let mut row = 0;
    for c in 0..nc {
        let Some(pr) = (row..a.len()).find(|&x| a[x][c] != 0) else { continue };
        a.swap(row, pr);
        let iv = inv(a[row][c]);
        for v in a[row].iter_mut() {
            *v = *v * iv % p;
        }
        let pivot_row = a[row].clone();
        for (x, r) in a.iter_mut().enumerate() {
            if x != row && r[c] != 0 {
                let f = r[c];
                for (v, pv) in r.iter_mut().zip(&pivot_row) {
                    *v = (*v + p * p - f * pv) % p;
                }
            }
        }
        pivots.push(c);
        row += 1;
        if row == a.len() {
            break;
        }
    }
    if a[row..].iter().any(|r| r[nc] != 0) {
        return None;
    }
    let mut sol = vec![0u64; nc];
    for (r, &c) in pivots.iter().enumerate() {
        sol[c] = a[r][nc];
    }
    Some(sol)
}

fn add_to(s: &XSeries, i: i64, t: i64, c: &PadicScalar) -> Result<XSeries> {
    let p = s.p();
    let prec = s.prec();
    let mut entries: BTreeMap<i64, TLaurent> = s.entries().map(|(i, c)| (i, c.clone())).collect();
    let cur = entries.remove(&i).unwrap_or_else(|| TLaurent::zero(p, prec));
    entries.insert(i, cur.add(&TLaurent::monomial(c.clone(), t, prec)));
    XSeries::from_entries(p, prec, s.kind(), s.window(), entries)
}

/// Options of the lifting solver.
#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// How far below the lowest residual T-exponent corrections may reach.
    pub t_margin_low: i64,
    pub t_margin_high: i64,
    pub exec: Exec,
}

impl SolveOptions {
    pub fn for_prime(p: u64) -> Self {
        Self { t_margin_low: (p * p) as i64, t_margin_high: 0, exec: Exec::default() }
    }
}

/// Lifts `(X, TX)` level by level to a pair satisfying the equation modulo `p^prec`.
pub fn solve_gr(p: u64, prec: u32, window: (i64, i64), law: &GroupLaw) -> Result<GRPair> {
    solve_gr_with(p, prec, window, law, SolveOptions::for_prime(p))
}

pub fn solve_gr_with(p: u64, prec: u32, window: (i64, i64), law: &GroupLaw, opts: SolveOptions) -> Result<GRPair> {
    if prec < 1 {
        return Err(Error::InvalidInput("precision must be at least 1".into()));
    }
    if window.0 > 0 || window.1 < 0 {
        return Err(Error::WindowTooSmall(format!("window {window:?} must contain 0")));
    }
    let pi = prec as i64;
    let g = XSeries::from_entries(p, pi, SeriesKind::TwoSided, window, [(0, TLaurent::one(p, pi))])?;
    let r = XSeries::from_entries(p, pi, SeriesKind::Nonneg, (0, window.1), [(0, TLaurent::t_pow(p, 1, pi))])?;
    let mut pair = GRPair { p, prec, window, g, r };
    let e_hi = exponent(p, window.1);

    for m in 1..prec {
        let n = m + 1;
        let (ev, adequate) = eval_adequate(&pair, law, n)?;
        if !adequate {
            return Err(Error::WindowTooSmall(format!(
                "residual not determined through index {} at level {m} (group law degree {})",
                window.1, law.maxdeg
            )));
        }
        let (res, wit) = residual_of(&ev, e_hi);
        if res < m as i64 {
            return Err(Error::LiftObstruction {
                level: m,
                detail: format!("residual valuation {res} below {m} at {wit:?}"),
            });
        }
        let pm = ev.ctx.ppow(m);
        let rhs: BTreeMap<(i64, i64), u64> =
            ev.e.terms
                .iter()
                .filter(|(&(e, _), _)| e <= e_hi)
                .map(|(&k, &c)| (k, (c / pm) % p))
                .filter(|(_, c)| *c != 0)
                .collect();
        if rhs.is_empty() {
            continue;
        }
        let tlo = rhs.keys().map(|k| k.1).min().unwrap() - opts.t_margin_low;
        let thi = rhs.keys().map(|k| k.1).max().unwrap() + opts.t_margin_high;
        let g_idx: Vec<i64> = (window.0..=window.1).filter(|&i| i >= 0 || g_bound(p, i) <= m as i64).collect();
        let r_idx: Vec<i64> = (1..=window.1).collect();
        let cols = build_columns(&ev, &g_idx, &r_idx, opts.exec)?;
        let mut unknowns = Vec::new();
        for &i in &g_idx {
            for t in tlo..=thi {
                unknowns.push(Unknown { kind: Kind::G, i, t });
            }
        }
        for &i in &r_idx {
            for t in tlo..=thi {
                unknowns.push(Unknown { kind: Kind::R, i, t });
                if m >= 2 {
                    unknowns.push(Unknown { kind: Kind::RDeferred, i, t });
                }
            }
        }
        unknowns.sort_by_key(|u| u.key());
        let rows: Vec<Option<BTreeMap<(i64, i64), u64>>> = opts.exec.map(&unknowns, |u| {
            let divide = u32::from(u.kind == Kind::RDeferred);
            column_rows(&ev.ctx, &cols, u, e_hi, divide)
        });
        let (unknowns, rows): (Vec<Unknown>, Vec<_>) =
            unknowns.into_iter().zip(rows).filter_map(|(u, r)| r.map(|r| (u, r))).unzip();
        let sol = solve_fp(p, &rows, &rhs).ok_or_else(|| Error::LiftObstruction {
            level: m,
            detail: format!(
                "linear system inconsistent on window {window:?} ({} unknowns, {} residual terms)",
                rows.len(),
                rhs.len()
            ),
        })?;
        for (u, &v) in unknowns.iter().zip(&sol) {
            if v == 0 {
                continue;
            }
            let shift = if u.kind == Kind::RDeferred { m - 1 } else { m };
            let c = PadicScalar::from_int(p, v as i64, prec).mul(&PadicScalar::p_power(p, shift as i64, prec));
            match u.kind {
                Kind::G => pair.g = add_to(&pair.g, u.i, u.t, &c)?,
                _ => pair.r = add_to(&pair.r, u.i, u.t, &c)?,
            }
        }
    }
    let (ev, _) = eval_adequate(&pair, law, prec.min(law.prec))?;
    let (res, wit) = residual_of(&ev, e_hi);
    if res < prec as i64 {
        return Err(Error::LiftObstruction {
            level: prec - 1,
            detail: format!("final residual valuation {res} below {prec} at {wit:?}"),
        });
    }
    Ok(pair)
}

// ---- approximation comparison ----

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Equivalence {
    Strict,
    NonStrict,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivReport {
    pub verdict: Equivalence,
    /// Indices where both coefficients agree as stored but the bound exceeds
    /// the available precision (counted as satisfied).
    pub flagged: Vec<(String, i64)>,
    /// First index failing the non-strict test, if any.
    pub failure: Option<(String, i64)>,
}

/// `n + max_{1≤j≤n-1} (-j - i p^{-j} + p^{-1} + ... + p^{-j})`, or `None` for `n = 1`.
pub fn g_diff_bound(p: u64, n: u32, i: i64) -> Option<Ratio<i64>> {
    let p = p as i64;
    let mut best: Option<Ratio<i64>> = None;
    for j in 1..n as i64 {
        let pj = p.pow(j as u32);
        let mut s = Ratio::new(-j, 1) - Ratio::new(i, pj);
        for k in 1..=j {
            s += Ratio::new(1, p.pow(k as u32));
        }
        best = Some(best.map_or(s, |b: Ratio<i64>| b.max(s)));
    }
    best.map(|b| b + Ratio::from_integer(n as i64))
}

enum Cmp {
    Strict,
    NonStrict,
    Fail,
    Flag,
}

fn compare(a: &TLaurent, b: &TLaurent, bound: Ratio<i64>, prec: i64, index: i64) -> Result<Cmp> {
    let a = a.truncate(prec);
    let b = b.truncate(prec);
    let d = a.sub(&b);
    if d.is_zero() {
        if a == b && Ratio::from_integer(prec) <= bound {
            return Ok(Cmp::Flag);
        }
        if Ratio::from_integer(prec) > bound {
            return Ok(Cmp::Strict);
        }
        return Err(Error::IncomparablePrecision { index, needed: bound.floor().to_integer() + 1, have: prec });
    }
    let v = Ratio::from_integer(d.valuation().unwrap());
    Ok(if v > bound {
        Cmp::Strict
    } else if v >= bound {
        Cmp::NonStrict
    } else {
        Cmp::Fail
    })
}

/// Compares two pairs through the approximation inequalities for level `n`.
pub fn approx_equiv_check(reference: &GRPair, cand: &GRPair, n: u32) -> Result<EquivReport> {
    if reference.p != cand.p {
        return Err(Error::InvalidInput("pairs over different primes".into()));
    }
    let p = reference.p;
    let prec = reference.prec.min(cand.prec) as i64;
    let mut strict = true;
    let mut flagged = Vec::new();
    let mut failure = None;
    let lo = reference.g.window().0.min(cand.g.window().0);
    let hi = reference.g.window().1.max(cand.g.window().1);
    let mut visit = |name: &str, i: i64, a: TLaurent, b: TLaurent, bound: Ratio<i64>| -> Result<()> {
        match compare(&a, &b, bound, prec, i)? {
            Cmp::Strict => {}
            Cmp::NonStrict => strict = false,
            Cmp::Flag => flagged.push((name.to_string(), i)),
            Cmp::Fail => {
                if failure.is_none() {
                    failure = Some((name.to_string(), i));
                }
            }
        }
        Ok(())
    };
    if g_diff_bound(p, n, 0).is_some() {
        for i in lo..=hi {
            let b = g_diff_bound(p, n, i).unwrap();
            visit("g", i, reference.g.coeff(i), cand.g.coeff(i), b)?;
        }
    }
    let rhi = reference.r.window().1.max(cand.r.window().1);
    for i in 0..=rhi {
        let b = Ratio::from_integer(n as i64 - i);
        visit("R", i, reference.r.coeff(i), cand.r.coeff(i), b)?;
    }
    let verdict = if failure.is_some() {
        Equivalence::Fail
    } else if strict {
        Equivalence::Strict
    } else {
        Equivalence::NonStrict
    };
    Ok(EquivReport { verdict, flagged, failure })
}
