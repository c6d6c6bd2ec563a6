//! Towers of Artin–Schreier extensions `beta_j^p - beta_j = c_j` over the
//! p-adic numbers.
//!
//! An element of level `j` is a coefficient vector over the monomials
//! `beta_1^{a_1} ... beta_j^{a_j}` (`0 ≤ a_k < p`) stored flat at index
//! `a_1 + p a_2 + ... + p^{j-1} a_j`. Once the generator valuations are
//! certified, the monomials have pairwise distinct valuations modulo `Z`, so the
//! valuation of an element is the minimum over its terms.

use std::collections::HashMap;

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gr::GRPair;
use crate::laurent::TLaurent;
use crate::padic::{PadicScalar, ScalarJson, INF};
use crate::xseries::{exponent, SeriesKind, XSeries};

pub type Q = Ratio<i64>;

/// Relative precision given to exactly known units (generators, 1, p^k).
const EXACT_PREC: u32 = 128;

#[derive(Clone, PartialEq, Eq)]
pub struct TowerElement {
    pub level: usize,
    pub coeffs: Vec<PadicScalar>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    SolvedGr,
    BuiltinP2,
    ExplicitP2,
    Custom,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalConvention {
    #[default]
    Direct,
    Inverse,
}

#[derive(Clone, Debug)]
pub struct TowerSpec {
    pub p: u64,
    pub n: usize,
    pub d: PadicScalar,
    /// `c_j` as an element of level `j - 1`.
    pub rhs: Vec<TowerElement>,
    pub source: Source,
    pub eval_convention: EvalConvention,
    pub prec: u32,
}

/// Newton-polygon certificate of one level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelCert {
    pub level: usize,
    /// Valuation of `c_j`, from the norm at level `j - 1`.
    pub v_rhs: String,
    /// Slope of the single Newton segment (the root valuation).
    pub slope: String,
    pub denominator: i64,
    pub single_segment: bool,
    /// Valuation of `beta_j` from the norm at level `j`.
    pub v_beta: String,
}

#[derive(Clone, Debug)]
pub struct Tower {
    pub p: u64,
    pub n: usize,
    pub prec: u32,
    pub c: Vec<TowerElement>,
    pub spec: TowerSpec,
    vbeta: Vec<Q>,
    /// Valuation of each basis monomial at level `n`.
    basis_val: Vec<Q>,
    /// Fractional part (as numerator over `p^n`) to basis index.
    frac_index: HashMap<i64, usize>,
    pub certs: Vec<LevelCert>,
}

fn qfmt(q: &Q) -> String {
    if *q.denom() == 1 {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl TowerElement {
    pub fn zero(p: u64, level: usize) -> Self {
        Self { level, coeffs: vec![PadicScalar::zero(p); (p as usize).pow(level as u32)] }
    }

    pub fn scalar(c: PadicScalar, level: usize) -> Self {
        let mut x = Self::zero(c.p(), level);
        x.coeffs[0] = c;
        x
    }

    pub fn p(&self) -> u64 {
        self.coeffs[0].p()
    }

    /// The generator `beta_j` as an element of level `level`.
    pub fn generator(p: u64, j: usize, level: usize) -> Self {
        let mut x = Self::zero(p, level);
        x.coeffs[(p as usize).pow(j as u32 - 1)] = PadicScalar::one(p, EXACT_PREC);
        x
    }

    /// Monomial `c * beta^a` with exponent tuple given by flat index.
    pub fn monomial(c: PadicScalar, index: usize, level: usize) -> Self {
        let mut x = Self::zero(c.p(), level);
        x.coeffs[index] = c;
        x
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Same element viewed at a higher level.
    pub fn lift_to(&self, level: usize) -> Self {
        assert!(level >= self.level);
        let mut x = Self::zero(self.p(), level);
        x.coeffs[..self.coeffs.len()].clone_from_slice(&self.coeffs);
        x
    }

    pub fn add(&self, o: &Self) -> Self {
        let (a, b) = self.align(o);
        Self { level: a.level, coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x.add(y)).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let (a, b) = self.align(o);
        Self { level: a.level, coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x.sub(y)).collect() }
    }

    pub fn neg(&self) -> Self {
        Self { level: self.level, coeffs: self.coeffs.iter().map(|x| x.neg()).collect() }
    }

    pub fn scale(&self, c: &PadicScalar) -> Self {
        Self {
            level: self.level,
            coeffs: self.coeffs.iter().map(|x| if x.is_exact_zero() { x.clone() } else { x.mul(c) }).collect(),
        }
    }

    fn align(&self, o: &Self) -> (Self, Self) {
        let l = self.level.max(o.level);
        (self.lift_to(l), o.lift_to(l))
    }

    /// Exponent tuple of a flat index.
    pub fn exps(p: u64, level: usize, mut index: usize) -> Vec<usize> {
        let mut v = Vec::with_capacity(level);
        for _ in 0..level {
            v.push(index % p as usize);
            index /= p as usize;
        }
        v
    }

    /// Drops trailing-level structure when the element lies in a lower level.
    pub fn lowest_level(&self) -> usize {
        let p = self.p() as usize;
        let mut l = self.level;
        while l > 0 {
            let m = p.pow(l as u32 - 1);
            if self.coeffs[m..].iter().all(|c| c.is_exact_zero()) {
                l -= 1;
            } else {
                break;
            }
        }
        l
    }

    pub fn truncate_to(&self, level: usize) -> Self {
        let p = self.p() as usize;
        Self { level, coeffs: self.coeffs[..p.pow(level as u32)].to_vec() }
    }

    pub fn to_json(&self) -> ElementJson {
        let p = self.p();
        ElementJson {
            level: self.level,
            terms: self
                .coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| TermJson { exp: Self::exps(p, self.level, i), c: c.into() })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermJson {
    pub exp: Vec<usize>,
    pub c: ScalarJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ElementJson {
    pub level: usize,
    pub terms: Vec<TermJson>,
}

impl std::fmt::Debug for TowerElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let p = self.p();
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| format!("{c}*b{:?}", Self::exps(p, self.level, i)))
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Valuation information of an element: the certified valuation if some term
/// is significant, and the valuation bound below which it is known.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ValInfo {
    pub value: Option<Q>,
    pub known_below: Q,
}

fn big() -> Q {
    Q::from_integer(INF)
}

impl Tower {
    fn bare(spec: &TowerSpec) -> Self {
        Self {
            p: spec.p,
            n: 0,
            prec: spec.prec,
            c: Vec::new(),
            spec: spec.clone(),
            vbeta: Vec::new(),
            basis_val: vec![Q::from_integer(0)],
            frac_index: HashMap::from([(0, 0)]),
            certs: Vec::new(),
        }
    }

    pub fn vbeta(&self) -> &[Q] {
        &self.vbeta
    }

    pub fn dim(&self, level: usize) -> usize {
        (self.p as usize).pow(level as u32)
    }

    pub fn generator(&self, j: usize) -> TowerElement {
        TowerElement::generator(self.p, j, self.n)
    }

    pub fn one(&self) -> TowerElement {
        TowerElement::scalar(PadicScalar::one(self.p, EXACT_PREC), self.n)
    }

    pub fn scalar(&self, c: PadicScalar) -> TowerElement {
        TowerElement::scalar(c, self.n)
    }

    // ---- multiplication ----

    pub fn mul(&self, a: &TowerElement, b: &TowerElement) -> TowerElement {
        let (a, b) = a.align(b);
        let level = a.level;
        TowerElement { level, coeffs: self.mul_rec(level, &a.coeffs, &b.coeffs) }
    }

    fn mul_rec(&self, j: usize, a: &[PadicScalar], b: &[PadicScalar]) -> Vec<PadicScalar> {
        let p = self.p as usize;
        if j == 0 {
            if a[0].is_exact_zero() || b[0].is_exact_zero() {
                return vec![PadicScalar::zero(self.p)];
            }
            return vec![a[0].mul(&b[0])];
        }
        let m = p.pow(j as u32 - 1);
        let nz = |v: &[PadicScalar]| v.iter().any(|c| !c.is_exact_zero());
        let mut z: Vec<Vec<PadicScalar>> = vec![vec![PadicScalar::zero(self.p); m]; 2 * p - 1];
        for k1 in 0..p {
            let ak = &a[k1 * m..(k1 + 1) * m];
            if !nz(ak) {
                continue;
            }
            for k2 in 0..p {
                let bk = &b[k2 * m..(k2 + 1) * m];
                if !nz(bk) {
                    continue;
                }
                let prod = self.mul_rec(j - 1, ak, bk);
                add_into(&mut z[k1 + k2], &prod);
            }
        }
        let cj = &self.c[j - 1].coeffs;
        for k in (p..=2 * p - 2).rev() {
            let zk = std::mem::replace(&mut z[k], vec![PadicScalar::zero(self.p); m]);
            if !nz(&zk) {
                continue;
            }
            add_into(&mut z[k - p + 1], &zk);
            let t = self.mul_rec(j - 1, &zk, &cj[..m]);
            add_into(&mut z[k - p], &t);
        }
        z.truncate(p);
        z.concat()
    }

    pub fn square(&self, a: &TowerElement) -> TowerElement {
        self.mul(a, a)
    }

    pub fn pow(&self, a: &TowerElement, k: i64) -> Result<TowerElement> {
        if k < 0 {
            let inv = self.inv(a)?;
            return self.pow(&inv, -k);
        }
        let mut acc = self.one().truncate_to(a.level);
        let mut base = a.clone();
        let mut k = k as u64;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.mul(&base, &base);
            }
        }
        Ok(acc)
    }

    /// Matrix of multiplication by `x` on the basis of its level (column `k` is `x * beta^k`).
    pub fn mul_matrix(&self, x: &TowerElement) -> Vec<Vec<PadicScalar>> {
        let d = self.dim(x.level);
        let mut cols = Vec::with_capacity(d);
        for k in 0..d {
            let b = TowerElement::monomial(PadicScalar::one(self.p, EXACT_PREC), k, x.level);
            cols.push(self.mul(x, &b).coeffs);
        }
        // row-major
        (0..d).map(|r| (0..d).map(|c| cols[c][r].clone()).collect()).collect()
    }

    pub fn inv(&self, x: &TowerElement) -> Result<TowerElement> {
        let m = self.mul_matrix(x);
        let d = m.len();
        let mut rhs = vec![PadicScalar::zero(self.p); d];
        rhs[0] = PadicScalar::one(self.p, EXACT_PREC);
        let sol = solve_linear(m, rhs)?;
        Ok(TowerElement { level: x.level, coeffs: sol })
    }

    pub fn div(&self, a: &TowerElement, b: &TowerElement) -> Result<TowerElement> {
        let l = a.level.max(b.level);
        let m = self.mul_matrix(&b.lift_to(l));
        let sol = solve_linear(m, a.lift_to(l).coeffs)?;
        Ok(TowerElement { level: l, coeffs: sol })
    }

    /// Determinant of the multiplication matrix (the norm down to the base).
    pub fn norm(&self, x: &TowerElement) -> Result<PadicScalar> {
        determinant(self.mul_matrix(x))
    }

    /// Valuation through the norm: `v(det M_x) / p^level`.
    pub fn tower_valuation(&self, x: &TowerElement) -> Result<Q> {
        let det = self.norm(x)?;
        let v = det.valuation().ok_or_else(|| Error::PrecisionExhausted("norm has no significant digits".into()))?;
        Ok(Q::new(v, (self.p as i64).pow(x.level as u32)))
    }

    /// Valuation from the basis expansion (valid once generator valuations are certified).
    pub fn val_info(&self, x: &TowerElement) -> ValInfo {
        let mut value: Option<Q> = None;
        let mut known = big();
        for (k, c) in x.coeffs.iter().enumerate() {
            if c.is_exact_zero() {
                continue;
            }
            let bv = self.basis_val[k];
            match c.valuation() {
                Some(v) => {
                    let w = Q::from_integer(v) + bv;
                    value = Some(value.map_or(w, |u: Q| u.min(w)));
                    known = known.min(Q::from_integer(c.abs_prec()) + bv);
                }
                None => known = known.min(Q::from_integer(c.abs_prec()) + bv),
            }
        }
        match value {
            Some(v) if v < known => ValInfo { value: Some(v), known_below: known },
            _ => ValInfo { value: None, known_below: known },
        }
    }

    /// Certified valuation, or a precision error.
    pub fn valuation(&self, x: &TowerElement) -> Result<Q> {
        self.val_info(x).value.ok_or_else(|| {
            Error::PrecisionExhausted(format!(
                "element is zero below valuation {}",
                qfmt(&self.val_info(x).known_below)
            ))
        })
    }

    /// Lower bound on the valuation (exact valuation if significant).
    pub fn val_lower(&self, x: &TowerElement) -> Q {
        let vi = self.val_info(x);
        vi.value.unwrap_or(vi.known_below)
    }

    /// A monomial `p^e beta^a` of valuation `s`, if `s` is in the value group.
    pub fn uniformizer_power(&self, s: Q) -> Option<TowerElement> {
        let pn = (self.p as i64).pow(self.n as u32);
        let scaled = s * Q::from_integer(pn);
        if !scaled.is_integer() {
            return None;
        }
        let frac = scaled.to_integer().mod_floor(&pn);
        let &k = self.frac_index.get(&frac)?;
        let e = s - self.basis_val[k];
        debug_assert!(e.is_integer());
        Some(TowerElement::monomial(PadicScalar::p_power(self.p, e.to_integer(), EXACT_PREC), k, self.n))
    }

    /// Residue in F_p of `x / m` where `m` is the monomial of valuation `v(x)`.
    pub fn angular_residue(&self, x: &TowerElement) -> Option<(Q, u64)> {
        let v = self.val_info(x).value?;
        let x = x.lift_to(self.n);
        for (k, c) in x.coeffs.iter().enumerate() {
            if let Some(cv) = c.valuation() {
                if Q::from_integer(cv) + self.basis_val[k] == v {
                    let u = c.shift(-cv).residue()?;
                    return Some((v, u));
                }
            }
        }
        None
    }

    /// Substitutes `T -> x` in a polynomial with tower coefficients: `sum f_k x^k`.
    pub fn eval_poly(&self, f: &[TowerElement], x: &TowerElement) -> TowerElement {
        let mut acc = TowerElement::zero(self.p, self.n);
        for c in f.iter().rev() {
            acc = self.mul(&acc, x).add(&c.lift_to(self.n));
        }
        acc
    }

    // ---- construction ----

    fn push_level(&mut self, c: TowerElement) -> Result<()> {
        let j = self.n + 1;
        let p = self.p as i64;
        if c.level != self.n {
            return Err(Error::InvalidInput(format!("c_{j} must lie at level {}", self.n)));
        }
        let v_c = if self.n == 0 {
            Q::from_integer(
                c.coeffs[0]
                    .valuation()
                    .ok_or_else(|| Error::PrecisionExhausted(format!("c_{j} has no significant digits")))?,
            )
        } else {
            self.tower_valuation(&c)?
        };
        let slope = v_c / Q::from_integer(p);
        let pj = p.pow(j as u32);
        let single = v_c < Q::from_integer(0);
        let denominator = *slope.denom();
        let cert_ok = single && denominator == pj;
        self.c.push(c);
        self.n = j;
        if !cert_ok {
            return Err(Error::NotTotallyRamified {
                level: j,
                detail: format!(
                    "rhs valuation {} gives root valuation {} (denominator {denominator}, need {pj})",
                    qfmt(&v_c),
                    qfmt(&slope)
                ),
            });
        }
        self.vbeta.push(slope);
        // basis valuations and their fractional parts
        let d = self.dim(j);
        let mut basis_val = Vec::with_capacity(d);
        let mut frac_index = HashMap::new();
        for k in 0..d {
            let ex = TowerElement::exps(self.p, j, k);
            let v: Q = ex.iter().zip(&self.vbeta).map(|(&a, vb)| *vb * Q::from_integer(a as i64)).sum();
            let frac = (v * Q::from_integer(pj)).to_integer().mod_floor(&pj);
            if frac_index.insert(frac, k).is_some() {
                return Err(Error::NotTotallyRamified {
                    level: j,
                    detail: "basis monomials with equal valuations modulo Z".into(),
                });
            }
            basis_val.push(v);
        }
        self.basis_val = basis_val;
        self.frac_index = frac_index;
        let vb = self.tower_valuation(&TowerElement::generator(self.p, j, j))?;
        self.certs.push(LevelCert {
            level: j,
            v_rhs: qfmt(&v_c),
            slope: qfmt(&slope),
            denominator,
            single_segment: single,
            v_beta: qfmt(&vb),
        });
        if vb != slope {
            return Err(Error::NotTotallyRamified {
                level: j,
                detail: format!("norm valuation {} of beta disagrees with slope {}", qfmt(&vb), qfmt(&slope)),
            });
        }
        Ok(())
    }

    /// Truncation of this tower to its first `level` levels.
    pub fn sub_tower(&self, level: usize) -> Result<Tower> {
        let mut spec = self.spec.clone();
        spec.rhs.truncate(level);
        spec.n = level;
        build_tower(&spec)
    }
}

fn add_into(acc: &mut [PadicScalar], x: &[PadicScalar]) {
    for (a, b) in acc.iter_mut().zip(x) {
        if b.is_exact_zero() {
            continue;
        }
        *a = if a.is_exact_zero() { b.clone() } else { a.add(b) };
    }
}

/// Gaussian elimination with least-valuation pivots.
fn eliminate(
    mut m: Vec<Vec<PadicScalar>>,
    mut rhs: Option<Vec<PadicScalar>>,
) -> Result<(PadicScalar, Option<Vec<PadicScalar>>)> {
    let d = m.len();
    let p = m[0][0].p();
    let mut det = PadicScalar::one(p, EXACT_PREC);
    let mut perm: Vec<usize> = (0..d).collect();
    for col in 0..d {
        let mut best: Option<(usize, i64)> = None;
        for r in col..d {
            if let Some(v) = m[r][col].valuation() {
                if best.is_none_or(|(_, bv)| v < bv) {
                    best = Some((r, v));
                }
            }
        }
        let Some((pr, _)) = best else {
            return Err(Error::PrecisionExhausted(format!("singular at precision in column {col}")));
        };
        if pr != col {
            m.swap(pr, col);
            if let Some(r) = rhs.as_mut() {
                r.swap(pr, col);
            }
            perm.swap(pr, col);
            det = det.neg();
        }
        let piv = m[col][col].clone();
        det = det.mul(&piv);
        let pinv = piv.inv()?;
        for r in col + 1..d {
            if m[r][col].is_exact_zero() || m[r][col].is_zero() && m[r][col].abs_prec() >= INF / 2 {
                continue;
            }
            let f = m[r][col].mul(&pinv);
            if f.is_exact_zero() {
                continue;
            }
            for c in col..d {
                if m[col][c].is_exact_zero() {
                    continue;
                }
                let t = f.mul(&m[col][c]);
                m[r][c] = m[r][c].sub(&t);
            }
            if let Some(rv) = rhs.as_mut() {
                if !rv[col].is_exact_zero() {
                    let t = f.mul(&rv[col]);
                    rv[r] = rv[r].sub(&t);
                }
            }
        }
    }
    let sol = match rhs {
        None => None,
        Some(mut rv) => {
            let mut x = vec![PadicScalar::zero(p); d];
            for r in (0..d).rev() {
                let mut acc = std::mem::replace(&mut rv[r], PadicScalar::zero(p));
                for c in r + 1..d {
                    if m[r][c].is_exact_zero() || x[c].is_exact_zero() {
                        continue;
                    }
                    acc = acc.sub(&m[r][c].mul(&x[c]));
                }
                x[r] = if acc.is_exact_zero() { acc } else { acc.div(&m[r][r])? };
            }
            Some(x)
        }
    };
    Ok((det, sol))
}

pub fn determinant(m: Vec<Vec<PadicScalar>>) -> Result<PadicScalar> {
    Ok(eliminate(m, None)?.0)
}

pub fn solve_linear(m: Vec<Vec<PadicScalar>>, rhs: Vec<PadicScalar>) -> Result<Vec<PadicScalar>> {
    Ok(eliminate(m, Some(rhs))?.1.unwrap())
}

/// Builds the tower level by level, certifying total ramification.
pub fn build_tower(spec: &TowerSpec) -> Result<Tower> {
    if spec.rhs.len() != spec.n || spec.n == 0 {
        return Err(Error::InvalidInput(format!("need {} right-hand sides, got {}", spec.n, spec.rhs.len())));
    }
    let mut t = Tower::bare(spec);
    for c in &spec.rhs {
        t.push_level(c.clone())?;
    }
    Ok(t)
}

/// Partially built tower holding levels `1..=k`, used while right-hand sides
/// of higher levels are still being computed.
fn tower_of(spec: &TowerSpec, rhs: &[TowerElement]) -> Result<Tower> {
    let mut t = Tower::bare(spec);
    for c in rhs {
        t.push_level(c.clone())?;
    }
    Ok(t)
}

// ---- right-hand sides from series pairs ----

/// Evaluates a Laurent polynomial whose stored residues are taken as exact integers.
fn eval_exact(f: &TLaurent, x: &PadicScalar, prec: u32) -> Result<PadicScalar> {
    let p = x.p();
    let mut acc = PadicScalar::zero(p);
    for (e, c) in f.terms() {
        let abs = c.abs_prec().max(0) as u32;
        let lift = c.lift_mod(abs).ok_or_else(|| Error::InvalidInput("non-integral coefficient".into()))?;
        let c = PadicScalar::from_bigint(p, &lift.into(), prec);
        acc = acc.add(&c.mul(&x.pow(e)?));
    }
    Ok(acc)
}

fn minus_p_pow(p: u64, i: i64, prec: u32) -> PadicScalar {
    let s = PadicScalar::p_power(p, i, prec);
    if i.rem_euclid(2) == 1 {
        s.neg()
    } else {
        s
    }
}

/// The argument fed to the coefficient functions of `S`.
pub fn s_argument(d: &PadicScalar, n: usize, conv: EvalConvention) -> Result<PadicScalar> {
    let p = d.p();
    let a = d.pow((p as i64).pow(n as u32 - 1))?;
    match conv {
        EvalConvention::Direct => Ok(a),
        EvalConvention::Inverse => a.inv(),
    }
}

/// Series `S = R^{-1}` with coefficients good enough for the level-1 sum at `prec`.
fn reversion_for(pair: &GRPair, prec: u32) -> Result<XSeries> {
    let p = pair.p;
    let linear = pair.r.entries().all(|(i, _)| i == 0);
    let work = if linear { prec } else { prec.min(crate::engine::Ctx::max_prec(p)) };
    let lift = |c: &TLaurent| {
        let terms: Vec<(i64, PadicScalar)> = c
            .terms()
            .map(|(t, x)| {
                let l = x.lift_mod(x.abs_prec().max(0) as u32).unwrap_or_default();
                (t, PadicScalar::from_bigint(p, &l.into(), work))
            })
            .collect();
        TLaurent::from_terms(p, work as i64, terms)
    };
    if linear {
        let inv = lift(&pair.r.coeff(0)).inv()?;
        return XSeries::from_entries(p, work as i64, SeriesKind::Nonneg, (0, prec as i64), [(0, inv)]);
    }
    let lifted: Vec<(i64, TLaurent)> = pair.r.entries().map(|(i, c)| (i, lift(c))).collect();
    let r = XSeries::from_entries(p, work as i64, SeriesKind::Nonneg, (0, work as i64), lifted)?;
    r.reversion()
}

/// Right-hand side `c_j` of level `j` from a series pair.
pub fn build_rhs(
    pair: &GRPair,
    d: &PadicScalar,
    n: usize,
    j: usize,
    beta_prev: Option<(&Tower, &TowerElement)>,
    conv: EvalConvention,
    prec: u32,
) -> Result<TowerElement> {
    let p = pair.p;
    if d.valuation() != Some(0) {
        return Err(Error::NonUnitSubstitution(d.valuation().unwrap_or(INF)));
    }
    let minus_inv_p = PadicScalar::p_power(p, -1, prec).neg();
    if j == 1 {
        let s = reversion_for(pair, prec)?;
        let arg = s_argument(d, n, conv)?;
        let mut acc = PadicScalar::zero(p);
        for (i, c) in s.entries() {
            acc = acc.add(&c.eval(&arg)?.mul(&minus_p_pow(p, i, prec)));
        }
        let hi = s.window().1;
        let mut c1 = acc.mul(&minus_inv_p);
        if hi < prec as i64 {
            // unknown tail: S_i (-p)^i with i > hi
            c1 = c1.truncate_abs(hi);
        }
        return Ok(TowerElement::scalar(c1, 0));
    }
    let (tower, beta) =
        beta_prev.ok_or_else(|| Error::InvalidInput("level ≥ 2 needs the previous generator".into()))?;
    let vb = tower.valuation(beta)?;
    // per-index growth of the terms must be positive
    let margin = Q::from_integer(1) + vb * Q::from_integer(p as i64 - 1);
    if margin <= Q::from_integer(0) {
        return Err(Error::DivergentSum(format!("term growth {} is not positive", qfmt(&margin))));
    }
    let arg = d.pow((p as i64).pow((n - j) as u32))?;
    let level = j - 1;
    let beta = beta.truncate_to(level);
    let mut acc = TowerElement::zero(p, level);
    for (i, c) in pair.g.entries() {
        let gi = eval_exact(c, &arg, prec)?;
        if gi.is_zero() {
            continue;
        }
        let coeff = gi.mul(&minus_p_pow(p, i, prec)).mul(&minus_inv_p);
        let bp = tower.pow(&beta, exponent(p, i))?.truncate_to(level);
        acc = acc.add(&bp.scale(&coeff));
    }
    Ok(acc)
}

/// Tower of a series pair at `d`, levels `1..=n`.
pub fn tower_from_pair(
    pair: &GRPair,
    d: &PadicScalar,
    n: usize,
    conv: EvalConvention,
    prec: u32,
    source: Source,
) -> Result<Tower> {
    let p = pair.p;
    let mut spec = TowerSpec { p, n, d: d.clone(), rhs: Vec::new(), source, eval_convention: conv, prec };
    let mut rhs = vec![build_rhs(pair, d, n, 1, None, conv, prec)?];
    for j in 2..=n {
        let t = tower_of(&spec, &rhs)?;
        let beta = TowerElement::generator(p, j - 1, j - 1);
        rhs.push(build_rhs(pair, d, n, j, Some((&t, &beta)), conv, prec)?);
    }
    spec.rhs = rhs;
    build_tower(&spec)
}

/// The explicit degree-p^2 tower at `d`:
/// `y1^p - y1 = -d^p/p` and
/// `y2^p - y2 = -y1/p + (h/p) y1^{2-p} - h (1 - d^p) y1` with `h = (d^{1-p} - 1)/2`.
pub fn explicit_p2(d: &PadicScalar, prec: u32) -> Result<Tower> {
    let p = d.p();
    let pi = p as i64;
    let d = d.with_rel_prec(prec);
    let dp = d.pow(pi)?;
    let inv_p = PadicScalar::p_power(p, -1, prec);
    let c1 = dp.mul(&inv_p).neg();
    let half = PadicScalar::from_ratio(p, 1, 2, prec)?;
    let h = d.pow(1 - pi)?.sub(&PadicScalar::one(p, prec)).mul(&half);
    let mut spec = TowerSpec {
        p,
        n: 2,
        d: d.clone(),
        rhs: vec![TowerElement::scalar(c1, 0)],
        source: Source::ExplicitP2,
        eval_convention: EvalConvention::Inverse,
        prec,
    };
    let t1 = tower_of(&spec, &spec.rhs)?;
    let y1 = TowerElement::generator(p, 1, 1);
    let term1 = y1.scale(&inv_p.neg());
    let term2 = t1.pow(&y1, 2 - pi)?.scale(&h.mul(&inv_p));
    let one_minus_dp = PadicScalar::one(p, prec).sub(&dp);
    let term3 = y1.scale(&h.mul(&one_minus_dp).neg());
    spec.rhs.push(term1.add(&term2).add(&term3));
    build_tower(&spec)
}

/// Level-1 tower `x^p - x = a`.
pub fn level_one(a: &PadicScalar, prec: u32) -> Result<Tower> {
    let spec = TowerSpec {
        p: a.p(),
        n: 1,
        d: PadicScalar::one(a.p(), prec),
        rhs: vec![TowerElement::scalar(a.with_rel_prec(prec), 0)],
        source: Source::Custom,
        eval_convention: EvalConvention::Direct,
        prec,
    };
    build_tower(&spec)
}

/// JSON form of a tower and its certificates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TowerJson {
    pub schema: String,
    pub p: u64,
    pub n: usize,
    pub prec: u32,
    pub d: ScalarJson,
    pub source: Source,
    pub eval_convention: EvalConvention,
    pub rhs: Vec<ElementJson>,
    pub levels: Vec<LevelCert>,
}

impl Tower {
    pub fn to_json(&self) -> TowerJson {
        TowerJson {
            schema: "tower/1".into(),
            p: self.p,
            n: self.n,
            prec: self.prec,
            d: (&self.spec.d).into(),
            source: self.spec.source,
            eval_convention: self.spec.eval_convention,
            rhs: self.c.iter().map(|c| c.to_json()).collect(),
            levels: self.certs.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(x: i64) -> PadicScalar {
        PadicScalar::from_int(5, x, 20)
    }

    #[test]
    fn level_one_valuation() {
        let a = PadicScalar::p_power(5, -1, 20).neg();
        let t = level_one(&a, 20).unwrap();
        assert_eq!(t.vbeta()[0], Q::new(-1, 5));
        assert_eq!(t.tower_valuation(&t.generator(1)).unwrap(), Q::new(-1, 5));
        assert_eq!(t.tower_valuation(&t.scalar(PadicScalar::p_power(5, 1, 20))).unwrap(), Q::from_integer(1));
    }

    #[test]
    fn explicit_tower_valuations() {
        let t = explicit_p2(&d(2), 20).unwrap();
        assert_eq!(t.vbeta(), &[Q::new(-1, 5), Q::new(-6, 25)]);
        let b2 = t.generator(2);
        assert_eq!(t.tower_valuation(&b2).unwrap(), Q::new(-6, 25));
        assert_eq!(t.valuation(&b2).unwrap(), Q::new(-6, 25));
    }

    #[test]
    fn reduction_relation_holds() {
        let t = explicit_p2(&d(1), 20).unwrap();
        let b2 = t.generator(2);
        let lhs = t.pow(&b2, 5).unwrap().sub(&b2);
        let diff = lhs.sub(&t.c[1].lift_to(2));
        assert!(t.val_lower(&diff) > Q::from_integer(10));
    }

    #[test]
    fn inverse_roundtrip() {
        let t = explicit_p2(&d(7), 20).unwrap();
        let x = t.generator(2).add(&t.scalar(d(3))).add(&t.generator(1));
        let y = t.inv(&x).unwrap();
        let one = t.mul(&x, &y).sub(&t.one());
        assert!(t.val_lower(&one) > Q::from_integer(10));
    }

    #[test]
    fn uniformizer_powers() {
        let t = explicit_p2(&d(1), 20).unwrap();
        for num in [-7, -1, 1, 3, 26] {
            let s = Q::new(num, 25);
            let m = t.uniformizer_power(s).unwrap();
            assert_eq!(t.valuation(&m).unwrap(), s);
        }
        assert!(t.uniformizer_power(Q::new(1, 2)).is_none());
    }

    #[test]
    fn builtin_inverse_matches_explicit() {
        let pair = crate::gr::builtin_gr_p2_with(5, (-3, 2), 20);
        for x in [1, 2, 3, 7] {
            let a = tower_from_pair(&pair, &d(x), 2, EvalConvention::Inverse, 20, Source::BuiltinP2).unwrap();
            let b = explicit_p2(&d(x), 20).unwrap();
            for j in 0..2 {
                let diff = a.c[j].sub(&b.c[j]).lift_to(2);
                assert!(b.val_lower(&diff) > Q::from_integer(12), "d={x} level {}", j + 1);
            }
        }
    }

    #[test]
    fn direct_convention_inverts_argument() {
        let pair = crate::gr::builtin_gr_p2_with(5, (-3, 2), 20);
        let t = tower_from_pair(&pair, &d(2), 2, EvalConvention::Direct, 20, Source::BuiltinP2).unwrap();
        let want = d(2).pow(-5).unwrap().mul(&PadicScalar::p_power(5, -1, 20)).neg();
        assert!(t.c[0].coeffs[0].sub(&want).val_or_abs() > 12);
        assert_eq!(t.vbeta(), &[Q::new(-1, 5), Q::new(-6, 25)]);
    }
}
