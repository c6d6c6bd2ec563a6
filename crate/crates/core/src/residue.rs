//! Residue fields of characteristic p: finite fields and rational function
//! fields over them, with exact p-power membership tests and the bases used to
//! catalogue cyclic extensions.

use num_bigint::BigUint;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The field with `p^m` elements, as `F_p[a] / (modulus)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fq {
    pub p: u64,
    pub m: usize,
    /// Monic irreducible of degree `m`, lowest coefficient first.
    modulus: Vec<u64>,
}

/// Element of `Fq`: `m` coefficients in the power basis of `a`.
pub type FqElem = Vec<u64>;

fn fp_poly_trim(mut a: Vec<u64>) -> Vec<u64> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn fp_inv(x: u64, p: u64) -> u64 {
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
}

fn fp_poly_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut a = fp_poly_trim(a.to_vec());
    let m = fp_poly_trim(m.to_vec());
    let lead_inv = fp_inv(*m.last().unwrap(), p);
    while a.len() >= m.len() {
        let shift = a.len() - m.len();
        let f = a.last().unwrap() * lead_inv % p;
        for (k, &c) in m.iter().enumerate() {
            a[shift + k] = (a[shift + k] + p - f * c % p) % p;
        }
        a = fp_poly_trim(a);
    }
    a
}

fn fp_poly_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut r = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            r[i + j] = (r[i + j] + x * y) % p;
        }
    }
    fp_poly_trim(r)
}

fn fp_poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let (mut a, mut b) = (fp_poly_trim(a.to_vec()), fp_poly_trim(b.to_vec()));
    while !b.is_empty() {
        let r = fp_poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// Irreducibility over F_p: no common factor with `x^{p^k} - x` for `k ≤ deg/2`.
fn fp_irreducible(f: &[u64], p: u64) -> bool {
    let d = f.len() - 1;
    let mut xp = vec![0, 1];
    for _ in 1..=d / 2 {
        // xp <- xp^p mod f
        let mut acc = vec![1u64];
        for _ in 0..p {
            acc = fp_poly_rem(&fp_poly_mul(&acc, &xp, p), f, p);
        }
        xp = acc;
        let mut h = xp.clone();
        h.resize(h.len().max(2), 0);
        h[1] = (h[1] + p - 1) % p;
        let g = fp_poly_gcd(f, &h, p);
        if g.len() > 1 {
            return false;
        }
    }
    true
}

impl Fq {
    /// Uses the first monic irreducible of degree `m` in lexicographic order.
    pub fn new(p: u64, m: usize) -> Result<Self> {
        if m == 0 || p < 2 {
            return Err(Error::InvalidInput(format!("no field with {p}^{m} elements")));
        }
        if m == 1 {
            return Ok(Self { p, m, modulus: vec![0, 1] });
        }
        let total = p.checked_pow(m as u32).ok_or_else(|| Error::InvalidInput("field too large".into()))?;
        for code in 0..total {
            let mut f: Vec<u64> = (0..m).map(|k| code / p.pow(k as u32) % p).collect();
            if f[0] == 0 {
                continue;
            }
            f.push(1);
            if fp_irreducible(&f, p) {
                return Ok(Self { p, m, modulus: f });
            }
        }
        unreachable!("irreducible polynomials exist in every degree")
    }

    pub fn order(&self) -> BigUint {
        BigUint::from(self.p).pow(self.m as u32)
    }

    pub fn zero(&self) -> FqElem {
        vec![0; self.m]
    }

    pub fn one(&self) -> FqElem {
        self.from_u64(1)
    }

    pub fn from_u64(&self, c: u64) -> FqElem {
        let mut x = self.zero();
        x[0] = c % self.p;
        x
    }

    /// `a^k`, the power basis element.
    pub fn basis(&self) -> Vec<FqElem> {
        (0..self.m)
            .map(|k| {
                let mut x = self.zero();
                x[k] = 1;
                x
            })
            .collect()
    }

    pub fn is_zero(&self, x: &FqElem) -> bool {
        x.iter().all(|&c| c == 0)
    }

    pub fn add(&self, x: &FqElem, y: &FqElem) -> FqElem {
        x.iter().zip(y).map(|(a, b)| (a + b) % self.p).collect()
    }

    pub fn neg(&self, x: &FqElem) -> FqElem {
        x.iter().map(|a| (self.p - a) % self.p).collect()
    }

    pub fn sub(&self, x: &FqElem, y: &FqElem) -> FqElem {
        self.add(x, &self.neg(y))
    }

    pub fn mul(&self, x: &FqElem, y: &FqElem) -> FqElem {
        let mut r = fp_poly_rem(&fp_poly_mul(x, y, self.p), &self.modulus, self.p);
        r.resize(self.m, 0);
        r
    }

    pub fn pow(&self, x: &FqElem, e: &BigUint) -> FqElem {
        let mut acc = self.one();
        for i in (0..e.bits()).rev() {
            acc = self.mul(&acc, &acc);
            if e.bit(i) {
                acc = self.mul(&acc, x);
            }
        }
        acc
    }

    pub fn inv(&self, x: &FqElem) -> Result<FqElem> {
        if self.is_zero(x) {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(x, &(self.order() - 2u32)))
    }

    pub fn frobenius(&self, x: &FqElem) -> FqElem {
        self.pow(x, &BigUint::from(self.p))
    }

    /// The unique `p^k`-th root.
    pub fn root(&self, x: &FqElem, k: u32) -> FqElem {
        let steps = (self.m - (k as usize % self.m)) % self.m;
        (0..steps).fold(x.clone(), |y, _| self.frobenius(&y))
    }

    pub fn random<R: Rng>(&self, rng: &mut R) -> FqElem {
        (0..self.m).map(|_| rng.gen_range(0..self.p)).collect()
    }

    pub fn fmt_elem(&self, x: &FqElem) -> String {
        if self.m == 1 {
            return x[0].to_string();
        }
        let parts: Vec<String> = x
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, &c)| c != 0)
            .map(|(k, &c)| match (k, c) {
                (0, c) => c.to_string(),
                (1, 1) => "a".into(),
                (1, c) => format!("{c}a"),
                (k, 1) => format!("a^{k}"),
                (k, c) => format!("{c}a^{k}"),
            })
            .collect();
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join("+")
        }
    }
}

/// Polynomial in `t` over `Fq`, lowest coefficient first, no trailing zeros.
pub type Poly = Vec<FqElem>;

/// Reduced fraction of polynomials with monic denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatFn {
    pub num: Poly,
    pub den: Poly,
}

struct PolyRing<'a>(&'a Fq);

impl PolyRing<'_> {
    fn trim(&self, mut a: Poly) -> Poly {
        while a.last().is_some_and(|c| self.0.is_zero(c)) {
            a.pop();
        }
        a
    }

    fn add(&self, a: &Poly, b: &Poly) -> Poly {
        let n = a.len().max(b.len());
        let z = self.0.zero();
        self.trim((0..n).map(|k| self.0.add(a.get(k).unwrap_or(&z), b.get(k).unwrap_or(&z))).collect())
    }

    fn neg(&self, a: &Poly) -> Poly {
        a.iter().map(|c| self.0.neg(c)).collect()
    }

    fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut r = vec![self.0.zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                r[i + j] = self.0.add(&r[i + j], &self.0.mul(x, y));
            }
        }
        self.trim(r)
    }

    fn scale(&self, a: &Poly, c: &FqElem) -> Poly {
        self.trim(a.iter().map(|x| self.0.mul(x, c)).collect())
    }

    fn divrem(&self, a: &Poly, b: &Poly) -> (Poly, Poly) {
        let mut r = a.clone();
        let lead_inv = self.0.inv(b.last().unwrap()).unwrap();
        let mut q = vec![self.0.zero(); a.len().saturating_sub(b.len()) + 1];
        while r.len() >= b.len() && !r.is_empty() {
            let shift = r.len() - b.len();
            let f = self.0.mul(r.last().unwrap(), &lead_inv);
            for (k, c) in b.iter().enumerate() {
                r[shift + k] = self.0.sub(&r[shift + k], &self.0.mul(&f, c));
            }
            q[shift] = f;
            r = self.trim(r);
        }
        (self.trim(q), r)
    }

    fn gcd(&self, a: &Poly, b: &Poly) -> Poly {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_empty() {
            let r = self.divrem(&a, &b).1;
            a = b;
            b = r;
        }
        a
    }

    fn fmt(&self, a: &Poly) -> String {
        if a.is_empty() {
            return "0".into();
        }
        let f = self.0;
        let parts: Vec<String> = a
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| !f.is_zero(c))
            .map(|(k, c)| {
                let cs = f.fmt_elem(c);
                let cs = if f.m > 1 && cs.contains('+') { format!("({cs})") } else { cs };
                match (k, cs.as_str()) {
                    (0, _) => cs,
                    (1, "1") => "t".into(),
                    (1, _) => format!("{cs}t"),
                    (k, "1") => format!("t^{k}"),
                    (k, _) => format!("{cs}t^{k}"),
                }
            })
            .collect();
        parts.join("+")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ResidueField {
    Finite(Fq),
    RationalFunction(Fq),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ResidueElem {
    Finite(FqElem),
    Rational(RatFn),
}

impl ResidueField {
    pub fn prime(p: u64) -> Result<Self> {
        Ok(Self::Finite(Fq::new(p, 1)?))
    }

    pub fn finite(p: u64, m: usize) -> Result<Self> {
        Ok(Self::Finite(Fq::new(p, m)?))
    }

    pub fn rational_function(p: u64, m: usize) -> Result<Self> {
        Ok(Self::RationalFunction(Fq::new(p, m)?))
    }

    pub fn constants(&self) -> &Fq {
        match self {
            Self::Finite(f) | Self::RationalFunction(f) => f,
        }
    }

    pub fn p(&self) -> u64 {
        self.constants().p
    }

    pub fn name(&self) -> String {
        let f = self.constants();
        let q = f.order();
        match self {
            Self::Finite(_) if f.m == 1 => format!("F_{q}"),
            Self::Finite(_) => format!("F_{q}"),
            Self::RationalFunction(_) => format!("F_{q}(t)"),
        }
    }

    fn ring(&self) -> PolyRing<'_> {
        PolyRing(self.constants())
    }

    /// Builds a reduced fraction.
    pub fn fraction(&self, num: Poly, den: Poly) -> Result<ResidueElem> {
        let Self::RationalFunction(f) = self else {
            return Err(Error::UnsupportedVariant("fractions need a rational function field".into()));
        };
        let r = self.ring();
        let (num, den) = (r.trim(num), r.trim(den));
        if den.is_empty() {
            return Err(Error::DivisionByZero);
        }
        if num.is_empty() {
            return Ok(ResidueElem::Rational(RatFn { num, den: vec![f.one()] }));
        }
        let g = r.gcd(&num, &den);
        let (num, _) = r.divrem(&num, &g);
        let (den, _) = r.divrem(&den, &g);
        let li = f.inv(den.last().unwrap())?;
        Ok(ResidueElem::Rational(RatFn { num: r.scale(&num, &li), den: r.scale(&den, &li) }))
    }

    /// `c t^e` for `e ≥ 0`.
    pub fn monomial(&self, c: FqElem, e: usize) -> Result<ResidueElem> {
        let f = self.constants();
        let mut num = vec![f.zero(); e + 1];
        num[e] = c;
        self.fraction(num, vec![f.one()])
    }

    pub fn t_pow(&self, e: i64) -> Result<ResidueElem> {
        let f = self.constants();
        if e >= 0 {
            self.monomial(f.one(), e as usize)
        } else {
            let mut den = vec![f.zero(); (-e) as usize + 1];
            den[(-e) as usize] = f.one();
            self.fraction(vec![f.one()], den)
        }
    }

    pub fn constant(&self, c: FqElem) -> ResidueElem {
        match self {
            Self::Finite(_) => ResidueElem::Finite(c),
            Self::RationalFunction(f) => {
                let num = if f.is_zero(&c) { Vec::new() } else { vec![c] };
                ResidueElem::Rational(RatFn { num, den: vec![f.one()] })
            }
        }
    }

    pub fn is_zero(&self, x: &ResidueElem) -> bool {
        match x {
            ResidueElem::Finite(c) => self.constants().is_zero(c),
            ResidueElem::Rational(r) => r.num.is_empty(),
        }
    }

    pub fn add(&self, x: &ResidueElem, y: &ResidueElem) -> Result<ResidueElem> {
        match (x, y) {
            (ResidueElem::Finite(a), ResidueElem::Finite(b)) => Ok(ResidueElem::Finite(self.constants().add(a, b))),
            (ResidueElem::Rational(a), ResidueElem::Rational(b)) => {
                let r = self.ring();
                let num = r.add(&r.mul(&a.num, &b.den), &r.mul(&b.num, &a.den));
                self.fraction(num, r.mul(&a.den, &b.den))
            }
            _ => Err(Error::InvalidInput("mixed residue elements".into())),
        }
    }

    pub fn neg(&self, x: &ResidueElem) -> ResidueElem {
        match x {
            ResidueElem::Finite(a) => ResidueElem::Finite(self.constants().neg(a)),
            ResidueElem::Rational(a) => {
                ResidueElem::Rational(RatFn { num: self.ring().neg(&a.num), den: a.den.clone() })
            }
        }
    }

    pub fn mul(&self, x: &ResidueElem, y: &ResidueElem) -> Result<ResidueElem> {
        match (x, y) {
            (ResidueElem::Finite(a), ResidueElem::Finite(b)) => Ok(ResidueElem::Finite(self.constants().mul(a, b))),
            (ResidueElem::Rational(a), ResidueElem::Rational(b)) => {
                let r = self.ring();
                self.fraction(r.mul(&a.num, &b.num), r.mul(&a.den, &b.den))
            }
            _ => Err(Error::InvalidInput("mixed residue elements".into())),
        }
    }

    /// `x^{p^m}`.
    pub fn frobenius_pow(&self, x: &ResidueElem, m: u32) -> ResidueElem {
        let f = self.constants();
        let q = BigUint::from(self.p()).pow(m);
        match x {
            ResidueElem::Finite(a) => ResidueElem::Finite(f.pow(a, &q)),
            ResidueElem::Rational(a) => {
                let step = self.p().pow(m) as usize;
                let spread = |poly: &Poly| -> Poly {
                    if poly.is_empty() {
                        return Vec::new();
                    }
                    let mut out = vec![f.zero(); (poly.len() - 1) * step + 1];
                    for (k, c) in poly.iter().enumerate() {
                        out[k * step] = f.pow(c, &q);
                    }
                    out
                };
                ResidueElem::Rational(RatFn { num: spread(&a.num), den: spread(&a.den) })
            }
        }
    }

    pub fn fmt(&self, x: &ResidueElem) -> String {
        match x {
            ResidueElem::Finite(a) => self.constants().fmt_elem(a),
            ResidueElem::Rational(a) => {
                let r = self.ring();
                let one = vec![self.constants().one()];
                if a.den == one {
                    r.fmt(&a.num)
                } else {
                    format!("({})/({})", r.fmt(&a.num), r.fmt(&a.den))
                }
            }
        }
    }

    pub fn random<R: Rng>(&self, rng: &mut R, max_deg: usize) -> ResidueElem {
        let f = self.constants();
        match self {
            Self::Finite(_) => loop {
                let c = f.random(rng);
                if !f.is_zero(&c) {
                    return ResidueElem::Finite(c);
                }
            },
            Self::RationalFunction(_) => loop {
                let nd = rng.gen_range(0..=max_deg);
                let dd = rng.gen_range(0..=max_deg);
                let num: Poly = (0..=nd).map(|_| f.random(rng)).collect();
                let den: Poly = (0..=dd).map(|_| f.random(rng)).collect();
                if let Ok(x) = self.fraction(num, den) {
                    if !self.is_zero(&x) {
                        return x;
                    }
                }
            },
        }
    }
}

/// Decides `b ∈ k^{p^m}` and returns the root when it is.
pub fn is_pm_power(field: &ResidueField, b: &ResidueElem, m: u32) -> Option<ResidueElem> {
    let f = field.constants();
    match b {
        ResidueElem::Finite(a) => Some(ResidueElem::Finite(f.root(a, m))),
        ResidueElem::Rational(a) => {
            let step = field.p().checked_pow(m)? as usize;
            let squeeze = |poly: &Poly| -> Option<Poly> {
                let mut out = Vec::new();
                for (k, c) in poly.iter().enumerate() {
                    if k % step != 0 {
                        if !f.is_zero(c) {
                            return None;
                        }
                        continue;
                    }
                    out.push(f.root(c, m));
                }
                Some(out)
            };
            let num = squeeze(&a.num)?;
            let den = squeeze(&a.den)?;
            Some(ResidueElem::Rational(RatFn { num, den }))
        }
    }
}

/// Whether the degree-p extension with residue datum `b` embeds in a cyclic extension of degree `p^n`.
pub fn embeddable(field: &ResidueField, b: &ResidueElem, n: u32) -> bool {
    n == 0 || is_pm_power(field, b, n - 1).is_some()
}

/// Representatives of an F_p-basis of `k^{p^{i-1}} / k^{p^i}` up to t-degree `bound`.
pub fn quotient_basis(field: &ResidueField, i: u32, bound: usize) -> Result<Vec<ResidueElem>> {
    if i == 0 {
        return Err(Error::InvalidInput("level index starts at 1".into()));
    }
    match field {
        // perfect: every quotient is trivial
        ResidueField::Finite(_) => Ok(Vec::new()),
        ResidueField::RationalFunction(f) => {
            let step = field.p().pow(i - 1) as usize;
            let mut out = Vec::new();
            let mut e = 1usize;
            while e * step <= bound {
                if !e.is_multiple_of(field.p() as usize) {
                    for c in f.basis() {
                        out.push(field.monomial(c, e * step)?);
                    }
                }
                e += 1;
            }
            Ok(out)
        }
    }
}

/// Representatives of an F_p-basis of `k^{p^{n-1}}` up to t-degree `bound`.
pub fn power_basis(field: &ResidueField, n: u32, bound: usize) -> Result<Vec<ResidueElem>> {
    if n == 0 {
        return Err(Error::InvalidInput("level index starts at 1".into()));
    }
    let f = field.constants();
    match field {
        ResidueField::Finite(_) => Ok(f.basis().into_iter().map(ResidueElem::Finite).collect()),
        ResidueField::RationalFunction(_) => {
            if bound == 0 {
                return Ok(Vec::new());
            }
            let step = field.p().pow(n - 1) as usize;
            let mut out = Vec::new();
            let mut e = 0usize;
            while e * step <= bound {
                for c in f.basis() {
                    out.push(field.monomial(c, e * step)?);
                }
                e += 1;
            }
            Ok(out)
        }
    }
}

/// Exact F_p-independence of polynomial representatives modulo `k^{p^i}`.
pub fn independent_mod_powers(field: &ResidueField, elems: &[ResidueElem], i: u32) -> bool {
    let f = field.constants();
    let p = field.p();
    match field {
        ResidueField::Finite(_) => elems.is_empty(),
        ResidueField::RationalFunction(_) => {
            let step = p.pow(i) as usize;
            // coordinates at exponents not divisible by p^i, expanded over F_p
            let mut rows: Vec<Vec<u64>> = Vec::new();
            let width = elems
                .iter()
                .map(|x| match x {
                    ResidueElem::Rational(r) => r.num.len(),
                    _ => 0,
                })
                .max()
                .unwrap_or(0);
            for x in elems {
                let ResidueElem::Rational(r) = x else { return false };
                if r.den.len() != 1 {
                    return false;
                }
                let mut row = Vec::new();
                for k in 0..width {
                    if k % step == 0 {
                        continue;
                    }
                    let c = r.num.get(k).cloned().unwrap_or_else(|| f.zero());
                    row.extend(c);
                }
                rows.push(row);
            }
            fp_rank(rows, p) == elems.len()
        }
    }
}

fn fp_rank(mut rows: Vec<Vec<u64>>, p: u64) -> usize {
    let width = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..width {
        let Some(piv) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else { continue };
        rows.swap(rank, piv);
        let inv = fp_inv(rows[rank][col], p);
        for r in 0..rows.len() {
            if r != rank && rows[r][col] != 0 {
                let f = rows[r][col] * inv % p;
                for c in 0..width {
                    rows[r][c] = (rows[r][c] + p - f * rows[rank][c] % p) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub i: u32,
    pub d: String,
    pub equation: String,
    /// The entry drives the degree-p^n tower construction.
    pub feeds_tower: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Catalog {
    pub schema: String,
    pub field: String,
    pub n: u32,
    pub bound: usize,
    pub entries: Vec<CatalogEntry>,
}

/// Defining data of the cyclic extensions generating the maximal abelian
/// exponent-`p^n` extension, truncated at t-degree `bound`.
pub fn generator_catalog(field: &ResidueField, n: u32, bound: usize) -> Result<Catalog> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let mut entries = Vec::new();
    let eq = "x^p - x = -p^{-1} d".to_string();
    for i in 1..n {
        for b in quotient_basis(field, i, bound)? {
            entries.push(CatalogEntry { i, d: field.fmt(&b), equation: eq.clone(), feeds_tower: false });
        }
    }
    for b in power_basis(field, n, bound)? {
        entries.push(CatalogEntry { i: n, d: field.fmt(&b), equation: eq.clone(), feeds_tower: true });
    }
    Ok(Catalog { schema: "catalog/1".into(), field: field.name(), n, bound, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f5t() -> ResidueField {
        ResidueField::rational_function(5, 1).unwrap()
    }

    #[test]
    fn finite_fields_are_perfect() {
        let k = ResidueField::finite(5, 2).unwrap();
        for c in 0..25u64 {
            let x = ResidueElem::Finite(vec![c % 5, c / 5]);
            for m in 0..4 {
                let r = is_pm_power(&k, &x, m).unwrap();
                assert_eq!(k.frobenius_pow(&r, m), x);
            }
        }
    }

    #[test]
    fn t_powers() {
        let k = f5t();
        let t = k.t_pow(1).unwrap();
        let t5 = k.t_pow(5).unwrap();
        assert!(is_pm_power(&k, &t, 1).is_none());
        assert_eq!(is_pm_power(&k, &t5, 1).unwrap(), t);
        assert!(is_pm_power(&k, &t5, 2).is_none());
        assert!(!embeddable(&k, &t, 2));
        assert!(embeddable(&k, &t5, 2));
        assert!(!embeddable(&k, &t5, 3));
        assert!(embeddable(&k, &t, 1));
    }

    #[test]
    fn reduced_form_is_canonical() {
        let k = f5t();
        let f = k.constants();
        // (t^2 - 1)/(2t - 2) = (t + 1)/2
        let num = vec![f.from_u64(4), f.zero(), f.one()];
        let den = vec![f.from_u64(3), f.from_u64(2)];
        let x = k.fraction(num, den).unwrap();
        let ResidueElem::Rational(r) = &x else { panic!() };
        assert_eq!(r.den, vec![f.one()]);
        assert_eq!(k.fmt(&x), "3t+3");
    }

    #[test]
    fn quotient_bases() {
        let k = f5t();
        let b1 = quotient_basis(&k, 1, 3).unwrap();
        assert_eq!(b1.iter().map(|x| k.fmt(x)).collect::<Vec<_>>(), ["t", "t^2", "t^3"]);
        let b2 = quotient_basis(&k, 2, 10).unwrap();
        // t^10 = (t^2)^5 is a p-th power but not a p^2-th power
        assert_eq!(b2.iter().map(|x| k.fmt(x)).collect::<Vec<_>>(), ["t^5", "t^10"]);
        assert!(independent_mod_powers(&k, &quotient_basis(&k, 1, 12).unwrap(), 1));
        let f25 = ResidueField::finite(5, 2).unwrap();
        assert_eq!(power_basis(&f25, 2, 0).unwrap().len(), 2);
    }

    #[test]
    fn catalogs() {
        let c = generator_catalog(&ResidueField::prime(5).unwrap(), 1, 0).unwrap();
        assert_eq!(c.entries.len(), 1);
        assert!(c.entries[0].feeds_tower);
        let c = generator_catalog(&f5t(), 2, 3).unwrap();
        let lv1: Vec<_> = c.entries.iter().filter(|e| e.i == 1).map(|e| e.d.as_str()).collect();
        assert_eq!(lv1, ["t", "t^2", "t^3"]);
        assert!(generator_catalog(&f5t(), 2, 0).unwrap().entries.is_empty());
    }
}
