//! Reference computations in exact rational arithmetic, independent of the
//! library's modular kernels.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn binom(n: u32, k: u32) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

/// p-adic valuation of a nonzero rational.
pub fn vq(p: u64, x: &Q) -> i64 {
    let pb = BigInt::from(p);
    let count = |mut n: BigInt| {
        let mut v = 0;
        while n.is_multiple_of(&pb) {
            n /= &pb;
            v += 1;
        }
        v
    };
    count(x.numer().abs()) - count(x.denom().abs())
}

/// Residue of a p-integral rational modulo `p^n`, as a least nonnegative integer.
pub fn mod_pn(p: u64, x: &Q, n: u32) -> BigInt {
    let m = BigInt::from(p).pow(n);
    let den_inv = x.denom().modpow(&(euler_phi(p, n) - BigInt::one()), &m);
    (x.numer() * den_inv).mod_floor(&m)
}

fn euler_phi(p: u64, n: u32) -> BigInt {
    BigInt::from(p).pow(n - 1) * BigInt::from(p - 1)
}

/// Univariate truncated series, `coeffs[k]` the coefficient of `X^k`.
type Uni = Vec<Q>;

fn uni_mul(a: &Uni, b: &Uni, deg: usize) -> Uni {
    let mut r = vec![Q::zero(); deg + 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if i + j > deg {
                break;
            }
            r[i + j] += x * y;
        }
    }
    r
}

/// Logarithm of the formal group with `[p](X) = pX + X^p`, from `log([p]X) = p log(X)`.
pub fn logarithm(p: u64, deg: usize) -> Uni {
    let pq = q(p as i64);
    let mut mult = vec![Q::zero(); deg + 1];
    mult[1] = pq.clone();
    if (p as usize) <= deg {
        mult[p as usize] = Q::one();
    }
    // powers of [p](X)
    let mut pows: Vec<Uni> = vec![{
        let mut one = vec![Q::zero(); deg + 1];
        one[0] = Q::one();
        one
    }];
    for m in 1..=deg {
        let next = uni_mul(&pows[m - 1], &mult, deg);
        pows.push(next);
    }
    let mut f = vec![Q::zero(); deg + 1];
    f[1] = Q::one();
    for k in 2..=deg {
        let mut rhs = Q::zero();
        for m in 1..k {
            rhs += &f[m] * &pows[m][k];
        }
        // p f_k = sum_m f_m [X^k]([p]X)^m, the m = k term being p^k f_k
        let lead = &pq - pq.pow(k as i32);
        f[k] = rhs / lead;
    }
    f
}

/// Compositional inverse of a series with `f[0] = 0`, `f[1] = 1`.
fn uni_reversion(f: &Uni, deg: usize) -> Uni {
    let mut g = vec![Q::zero(); deg + 1];
    g[1] = Q::one();
    for k in 2..=deg {
        // coefficient of X^k in f(g) with g known below k
        let mut acc = Q::zero();
        let mut gp = g.clone();
        for m in 2..=k {
            gp = if m == 2 { uni_mul(&g, &g, deg) } else { uni_mul(&gp, &g, deg) };
            acc += &f[m] * &gp[k];
        }
        g[k] = -acc;
    }
    g
}

/// Bivariate truncated series keyed by `(i, j)` for `X^i Y^j`.
pub type Bi = BTreeMap<(u32, u32), Q>;

fn bi_mul(a: &Bi, b: &Bi, deg: u32) -> Bi {
    let mut r = Bi::new();
    for (&(i1, j1), x) in a {
        for (&(i2, j2), y) in b {
            if i1 + i2 + j1 + j2 > deg {
                continue;
            }
            *r.entry((i1 + i2, j1 + j2)).or_insert_with(Q::zero) += x * y;
        }
    }
    r.retain(|_, c| !c.is_zero());
    r
}

/// The group law `log^{-1}(log X + log Y)` through total degree `deg`.
pub fn group_law(p: u64, deg: u32) -> Bi {
    let f = logarithm(p, deg as usize);
    let finv = uni_reversion(&f, deg as usize);
    let mut u = Bi::new();
    for (k, c) in f.iter().enumerate().skip(1) {
        if !c.is_zero() {
            u.insert((k as u32, 0), c.clone());
            u.insert((0, k as u32), c.clone());
        }
    }
    let mut out = Bi::new();
    let mut up = u.clone();
    for (k, c) in finv.iter().enumerate().skip(1) {
        if k > 1 {
            up = bi_mul(&up, &u, deg);
        }
        if c.is_zero() {
            continue;
        }
        for (key, x) in &up {
            *out.entry(*key).or_insert_with(Q::zero) += c * x;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// `-((X+Y)^p - X^p - Y^p) / (p - p^p)`.
pub fn degree_p_layer(p: u64) -> Bi {
    let pq = q(p as i64);
    let den = &pq - pq.pow(p as i32);
    (1..p as u32).map(|i| ((i, p as u32 - i), -Q::from_integer(binom(p as u32, i)) / &den)).collect()
}

/// Laurent series in `X` with Laurent-polynomial coefficients in `T`, kept
/// modulo `p^prec` and through X-exponent `xmax`.
#[derive(Clone, Debug, Default)]
pub struct XT {
    pub terms: BTreeMap<(i64, i64), Q>,
}

pub struct Trunc {
    pub p: u64,
    pub prec: i64,
    pub xmax: i64,
}

impl Trunc {
    fn clean(&self, mut s: XT) -> XT {
        s.terms.retain(|&(e, _), c| e <= self.xmax && !c.is_zero() && vq(self.p, c) < self.prec);
        s
    }

    pub fn mono(&self, c: Q, e: i64, t: i64) -> XT {
        self.clean(XT { terms: [((e, t), c)].into_iter().collect() })
    }

    pub fn add(&self, a: &XT, b: &XT) -> XT {
        let mut r = a.clone();
        for (k, c) in &b.terms {
            *r.terms.entry(*k).or_insert_with(Q::zero) += c;
        }
        self.clean(r)
    }

    pub fn scale(&self, a: &XT, c: &Q) -> XT {
        self.clean(XT { terms: a.terms.iter().map(|(k, x)| (*k, x * c)).collect() })
    }

    pub fn mul(&self, a: &XT, b: &XT) -> XT {
        let mut r = XT::default();
        for (&(e1, t1), x) in &a.terms {
            for (&(e2, t2), y) in &b.terms {
                if e1 + e2 > self.xmax {
                    continue;
                }
                *r.terms.entry((e1 + e2, t1 + t2)).or_insert_with(Q::zero) += x * y;
            }
        }
        self.clean(r)
    }

    /// `F(a, b)` for a bivariate law truncated at its own total degree.
    pub fn apply_law(&self, law: &Bi, a: &XT, b: &XT) -> XT {
        let deg = law.keys().map(|&(i, j)| i.max(j)).max().unwrap_or(0) as usize;
        let powers = |s: &XT| {
            let mut v = vec![self.mono(Q::one(), 0, 0)];
            for k in 1..=deg {
                let next = self.mul(&v[k - 1], s);
                v.push(next);
            }
            v
        };
        let (pa, pb) = (powers(a), powers(b));
        let mut out = XT::default();
        for (&(i, j), c) in law {
            let term = self.scale(&self.mul(&pa[i as usize], &pb[j as usize]), c);
            out = self.add(&out, &term);
        }
        out
    }

    /// Substitution `T -> T^m`.
    pub fn scale_t(&self, a: &XT, m: i64) -> XT {
        XT { terms: a.terms.iter().map(|(&(e, t), c)| ((e, t * m), c.clone())).collect() }
    }
}

/// Generalized binomial coefficient `binom(e, k)` for any integer `e`.
fn gbinom(e: i64, k: u32) -> Q {
    (0..k as i64).fold(Q::one(), |acc, i| acc * q(e - i) / q(i + 1))
}

impl Trunc {
    pub fn pow(&self, a: &XT, k: u32) -> XT {
        (0..k).fold(self.mono(Q::one(), 0, 0), |acc, _| self.mul(&acc, a))
    }

    fn shift(&self, a: &XT, by: i64) -> XT {
        self.clean(XT { terms: a.terms.iter().map(|(&(e, t), c)| ((e + by, t), c.clone())).collect() })
    }

    /// `w^e` for `w = X (1 + h)` with `h` small, `e` any integer.
    pub fn pow_near_x(&self, w: &XT, e: i64) -> XT {
        let rel = Trunc { p: self.p, prec: self.prec, xmax: self.xmax - e };
        let u = rel.shift(w, -1);
        let h = rel.add(&u, &rel.mono(-Q::one(), 0, 0));
        let mut sum = rel.mono(Q::one(), 0, 0);
        let mut hk = sum.clone();
        for k in 1.. {
            hk = rel.mul(&hk, &h);
            if hk.terms.is_empty() {
                break;
            }
            sum = rel.add(&sum, &rel.scale(&hk, &gbinom(e, k)));
        }
        self.shift(&sum, e)
    }
}

/// Coefficient data of a series: `(index, [(T-exponent, value)])`, the
/// index `i` carrying `X^{i(p-1)+1}`.
pub type Coeffs = Vec<(i64, Vec<(i64, Q)>)>;

fn coeff_xt(tr: &Trunc, terms: &[(i64, Q)]) -> XT {
    terms.iter().fold(XT::default(), |acc, (t, c)| tr.add(&acc, &tr.mono(c.clone(), 0, *t)))
}

/// `sum_i c_i(T^tscale) * w^{i(p-1)+1}`.
fn substitute(tr: &Trunc, coeffs: &Coeffs, w: &XT, tscale: i64) -> XT {
    let p = tr.p as i64;
    let mut out = XT::default();
    for (i, terms) in coeffs {
        let e = i * (p - 1) + 1;
        let c = tr.scale_t(&coeff_xt(tr, terms), tscale);
        let we = if e >= 0 { tr.pow(w, e as u32) } else { tr.pow_near_x(w, e) };
        out = tr.add(&out, &tr.mul(&c, &we));
    }
    out
}

/// `[p](w) = p w + w^p`.
fn mul_p(tr: &Trunc, w: &XT) -> XT {
    tr.add(&tr.scale(w, &q(tr.p as i64)), &tr.pow(w, tr.p as u32))
}

/// `LHS - RHS` of `g(X) +_G [p] R(g(X), T) = g(X +_G R([p]X, T^p))`, keeping
/// X-exponents up to that of index `top`, reduced modulo `p^prec`.
pub fn equation_residual(p: u64, prec: i64, law: &Bi, g: &Coeffs, r: &Coeffs, top: i64) -> XT {
    let pi = p as i64;
    let top_e = top * (pi - 1) + 1;
    let lowest = g.iter().map(|(i, _)| i * (pi - 1) + 1).min().unwrap_or(1).min(1);
    let tr = Trunc { p, prec, xmax: top_e + (1 - lowest) };
    let x = tr.mono(Q::one(), 1, 0);
    let gx = substitute(&tr, g, &x, 1);
    let lhs = tr.apply_law(law, &gx, &mul_p(&tr, &substitute(&tr, r, &gx, 1)));
    let inner = tr.apply_law(law, &x, &substitute(&tr, r, &mul_p(&tr, &x), pi));
    let rhs = substitute(&tr, g, &inner, 1);
    let mut res = tr.add(&lhs, &tr.scale(&rhs, &-Q::one()));
    res.terms.retain(|&(e, _), _| e <= top_e);
    res
}

/// The pair with `g_{-1} = p (T^{1-p} - 1)/2`, `g_0 = 1 + p (T^{1-p} - 1)(1 - T^p)/2`, `R = T X`.
pub fn reference_pair(p: u64) -> (Coeffs, Coeffs) {
    let pi = p as i64;
    let half = Q::new(BigInt::from(pi), BigInt::from(2));
    let gm1 = vec![(1 - pi, half.clone()), (0, -half.clone())];
    // (T^{1-p} - 1)(1 - T^p) = T^{1-p} - T - 1 + T^p
    let g0 = vec![(0, Q::one() - &half), (1 - pi, half.clone()), (1, -half.clone()), (pi, half)];
    (vec![(-1, gm1), (0, g0)], vec![(0, vec![(1, Q::one())])])
}
