//! Roots of polynomials with coefficients in a tower.
//!
//! Roots are isolated digit by digit with Newton polygons: at an approximation
//! `x0`, the polynomial is shifted to `g(y) = f(x0 + y)`, each segment of
//! slope `-s` (with `s` in the value group) contributes candidates `lambda m_s`
//! where `lambda` runs over the residual-polynomial roots in F_p, and a
//! candidate that isolates a single root is finished with Newton's method.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::PadicScalar;
use crate::tower::{Tower, TowerElement, ValInfo};

type Q = Ratio<i64>;

#[derive(Clone, Debug)]
pub struct Root {
    pub value: TowerElement,
    /// Certified lower bound on `v(f(root))`.
    pub residual: Q,
    /// Certified lower bound on the distance valuation to the true root.
    pub accuracy: Q,
}

#[derive(Clone, Copy, Debug)]
pub struct RootOptions {
    pub max_depth: usize,
    pub max_newton: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self { max_depth: 256, max_newton: 64 }
    }
}

/// `x^p - x - a` as a coefficient list, lowest degree first.
pub fn artin_schreier(tower: &Tower, a: &TowerElement) -> Vec<TowerElement> {
    let p = tower.p as usize;
    let mut f = vec![TowerElement::zero(tower.p, tower.n); p + 1];
    f[0] = a.lift_to(tower.n).neg();
    f[1] = tower.one().neg();
    f[p] = tower.one();
    f
}

pub fn derivative(f: &[TowerElement]) -> Vec<TowerElement> {
    f.iter().enumerate().skip(1).map(|(k, c)| c.scale(&PadicScalar::from_int(c.p(), k as i64, 128))).collect()
}

/// Coefficients of `f(x0 + y)` in `y`.
pub fn taylor_shift(tower: &Tower, f: &[TowerElement], x0: &TowerElement) -> Vec<TowerElement> {
    let mut a: Vec<TowerElement> = f.iter().map(|c| c.lift_to(tower.n)).collect();
    let n = a.len() - 1;
    if x0.is_zero() {
        return a;
    }
    for i in 0..n {
        for j in (i..n).rev() {
            let t = tower.mul(x0, &a[j + 1]);
            a[j] = a[j].add(&t);
        }
    }
    a
}

struct Segment {
    from: usize,
    to: usize,
    /// Minus the slope: the valuation of the roots it accounts for.
    sigma: Q,
}

/// Lower convex hull of `(k, v_k)`.
fn newton_polygon(pts: &[(usize, Q)]) -> Vec<Segment> {
    let mut hull: Vec<(usize, Q)> = Vec::new();
    for &(k, v) in pts {
        while hull.len() >= 2 {
            let (k1, v1) = hull[hull.len() - 2];
            let (k2, v2) = hull[hull.len() - 1];
            // drop middle point if it lies on or above the chord
            let lhs = (v2 - v1) * Q::from_integer((k - k1) as i64);
            let rhs = (v - v1) * Q::from_integer((k2 - k1) as i64);
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((k, v));
    }
    hull.windows(2)
        .map(|w| Segment {
            from: w[0].0,
            to: w[1].0,
            sigma: -(w[1].1 - w[0].1) / Q::from_integer((w[1].0 - w[0].0) as i64),
        })
        .collect()
}

fn fp_eval(c: &[u64], x: u64, p: u64) -> u64 {
    c.iter().rev().fold(0, |acc, &a| (acc * x + a) % p)
}

/// Roots in F_p^* with multiplicities.
fn fp_roots(c: &[u64], p: u64) -> Vec<(u64, usize)> {
    let mut out = Vec::new();
    for x in 1..p {
        let mut poly = c.to_vec();
        let mut mult = 0;
        while poly.len() > 1 && fp_eval(&poly, x, p) == 0 {
            // divide by (y - x)
            let n = poly.len() - 1;
            let mut q = vec![0u64; n];
            let mut carry = 0;
            for k in (0..n).rev() {
                carry = (poly[k + 1] + carry * x) % p;
                q[k] = carry;
            }
            poly = q;
            mult += 1;
        }
        if mult > 0 {
            out.push((x, mult));
        }
    }
    out
}

struct Finder<'a> {
    tower: &'a Tower,
    f: Vec<TowerElement>,
    df: Vec<TowerElement>,
    opts: RootOptions,
    out: Vec<Root>,
}

fn insufficient(tower: &Tower, detail: String) -> Error {
    Error::InsufficientPrecision { required: tower.prec as i64 + 1, detail }
}

impl Finder<'_> {
    fn newton(&self, mut x: TowerElement) -> Result<Root> {
        let t = self.tower;
        let mut last = Q::from_integer(i64::MIN / 4);
        for _ in 0..self.opts.max_newton {
            let fx = t.eval_poly(&self.f, &x);
            let vi = t.val_info(&fx);
            let Some(v) = vi.value else { break };
            if v <= last {
                break;
            }
            last = v;
            let dfx = t.eval_poly(&self.df, &x);
            let step = t.div(&fx, &dfx)?;
            x = x.sub(&step);
        }
        self.certify(x)
    }

    /// Hensel certificate for an approximate simple root.
    fn certify(&self, x: TowerElement) -> Result<Root> {
        let t = self.tower;
        let fx = t.eval_poly(&self.f, &x);
        let dfx = t.eval_poly(&self.df, &x);
        let vd = t.val_info(&dfx).value.ok_or_else(|| insufficient(t, "derivative vanishes at precision".into()))?;
        let vf = t.val_lower(&fx);
        if vf <= vd * Q::from_integer(2) {
            return Err(insufficient(t, "Hensel condition not met".into()));
        }
        Ok(Root { value: x, residual: vf, accuracy: vf - vd })
    }

    fn explore(&mut self, x0: TowerElement, s_min: Option<Q>, depth: usize) -> Result<()> {
        let t = self.tower;
        if depth > self.opts.max_depth {
            return Err(insufficient(t, format!("root isolation exceeded depth {}", self.opts.max_depth)));
        }
        let g = taylor_shift(t, &self.f, &x0);
        let infos: Vec<ValInfo> = g.iter().map(|c| t.val_info(c)).collect();
        let deg = g.len() - 1;
        if infos[deg].value.is_none() {
            return Err(insufficient(t, "leading coefficient vanishes at precision".into()));
        }
        let g0_known = infos[0].value.is_some();
        let pts: Vec<(usize, Q)> = infos
            .iter()
            .enumerate()
            .filter_map(|(k, vi)| match vi.value {
                Some(v) => Some((k, v)),
                None if k == 0 => Some((0, vi.known_below)),
                None => None,
            })
            .collect();
        let segs = newton_polygon(&pts);
        let relevant: Vec<&Segment> = segs.iter().filter(|s| s_min.is_none_or(|m| s.sigma > m)).collect();
        let count: usize = relevant.iter().map(|s| s.to - s.from).sum();
        if count == 0 {
            return Ok(());
        }
        let v1 = infos.get(1).and_then(|vi| vi.value);
        if count == 1 {
            if let Some(v1) = v1 {
                let v0 = infos[0].value.unwrap_or(infos[0].known_below);
                if v0 > v1 * Q::from_integer(2) {
                    let root = if g0_known { self.newton(x0)? } else { self.certify(x0)? };
                    self.out.push(root);
                    return Ok(());
                }
            }
        }
        for seg in relevant {
            if seg.from == 0 && !g0_known {
                // x0 is a root to the working precision
                if seg.to != 1 {
                    return Err(insufficient(t, format!("cluster of {} roots unresolved at precision", seg.to)));
                }
                self.out.push(self.certify(x0.clone())?);
                continue;
            }
            let Some(m) = t.uniformizer_power(seg.sigma) else { continue };
            let mut res = vec![0u64; seg.to - seg.from + 1];
            let line = |k: usize| infos[k].value.map(|vk| vk + seg.sigma * Q::from_integer(k as i64));
            let height = line(seg.from);
            let mut mk = t.pow(&m, seg.from as i64)?;
            for k in seg.from..=seg.to {
                if line(k).is_some() && line(k) == height {
                    let u = t.mul(&g[k], &mk);
                    let (_, ac) =
                        t.angular_residue(&u).ok_or_else(|| insufficient(t, "residual coefficient vanishes".into()))?;
                    res[k - seg.from] = ac;
                }
                mk = t.mul(&mk, &m);
            }
            for (lambda, _mult) in fp_roots(&res, t.p) {
                let step = m.scale(&PadicScalar::from_int(t.p, lambda as i64, 128));
                self.explore(x0.add(&step), Some(seg.sigma), depth + 1)?;
            }
        }
        Ok(())
    }
}

/// All roots in the top level of `tower` of `f` (coefficients lowest first).
pub fn find_roots(tower: &Tower, f: &[TowerElement], opts: RootOptions) -> Result<Vec<Root>> {
    if f.len() < 2 {
        return Err(Error::InvalidInput("polynomial of degree < 1".into()));
    }
    let f: Vec<TowerElement> = f.iter().map(|c| c.lift_to(tower.n)).collect();
    let df = derivative(&f);
    let mut finder = Finder { tower, f, df, opts, out: Vec::new() };
    finder.explore(TowerElement::zero(tower.p, tower.n), None, 0)?;
    let mut roots = finder.out;
    roots.sort_by_cached_key(|r| sort_key(&r.value));
    Ok(roots)
}

/// Canonical ordering key: leading digits of each coefficient.
pub fn sort_key(x: &TowerElement) -> Vec<(i64, u64)> {
    x.coeffs
        .iter()
        .map(|c| match c.valuation() {
            Some(v) if v <= 0 => (v, c.shift(-v).residue().unwrap_or(0)),
            _ => (1, 0),
        })
        .collect()
}

/// Summary of a root for reports.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RootJson {
    pub value: crate::tower::ElementJson,
    pub residual_at_least: String,
    pub accuracy_at_least: String,
}

impl Root {
    pub fn to_json(&self) -> RootJson {
        let f =
            |q: &Q| if q.is_integer() { q.to_integer().to_string() } else { format!("{}/{}", q.numer(), q.denom()) };
        RootJson {
            value: self.value.to_json(),
            residual_at_least: f(&self.residual),
            accuracy_at_least: f(&self.accuracy),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tower::{explicit_p2, level_one};

    fn sc(x: i64) -> PadicScalar {
        PadicScalar::from_int(5, x, 20)
    }

    #[test]
    fn fp_root_multiplicity() {
        // (y - 2)^2 (y - 3) over F_5 = y^3 - 7y^2 + 16y - 12
        let c = [(5 - 12 % 5), 16 % 5, (5 - 7 % 5), 1];
        assert_eq!(fp_roots(&c, 5), vec![(2, 2), (3, 1)]);
    }

    #[test]
    fn artin_schreier_splits_in_its_level() {
        let a = PadicScalar::p_power(5, -1, 20).neg();
        let t = level_one(&a, 20).unwrap();
        let f = artin_schreier(&t, &t.scalar(a.clone()));
        let roots = find_roots(&t, &f, RootOptions::default()).unwrap();
        assert_eq!(roots.len(), 5);
        for r in &roots {
            assert!(r.residual > Q::from_integer(10));
        }
    }

    #[test]
    fn square_root_of_p_absent() {
        let t = explicit_p2(&sc(1), 20).unwrap();
        let f = vec![t.scalar(sc(5).neg()), TowerElement::zero(5, 2), t.one()];
        assert!(find_roots(&t, &f, RootOptions::default()).unwrap().is_empty());
    }

    #[test]
    fn fifth_root_of_p_absent_but_generator_found() {
        let t = explicit_p2(&sc(3), 20).unwrap();
        let b1 = t.generator(1);
        let f = artin_schreier(&t, &t.c[0].lift_to(2));
        let roots = find_roots(&t, &f, RootOptions::default()).unwrap();
        assert_eq!(roots.len(), 5);
        assert!(roots.iter().any(|r| t.val_lower(&r.value.sub(&b1)) > Q::from_integer(5)));
    }
}
