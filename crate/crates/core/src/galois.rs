//! Automorphisms of towers, tower equality and the level-one classifier.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{PadicScalar, INF};
use crate::par::Exec;
use crate::roots::{artin_schreier, find_roots, Root, RootOptions};
use crate::tower::{Tower, TowerElement};

type Q = Ratio<i64>;

fn qfmt(q: &Q) -> String {
    if q.is_integer() {
        q.to_integer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Image of `x` (a level-`l` element written in the generators) when the
/// generators are sent to `images` (elements of `target`).
pub fn substitute(target: &Tower, x: &TowerElement, images: &[TowerElement]) -> TowerElement {
    let p = target.p as usize;
    fn go(t: &Tower, coeffs: &[PadicScalar], level: usize, images: &[TowerElement], p: usize) -> TowerElement {
        if level == 0 {
            return t.scalar(coeffs[0].clone());
        }
        let m = p.pow(level as u32 - 1);
        let mut acc = TowerElement::zero(t.p, t.n);
        for k in (0..p).rev() {
            acc = t.mul(&acc, &images[level - 1]);
            let block = &coeffs[k * m..(k + 1) * m];
            if block.iter().any(|c| !c.is_exact_zero()) {
                acc = acc.add(&go(t, block, level - 1, images, p));
            }
        }
        acc
    }
    go(target, &x.coeffs, x.level, images, p)
}

/// Images of all basis monomials under the substitution, as columns.
fn monomial_images(t: &Tower, images: &[TowerElement]) -> Vec<TowerElement> {
    let p = t.p as usize;
    let d = t.dim(t.n);
    let mut cols: Vec<TowerElement> = Vec::with_capacity(d);
    cols.push(t.one());
    for a in 1..d {
        let mut j = 0;
        let mut s = a;
        while s % p == 0 {
            s /= p;
            j += 1;
        }
        let prev = a - p.pow(j as u32);
        cols.push(t.mul(&cols[prev], &images[j]));
    }
    cols
}

fn apply_columns(t: &Tower, cols: &[TowerElement], x: &TowerElement) -> TowerElement {
    let x = x.lift_to(t.n);
    let mut acc = TowerElement::zero(t.p, t.n);
    for (c, col) in x.coeffs.iter().zip(cols) {
        if !c.is_exact_zero() {
            acc = acc.add(&col.scale(c));
        }
    }
    acc
}

#[derive(Clone, Debug)]
pub struct Automorphism {
    pub images: Vec<TowerElement>,
    /// Certified accuracy of the images.
    pub accuracy: Q,
}

#[derive(Clone, Debug)]
pub struct AutomorphismTable {
    pub autos: Vec<Automorphism>,
    /// `compose[a][b]` is the index of `autos[a] ∘ autos[b]`.
    pub compose: Vec<Vec<usize>>,
    pub identity: usize,
    pub orders: Vec<usize>,
    pub cyclic: bool,
    pub generator_order: usize,
    pub prec: u32,
}

/// Images agree when every difference has positive valuation with margin.
fn same_images(t: &Tower, a: &[TowerElement], b: &[TowerElement]) -> bool {
    let half = Q::new(1, 2);
    a.iter().zip(b).all(|(x, y)| t.val_lower(&x.sub(y)) > half)
}

fn extend(t: &Tower, prefix: Vec<TowerElement>, acc: Q, opts: RootOptions) -> Result<Vec<Automorphism>> {
    let j = prefix.len();
    if j == t.n {
        return Ok(vec![Automorphism { images: prefix, accuracy: acc }]);
    }
    let c = substitute(t, &t.c[j], &prefix);
    let roots = find_roots(t, &artin_schreier(t, &c), opts)?;
    let mut out = Vec::new();
    for r in roots {
        let mut next = prefix.clone();
        next.push(r.value);
        out.extend(extend(t, next, acc.min(r.accuracy), opts)?);
    }
    Ok(out)
}

/// Enumerates the automorphisms of the tower and certifies the group structure.
pub fn automorphism_table(t: &Tower, exec: Exec) -> Result<AutomorphismTable> {
    let opts = RootOptions::default();
    let first = find_roots(t, &artin_schreier(t, &t.c[0]), opts)?;
    let branches = exec.map(&first, |r: &Root| extend(t, vec![r.value.clone()], r.accuracy, opts));
    let mut autos = Vec::new();
    for b in branches {
        autos.extend(b?);
    }
    let expected = (t.p as usize).pow(t.n as u32);
    if autos.len() != expected {
        return Err(Error::NotGalois { found: autos.len(), expected });
    }
    let gens: Vec<TowerElement> = (1..=t.n).map(|j| t.generator(j)).collect();
    let identity = autos
        .iter()
        .position(|a| same_images(t, &a.images, &gens))
        .ok_or_else(|| Error::PrecisionExhausted("identity not among the automorphisms".into()))?;
    let columns: Vec<Vec<TowerElement>> = exec.map(&autos, |a: &Automorphism| monomial_images(t, &a.images));
    let n = autos.len();
    let rows: Vec<Result<Vec<usize>>> = exec.map_range(n, |a| {
        (0..n)
            .map(|b| {
                let img: Vec<TowerElement> = autos[b].images.iter().map(|x| apply_columns(t, &columns[a], x)).collect();
                autos.iter().position(|c| same_images(t, &c.images, &img)).ok_or_else(|| Error::InsufficientPrecision {
                    required: t.prec as i64 + 1,
                    detail: format!("composition {a}∘{b} matches no automorphism"),
                })
            })
            .collect()
    });
    let compose: Vec<Vec<usize>> = rows.into_iter().collect::<Result<_>>()?;
    let orders: Vec<usize> = (0..n)
        .map(|a| {
            let mut k = 1;
            let mut cur = a;
            while cur != identity && k <= n {
                cur = compose[a][cur];
                k += 1;
            }
            k
        })
        .collect();
    let generator_order = *orders.iter().max().unwrap_or(&1);
    Ok(AutomorphismTable {
        autos,
        compose,
        identity,
        orders,
        cyclic: generator_order == n,
        generator_order,
        prec: t.prec,
    })
}

impl AutomorphismTable {
    /// Closure, identity and associativity of the composition table.
    pub fn is_group(&self) -> bool {
        let n = self.compose.len();
        let closed = self.compose.iter().all(|r| r.len() == n && r.iter().all(|&x| x < n));
        let ident = (0..n).all(|a| self.compose[self.identity][a] == a && self.compose[a][self.identity] == a);
        let latin = (0..n).all(|a| {
            let mut seen = vec![false; n];
            self.compose[a].iter().all(|&x| !std::mem::replace(&mut seen[x], true))
        });
        let assoc = (0..n).all(|a| {
            (0..n).all(|b| (0..n).all(|c| self.compose[self.compose[a][b]][c] == self.compose[a][self.compose[b][c]]))
        });
        closed && ident && latin && assoc
    }

    pub fn to_json(&self) -> AutJson {
        AutJson {
            size: self.autos.len(),
            cyclic: self.cyclic,
            generator_order: self.generator_order,
            identity: self.identity,
            orders: self.orders.clone(),
            is_group: self.is_group(),
            prec: self.prec,
            images: self.autos.iter().map(|a| a.images.iter().map(|x| x.to_json()).collect()).collect(),
            compose: self.compose.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AutJson {
    pub size: usize,
    pub cyclic: bool,
    pub generator_order: usize,
    pub identity: usize,
    pub orders: Vec<usize>,
    pub is_group: bool,
    pub prec: u32,
    pub images: Vec<Vec<crate::tower::ElementJson>>,
    pub compose: Vec<Vec<usize>>,
}

/// Roots of `x^p - x + d^{p^{n-1}}/p` in the tower.
pub fn contained_zero(t: &Tower, d: &PadicScalar) -> Result<Vec<Root>> {
    let p = t.p;
    let a =
        d.with_rel_prec(t.prec).pow((p as i64).pow(t.n as u32 - 1))?.mul(&PadicScalar::p_power(p, -1, t.prec)).neg();
    find_roots(t, &artin_schreier(t, &t.scalar(a)), RootOptions::default())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LevelMatch {
    pub level: usize,
    pub root_found: bool,
    /// Lower bound on `v(image - beta_j)`; `None` means exactly equal.
    pub distance: Option<String>,
    pub required: i64,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TowersEqual {
    pub equal: bool,
    pub levels: Vec<LevelMatch>,
    #[serde(skip)]
    pub images: Vec<TowerElement>,
}

/// Embeds the generators of `t2` into `t1` level by level, choosing at each
/// level the root closest to the matching generator of `t1`.
pub fn towers_equal(t1: &Tower, t2: &Tower, n: usize) -> Result<TowersEqual> {
    if t1.p != t2.p || n > t1.n || n > t2.n {
        return Err(Error::InvalidInput("towers have different primes or too few levels".into()));
    }
    let mut levels = Vec::new();
    let mut images: Vec<TowerElement> = Vec::new();
    let identical = (0..n).all(|j| t1.c[j] == t2.c[j]);
    let mut equal = true;
    for j in 1..=n {
        let required = (n - j) as i64;
        if identical {
            images.push(t1.generator(j));
            levels.push(LevelMatch { level: j, root_found: true, distance: None, required, ok: true });
            continue;
        }
        let c = substitute(t1, &t2.c[j - 1], &images);
        let roots = find_roots(t1, &artin_schreier(t1, &c), RootOptions::default())?;
        let beta = t1.generator(j);
        let best = roots
            .into_iter()
            .map(|r| {
                let dist = t1.val_lower(&r.value.sub(&beta)).min(r.accuracy);
                (dist, r.value)
            })
            .max_by(|a, b| a.0.cmp(&b.0));
        match best {
            None => {
                equal = false;
                levels.push(LevelMatch { level: j, root_found: false, distance: None, required, ok: false });
                break;
            }
            Some((dist, img)) => {
                let ok = dist > Q::from_integer(required);
                equal &= ok;
                let shown = if dist >= Q::from_integer(INF / 2) { "inf".to_string() } else { qfmt(&dist) };
                levels.push(LevelMatch { level: j, root_found: true, distance: Some(shown), required, ok });
                images.push(img);
            }
        }
    }
    Ok(TowersEqual { equal, levels, images })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquivClass {
    Equal,
    EqualOverUnramified,
    Unclassified,
}

/// Classifies two level-one right-hand sides of valuation -1 by the valuation of their difference.
pub fn as_equiv_class(a1: &PadicScalar, a2: &PadicScalar) -> EquivClass {
    let diff = a1.sub(a2);
    let v = diff.valuation().unwrap_or_else(|| diff.abs_prec());
    if v >= 1 {
        EquivClass::Equal
    } else if v >= 0 {
        EquivClass::EqualOverUnramified
    } else {
        EquivClass::Unclassified
    }
}
