//! End-to-end acceptance checks. Each check prints one PASS/FAIL line with
//! its measured runtime against its budget.

mod common;

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rf_core::formal_group::check_law;
use rf_core::galois::as_equiv_class;
use rf_core::gr::law_for;
use rf_core::k2::{observed_order, Order};
use rf_core::laurent::TLaurent;
use rf_core::roots::artin_schreier;
use rf_core::tower::level_one;
use rf_core::{
    automorphism_table, build_group_law, builtin_gr_p2, builtin_gr_p2_with, contained_zero, embeddable, explicit_p2,
    find_roots, generator_order, k2_combine, k2_normal_form, solve_gr, tower_from_pair, towers_equal, verify_gr,
    EquivClass, EvalConvention, Exec, K2Element, K2Op, PadicScalar, ResidueField, RootOptions, SeriesKind, Source,
    Tower, XSeries,
};

type Check = std::result::Result<String, String>;

/// Number, name, check and runtime budget in seconds.
type Criterion = (u32, &'static str, fn() -> Check, u64);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn unit(p: u64, n: i64, prec: u32) -> PadicScalar {
    PadicScalar::from_int(p, n, prec)
}

const TOWER_PREC: u32 = 20;

fn solved_tower(d: i64, conv: EvalConvention) -> rf_core::Result<Tower> {
    let law = law_for(5, 2, (-3, 2))?;
    let pair = solve_gr(5, 2, (-3, 2), &law)?;
    tower_from_pair(&pair, &unit(5, d, TOWER_PREC), 2, conv, TOWER_PREC, Source::SolvedGr)
}

fn builtin_tower(d: i64, conv: EvalConvention) -> rf_core::Result<Tower> {
    let pair = builtin_gr_p2_with(5, (-3, 2), TOWER_PREC);
    tower_from_pair(&pair, &unit(5, d, TOWER_PREC), 2, conv, TOWER_PREC, Source::BuiltinP2)
}

fn formal_group() -> Check {
    let mut out = Vec::new();
    for p in [5u64, 7] {
        let law = build_group_law(p, 2 * p as u32, 20).map_err(err)?;
        let viol = check_law(&law).map_err(err)?;
        ensure(viol.total() == 0, || format!("p = {p}: {viol:?}"))?;
        let layer = common::degree_p_layer(p);
        for i in 0..=p as u32 {
            let j = p as u32 - i;
            let want: BigInt = layer.get(&(i, j)).map_or(BigInt::from(0), |c| common::mod_pn(p, c, 20));
            let got: BigInt = law.f.coeff(i, j).lift_mod(20).ok_or("imprecise coefficient")?.into();
            ensure(got == want, || format!("p = {p}: X^{i}Y^{j} is {got}, expected {want}"))?;
        }
        out.push(format!("p={p} violations 0, degree-p layer exact"));
    }
    Ok(out.join("; "))
}

fn builtin_pair() -> Check {
    let pair = builtin_gr_p2(5);
    ensure(pair.cond1() && pair.cond2() && pair.cond3(), || "structural conditions fail".into())?;
    let report = verify_gr(&pair, &law_for(5, 2, (-3, 2)).map_err(err)?).map_err(err)?;
    ensure(report.residual_valuation >= 2, || format!("residual valuation {}", report.residual_valuation))?;
    let (g, r) = common::reference_pair(5);
    let oracle = common::equation_residual(5, 2, &common::group_law(5, 13), &g, &r, 2);
    ensure(oracle.terms.is_empty(), || format!("oracle residual {:?}", oracle.terms))?;
    Ok(format!("conditions hold, residual valuation {}, oracle residual 0 mod 25", report.residual_valuation))
}

fn solver_equivalence() -> Check {
    let mut out = Vec::new();
    for d in [1i64, 2, 7] {
        let solved = solved_tower(d, EvalConvention::Inverse).map_err(err)?;
        let builtin = builtin_tower(d, EvalConvention::Inverse).map_err(err)?;
        let r = towers_equal(&builtin, &solved, 2).map_err(err)?;
        ensure(r.equal, || format!("d = {d}: {:?}", r.levels))?;
        let dist: Vec<String> = r
            .levels
            .iter()
            .map(|l| format!("{}>{}", l.distance.clone().unwrap_or_else(|| "inf".into()), l.required))
            .collect();
        out.push(format!("d={d} [{}]", dist.join(", ")));
    }
    Ok(format!("equal, witness distances {}", out.join(" ")))
}

fn valuations() -> Check {
    let expect = [Ratio::new(-1i64, 5), Ratio::new(-6, 25)];
    let mut n = 0;
    for d in [1i64, 2, 7] {
        let towers = [
            explicit_p2(&unit(5, d, TOWER_PREC), TOWER_PREC).map_err(err)?,
            builtin_tower(d, EvalConvention::Inverse).map_err(err)?,
            builtin_tower(d, EvalConvention::Direct).map_err(err)?,
        ];
        for t in &towers {
            ensure(t.vbeta() == expect, || format!("d = {d}: valuations {:?}", t.vbeta()))?;
            for (k, c) in t.certs.iter().enumerate() {
                let pk = 5i64.pow(k as u32 + 1);
                ensure(c.single_segment && c.denominator == pk, || format!("d = {d}: certificate {c:?}"))?;
            }
            n += 1;
        }
    }
    Ok(format!("{n} towers certify -1/5 and -6/25, single segments with denominators 5 and 25"))
}

fn cyclicity() -> Check {
    let mut out = Vec::new();
    for d in [1i64, 2] {
        let mut found = None;
        let mut tried = Vec::new();
        for prec in 3..=12u32 {
            let attempt = explicit_p2(&unit(5, d, prec), prec).and_then(|t| automorphism_table(&t, Exec::Parallel));
            match attempt {
                Ok(table)
                    if table.autos.len() == 25 && table.cyclic && table.generator_order == 25 && table.is_group() =>
                {
                    found = Some(prec);
                    break;
                }
                Ok(table) => tried.push(format!("{prec}: {} autos, cyclic {}", table.autos.len(), table.cyclic)),
                Err(e) => tried.push(format!("{prec}: {e}")),
            }
        }
        let prec = found.ok_or_else(|| format!("d = {d}: no precision certifies ({})", tried.join("; ")))?;
        let one = level_one(&unit(5, -d, prec).div(&unit(5, 5, prec)).map_err(err)?, prec).map_err(err)?;
        let t1 = automorphism_table(&one, Exec::Parallel).map_err(err)?;
        ensure(t1.autos.len() == 5 && t1.cyclic, || {
            format!("d = {d}: level one gives {} automorphisms", t1.autos.len())
        })?;
        out.push(format!("d={d}: 25 automorphisms, cyclic of order 25 at minimal working precision {prec}, level one cyclic of order 5"));
    }
    Ok(out.join("; "))
}

fn contained_zeros() -> Check {
    let mut passing = Vec::new();
    for (name, conv) in [("direct", EvalConvention::Direct), ("inverse", EvalConvention::Inverse)] {
        let mut ok = true;
        for d in [1i64, 2, 3, 7] {
            let t = builtin_tower(d, conv).map_err(err)?;
            let roots = contained_zero(&t, &t.spec.d).map_err(err)?;
            ok &= !roots.is_empty();
        }
        if ok {
            passing.push(name);
        }
    }
    ensure(!passing.is_empty(), || "no convention yields a contained zero".into())?;
    Ok(format!("roots of X^5 - X + d^5/5 certified for d in {{1,2,3,7}} under: {}", passing.join(", ")))
}

fn classifier() -> Check {
    let p = 5u64;
    let prec = 12;
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let inv_p = PadicScalar::p_power(p, -1, prec);
    let mut confirm = Vec::new();
    for case in 0..100 {
        let mut u1: i64 = rng.gen_range(1..3125);
        while u1 % 5 == 0 {
            u1 = rng.gen_range(1..3125);
        }
        let k: i64 = rng.gen_range(-1..=2);
        let mut w: i64 = rng.gen_range(1..3125);
        while w % 5 == 0 || (k == -1 && (u1 + w) % 5 == 0) {
            w += 1;
        }
        let a1 = unit(p, u1, prec).mul(&inv_p);
        let a2 = a1.add(&PadicScalar::p_power(p, k, prec).mul(&unit(p, w, prec)));
        let want = match k {
            1.. => EquivClass::Equal,
            0 => EquivClass::EqualOverUnramified,
            _ => EquivClass::Unclassified,
        };
        let got = as_equiv_class(&a1, &a2);
        ensure(got == want, || format!("case {case}: v = {k} classified {got:?}"))?;
        if k >= 1 && confirm.len() < 5 {
            confirm.push((a1, a2));
        }
    }
    ensure(confirm.len() == 5, || "too few equal pairs drawn".into())?;
    for (a1, a2) in &confirm {
        let t = level_one(a1, prec).map_err(err)?;
        let f = artin_schreier(&t, &t.scalar(a2.clone()));
        let roots = find_roots(&t, &f, RootOptions::default()).map_err(err)?;
        ensure(!roots.is_empty(), || format!("no root of x^p - x - {a2:?} in the field of {a1:?}"))?;
    }
    Ok("100 pairs classified as predicted, 5 equal pairs confirmed by roots".into())
}

fn embedding() -> Check {
    let k = ResidueField::rational_function(5, 1).map_err(err)?;
    let t = k.t_pow(1).map_err(err)?;
    let t5 = k.t_pow(5).map_err(err)?;
    ensure(!embeddable(&k, &t, 2), || "t embeds at n = 2".into())?;
    ensure(embeddable(&k, &t5, 2), || "t^5 does not embed at n = 2".into())?;
    ensure(!embeddable(&k, &t5, 3), || "t^5 embeds at n = 3".into())?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..50 {
        let m = rng.gen_range(1..=3);
        let f = ResidueField::finite(5, m).map_err(err)?;
        let b = f.random(&mut rng, 0);
        for n in 1..=4 {
            ensure(embeddable(&f, &b, n), || format!("element {i} of F_5^{m} fails at n = {n}"))?;
        }
    }
    Ok("rational function field cases exact, 50 finite-field elements embed for n <= 4".into())
}

fn symbol_group() -> Check {
    let p = 5u64;
    let prec = 12;
    let mut checked = 0;
    for j in -125i64..=125 {
        match generator_order(p, j) {
            Order::Infinite => {
                ensure(j == 0, || format!("j = {j} has infinite order"))?;
                ensure(observed_order(p, 0, prec, 1000).is_none(), || "generator 0 has finite order".into())?;
            }
            Order::Finite(ord) => {
                let ord: u64 = ord.try_into().map_err(|_| "order overflow")?;
                let seen = observed_order(p, j, prec, ord + 1);
                ensure(seen == Some(ord), || format!("j = {j}: expected order {ord}, observed {seen:?}"))?;
            }
        }
        checked += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let random = |rng: &mut ChaCha8Rng| {
        let raw: Vec<(i64, BigInt)> = (0..rng.gen_range(0..6))
            .map(|_| (rng.gen_range(-40..=40), BigInt::from(rng.gen_range(-900..=900))))
            .collect();
        raw
    };
    let add = |a: &K2Element, b: &K2Element| k2_combine(K2Op::Add(b), a).map_err(err);
    for case in 0..10_000 {
        let (rx, ry, rz) = (random(&mut rng), random(&mut rng), random(&mut rng));
        let x = k2_normal_form(p, prec, &rx).map_err(err)?;
        let y = k2_normal_form(p, prec, &ry).map_err(err)?;
        let z = k2_normal_form(p, prec, &rz).map_err(err)?;
        let ok = add(&add(&x, &y)?, &z)?.same(&add(&x, &add(&y, &z)?)?)
            && add(&x, &y)?.same(&add(&y, &x)?)
            && add(&x, &k2_combine(K2Op::Neg, &x).map_err(err)?)?.is_zero()
            && add(&x, &K2Element::zero(p, prec))?.same(&x);
        // the same element written differently has the same normal form
        let mut alt: Vec<(i64, BigInt)> = Vec::new();
        for (j, c) in rx.iter().rev() {
            let shift = match generator_order(p, *j) {
                Order::Finite(o) => BigInt::from(o) * rng.gen_range(-3..=3),
                Order::Infinite => BigInt::from(0),
            };
            let half = c / 2;
            alt.push((*j, c - &half + shift));
            alt.push((*j, half));
        }
        let unique = k2_normal_form(p, prec, &alt).map_err(err)?.same(&x)
            && add(&x, &y)?.same(&k2_normal_form(p, prec, &[rx.clone(), ry.clone()].concat()).map_err(err)?);
        ensure(ok && unique, || format!("case {case} fails"))?;
    }
    Ok(format!("orders exact for {checked} generators |j| <= 125, 10^4 axiom and normal-form cases"))
}

fn kernel_properties() -> Check {
    let p = 5u64;
    let (prec, hi) = (10i64, 6i64);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let admissible = |s: &XSeries| s.entries().all(|(i, _)| i >= 0 && i <= hi);
    for case in 0..100 {
        let lead = TLaurent::from_terms(p, prec, [(rng.gen_range(-2..=2), unit(p, rng.gen_range(1..5), prec as u32))]);
        let mut entries = vec![(0, lead)];
        for i in 1..=hi {
            let terms: Vec<(i64, PadicScalar)> = (0..rng.gen_range(0..3))
                .map(|_| (rng.gen_range(-3..=3), unit(p, rng.gen_range(-3000..3000), prec as u32)))
                .collect();
            entries.push((i, TLaurent::from_terms(p, prec, terms)));
        }
        let r = XSeries::from_entries(p, prec, SeriesKind::Nonneg, (0, hi), entries).map_err(err)?;
        let s = r.reversion().map_err(err)?;
        let x = XSeries::x(p, prec, hi);
        let rs = XSeries::compose(&r, &s).map_err(err)?;
        let sr = XSeries::compose(&s, &r).map_err(err)?;
        ensure(admissible(&s) && admissible(&rs) && admissible(&sr), || format!("case {case}: index outside window"))?;
        ensure(rs.sub(&x).map_err(err)?.is_zero(), || format!("case {case}: R(S(X)) != X"))?;
        ensure(sr.sub(&x).map_err(err)?.is_zero(), || format!("case {case}: S(R(X)) != X"))?;
    }
    Ok("100 random unit-leading series round-trip both ways".into())
}

fn main() {
    let checks: [Criterion; 10] = [
        (1, "formal group law", formal_group, 10),
        (2, "built-in pair", builtin_pair, 30),
        (3, "solver equivalence", solver_equivalence, 300),
        (4, "generator valuations", valuations, 180),
        (5, "cyclicity", cyclicity, 1800),
        (6, "contained zero", contained_zeros, 300),
        (7, "degree-p classifier", classifier, 120),
        (8, "embedding criterion", embedding, 1),
        (9, "symbol group", symbol_group, 10),
        (10, "series kernels", kernel_properties, 30),
    ];
    let mut failed = Vec::new();
    for (n, name, f, budget) in checks {
        let start = Instant::now();
        let res = f();
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(budget);
        let (status, detail) = match &res {
            Ok(d) if in_time => ("PASS", d.clone()),
            Ok(d) => ("FAIL", format!("{d} (over the {budget} s budget)")),
            Err(e) => ("FAIL", e.clone()),
        };
        println!("criterion {n:>2} {status} {name}: {detail} [{:.2?}, budget {budget} s]", took);
        if status == "FAIL" {
            failed.push(n);
        }
    }
    if !failed.is_empty() {
        eprintln!("failing criteria: {failed:?}");
        std::process::exit(1);
    }
}
