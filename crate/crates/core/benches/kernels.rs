use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rf_core::gr::{law_for, solve_gr_with, SolveOptions};
use rf_core::{automorphism_table, explicit_p2, Exec, PadicScalar, TowerElement};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn solver_columns(c: &mut Criterion) {
    let law = law_for(5, 3, (-3, 2)).unwrap();
    let mut g = c.benchmark_group("solve_gr");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, "p5_prec3"), |b| {
            b.iter(|| {
                let opts = SolveOptions { exec, ..SolveOptions::for_prime(5) };
                black_box(solve_gr_with(5, 3, (-3, 2), &law, opts).unwrap())
            })
        });
    }
    g.finish();
}

fn automorphisms(c: &mut Criterion) {
    let t = explicit_p2(&PadicScalar::one(5, 10), 10).unwrap();
    let mut g = c.benchmark_group("automorphism_table");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, "explicit_d1_prec10"), |b| {
            b.iter(|| black_box(automorphism_table(&t, exec).unwrap().autos.len()))
        });
    }
    g.finish();
}

fn random_batch(c: &mut Criterion) {
    let t = explicit_p2(&PadicScalar::one(5, 12), 12).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let elems: Vec<TowerElement> = (0..256)
        .map(|_| {
            (0..t.dim(2)).fold(TowerElement::zero(5, 2), |x, i| {
                let c = PadicScalar::from_int(5, rng.gen_range(-100..=100), 12);
                x.add(&TowerElement::monomial(c, i, 2))
            })
        })
        .collect();
    let mut g = c.benchmark_group("tower_inverse_batch");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, elems.len()), |b| {
            b.iter(|| black_box(exec.map(&elems, |x| t.inv(x).is_ok()).len()))
        });
    }
    g.finish();
}

criterion_group!(benches, solver_columns, automorphisms, random_batch);
criterion_main!(benches);
