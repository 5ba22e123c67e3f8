use std::hint::black_box;

use coldseq::{
    optimal_shift, optimal_static, synth, waterfill, Fleet, ProfileSpec, ShiftOptions, StaticSolver,
};
use criterion::{criterion_group, criterion_main, Criterion};

fn static_dispatch(c: &mut Criterion) {
    let f = Fleet::butterball();
    let order = f.canonical_order();
    c.bench_function("waterfill 3100 kW", |b| {
        b.iter(|| waterfill(&f, &order, black_box(3100.0)).unwrap())
    });
    c.bench_function("optimal_static 3100 kW", |b| {
        b.iter(|| optimal_static(&f, black_box(3100.0)).unwrap())
    });
    let solver = StaticSolver::new(&f).unwrap();
    c.bench_function("solver cost sweep 1 kW", |b| {
        b.iter(|| {
            (0..=9237)
                .map(|q| solver.cost(q as f64).unwrap())
                .sum::<f64>()
        })
    });
}

fn load_shift(c: &mut Criterion) {
    let f = Fleet::butterball();
    let spec = ProfileSpec {
        horizon_days: 2,
        step_minutes: 60.0,
        ..ProfileSpec::demo()
    };
    let p = synth(&spec).unwrap();
    let opts = ShiftOptions::with_step(20.0);
    let mut g = c.benchmark_group("optimal_shift");
    g.sample_size(10);
    g.bench_function("two days hourly, 20 kW grid", |b| {
        b.iter(|| optimal_shift(&f, &p, &opts).unwrap())
    });
    g.finish();
}

criterion_group!(benches, static_dispatch, load_shift);
criterion_main!(benches);
