use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use quatflow_bench::bench_config;
use quatflow_core::lp::FilterBank;
use quatflow_core::quat::Quaternion;
use quatflow_core::solver::Solver;
use quatflow_core::synth;

fn hamilton_product(c: &mut Criterion) {
    let a = Quaternion::new(0.3, -1.2, 0.7, 2.1);
    let b = Quaternion::new(-0.5, 0.4, 1.9, -0.8);
    c.bench_function("hamilton_mul", |bench| {
        bench.iter(|| black_box(black_box(a) * black_box(b)))
    });
}

fn transform_roundtrip(c: &mut Criterion) {
    let cfg = bench_config(64);
    let f = synth::random_broadband(&cfg.grid, 1, 1.0, 1.0)
        .unwrap()
        .inverse_transform()
        .unwrap();
    c.bench_function("forward_inverse_64sq", |bench| {
        bench.iter(|| {
            let hat = f.forward_transform().unwrap();
            black_box(hat.inverse_transform().unwrap())
        })
    });
}

fn band_decomposition(c: &mut Criterion) {
    let cfg = bench_config(64);
    let bank = FilterBank::build(&cfg.grid).unwrap();
    let f = synth::random_broadband(&cfg.grid, 2, 1.0, 1.0).unwrap();
    c.bench_function("decompose_64sq", |bench| {
        bench.iter(|| black_box(bank.decompose(&f).unwrap()))
    });
}

fn solver_step(c: &mut Criterion) {
    let cfg = bench_config(64);
    let solver = Solver::new(cfg.clone()).unwrap();
    let q0 = synth::taylor_green_2d(&cfg.grid, 1.0).unwrap();
    let state = solver.ingest(&q0).unwrap();
    c.bench_function("step_64sq", |bench| {
        bench.iter(|| black_box(solver.step(&state).unwrap()))
    });
}

criterion_group!(
    benches,
    hamilton_product,
    transform_roundtrip,
    band_decomposition,
    solver_step
);
criterion_main!(benches);
