use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use plsaddle::bounds::BoundSet;
use plsaddle::{solve_inner, solve_saddle, InitStrategy, SolverConfig};
use plsaddle_bench::experiment_start;

fn inner_solve(c: &mut Criterion) {
    let (p, x0, y0) = experiment_start(1);
    let mut group = c.benchmark_group("inner_solve");
    for gamma in [1e-3, 1e-5, 1e-8] {
        group.bench_with_input(BenchmarkId::from_parameter(gamma), &gamma, |b, &g| {
            b.iter(|| solve_inner(black_box(&p), &x0, &y0, g, 100_000).unwrap())
        });
    }
    group.finish();
}

fn outer_solve(c: &mut Criterion) {
    let (p, x0, y0) = experiment_start(2);
    let mut group = c.benchmark_group("saddle_solve");
    group.sample_size(10);
    for strategy in [InitStrategy::WarmStart, InitStrategy::RandomY0] {
        let cfg = SolverConfig::new(1e-2).with_strategy(strategy).with_seed(3);
        group.bench_with_input(
            BenchmarkId::new("gamma=1e-2", strategy.as_str()),
            &cfg,
            |b, cfg| b.iter(|| solve_saddle(black_box(&p), &x0, &y0, cfg).unwrap()),
        );
    }
    group.finish();
}

fn bound_set(c: &mut Criterion) {
    let (p, _, _) = experiment_start(0);
    let constants = *p.constants();
    c.bench_function("bound_set", |b| {
        b.iter(|| BoundSet::evaluate(black_box(&constants), black_box(1e-3), 100.0, 100.0))
    });
}

criterion_group!(benches, inner_solve, outer_solve, bound_set);
criterion_main!(benches);
