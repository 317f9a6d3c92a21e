use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use raremap_bench::{doubling, quadratic};
use raremap_core::grid::{discretize, doeblin_margin, stationary, tv_profile, DEFAULT_TOL};

fn bench_discretize(c: &mut Criterion) {
    let mut group = c.benchmark_group("discretize");
    for m in [256usize, 512, 1024] {
        group.bench_with_input(BenchmarkId::new("quadratic", m), &m, |b, &m| {
            let sys = quadratic();
            b.iter(|| discretize(&sys, m).unwrap())
        });
    }
    group.finish();
}

fn bench_stationary(c: &mut Criterion) {
    let k = discretize(&quadratic(), 512).unwrap();
    c.bench_function("stationary/quadratic/512", |b| {
        b.iter(|| stationary(&k, DEFAULT_TOL).unwrap())
    });
}

fn bench_diagnostics(c: &mut Criterion) {
    let k = discretize(&doubling(), 256).unwrap();
    let s = stationary(&k, DEFAULT_TOL).unwrap();
    c.bench_function("tv_profile/doubling/256/n40", |b| {
        b.iter(|| tv_profile(&k, &s, 40).unwrap())
    });
    c.bench_function("doeblin/doubling/256", |b| {
        b.iter(|| doeblin_margin(&k, 0.75, 1).unwrap())
    });
}

criterion_group!(benches, bench_discretize, bench_stationary, bench_diagnostics);
criterion_main!(benches);
