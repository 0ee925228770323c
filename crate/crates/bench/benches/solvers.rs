use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use minimax_bench::{double_well, linear_quadratic, saddle};
use minimax_core::minimax::{simplex_sup_inf, sup_inf};
use minimax_core::{
    classify_alternative, global_minima_with, solve_constrained, ClusterTol, GridSpec, MinimaxTol, SolveOpts,
};

fn global_minima(c: &mut Criterion) {
    let mut g = c.benchmark_group("global_minima");
    for n in [10_001, 100_001, 1_000_001] {
        let f = double_well(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &f, |b, f| {
            b.iter(|| global_minima_with(black_box(f), ClusterTol::default()).unwrap())
        });
    }
    g.finish();
}

fn minimax(c: &mut Criterion) {
    let mut g = c.benchmark_group("sup_inf");
    for n in [100, 500, 1000] {
        let f = saddle(n);
        g.bench_with_input(BenchmarkId::new("sup_inf", n), &f, |b, f| {
            b.iter(|| sup_inf(black_box(f)))
        });
        g.bench_with_input(BenchmarkId::new("classify", n), &f, |b, f| {
            b.iter(|| classify_alternative(black_box(f), &MinimaxTol::default()).unwrap())
        });
    }
    g.finish();
}

fn constrained(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve_constrained");
    g.sample_size(20);
    for n in [20_001, 200_001] {
        let p = linear_quadratic(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &p, |b, p| {
            b.iter(|| solve_constrained(black_box(p), 1.0, &SolveOpts::default()).unwrap())
        });
    }
    g.finish();
}

fn simplex(c: &mut Criterion) {
    let points = vec![vec![0.2, -0.4, 1.1], vec![-0.3, 0.5, 0.9], vec![0.1, 0.1, 0.7]];
    let spec = GridSpec::Explicit { points };
    let dot = |x: &[f64], l: &[f64]| x.iter().zip(l).map(|(a, b)| a * b).sum::<f64>();
    let mut g = c.benchmark_group("simplex_sup_inf");
    g.sample_size(10);
    for m in [101, 1001] {
        g.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, &m| {
            b.iter(|| simplex_sup_inf(dot, &spec, 3, m).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, global_minima, minimax, constrained, simplex);
criterion_main!(benches);
