use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use movplane_core::{
    build_kernel, stable_dt, step_explicit, ExteriorSpec, Field, FracOrder, Grid, Nonlinearity,
};

fn bench_apply(c: &mut Criterion) {
    let order = FracOrder::new(0.5).unwrap();
    let mut group = c.benchmark_group("apply");

    for n in [256usize, 1024] {
        let h = 2.0 / n as f64;
        let grid = Arc::new(Grid::build(1, 1.0, h).unwrap());
        let kernel = build_kernel(grid.clone(), order, ExteriorSpec::ZeroOutsideLattice).unwrap();
        let u = Field::from_fn(grid.clone(), ExteriorSpec::ZeroOutsideLattice, |p| {
            (-p[0] * p[0]).exp()
        });
        group.throughput(Throughput::Elements((n * n) as u64));
        group.bench_with_input(BenchmarkId::new("1d", n), &n, |b, _| {
            b.iter(|| kernel.apply(&u).unwrap())
        });
    }

    for n in [32usize, 64] {
        let h = 2.0 / n as f64;
        let grid = Arc::new(Grid::build(2, 1.0, h).unwrap());
        let kernel = build_kernel(grid.clone(), order, ExteriorSpec::ZeroOutsideBall).unwrap();
        let u = Field::from_fn(grid.clone(), ExteriorSpec::ZeroOutsideBall, |p| {
            let d = 1.0 - p[0] * p[0] - p[1] * p[1];
            d.max(0.0)
        });
        let m = n * n;
        group.throughput(Throughput::Elements((m * m) as u64));
        group.bench_with_input(BenchmarkId::new("2d", n), &n, |b, _| {
            b.iter(|| kernel.apply(&u).unwrap())
        });
    }
    group.finish();
}

fn bench_step(c: &mut Criterion) {
    let order = FracOrder::new(0.5).unwrap();
    let grid = Arc::new(Grid::build(2, 1.0, 1.0 / 16.0).unwrap());
    let kernel = build_kernel(grid.clone(), order, ExteriorSpec::ZeroOutsideBall).unwrap();
    let nl = Nonlinearity::logistic_cubic(6.0);
    let u = Field::from_fn(grid.clone(), ExteriorSpec::ZeroOutsideBall, |p| {
        let d = 1.0 - p[0] * p[0] - p[1] * p[1];
        d.max(0.0)
    });
    let dt = stable_dt(&kernel, &nl);
    c.bench_function("step_explicit_2d_32", |b| {
        b.iter(|| step_explicit(&u, 0.0, dt, &kernel, &nl).unwrap())
    });
}

criterion_group!(benches, bench_apply, bench_step);
criterion_main!(benches);
