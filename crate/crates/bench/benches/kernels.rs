//! Timings for pair counting, the local `Sigma_t` grids and `Phi`.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use polysieve::counting::{count_e, moments};
use polysieve::expsums::{phi, phi_grid, LocalTables, PsiFactors};
use polysieve::polyfam::IntPoly;
use polysieve::quartic::{QuarticContext, QuarticParams};

fn ctx() -> QuarticContext {
    QuarticContext::new(QuarticParams::new(1, 1), 1, 1, 1).unwrap()
}

fn counting(c: &mut Criterion) {
    let f = IntPoly::new(vec![1, 0, 1, 1, 0]);
    let mut group = c.benchmark_group("count_e");
    group.sample_size(10);
    for b in [500u64, 2000, 5000] {
        group.bench_with_input(BenchmarkId::from_parameter(b), &b, |bench, &b| {
            bench.iter(|| count_e(&f, b).unwrap())
        });
    }
    group.finish();
    let cube = IntPoly::new(vec![1, 0, 0, 0]);
    c.bench_function("moments x^3 N=2e6", |bench| {
        bench.iter(|| moments(&cube, black_box(2_000_000)).unwrap())
    });
}

fn local_sums(c: &mut Criterion) {
    let ctx = ctx();
    let mut group = c.benchmark_group("sigma_grid");
    group.sample_size(10);
    for p in [13u64, 31, 61] {
        let tables = LocalTables::new(&ctx, p).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(p), &tables, |bench, t| {
            bench.iter(|| t.sigma_grid(2).unwrap())
        });
    }
    group.finish();
    c.bench_function("local tables p=61", |bench| {
        bench.iter(|| LocalTables::new(&ctx, black_box(61)).unwrap())
    });
}

fn phi_sums(c: &mut Criterion) {
    let ctx = ctx();
    c.bench_function("phi rho=210", |bench| {
        bench.iter(|| phi(&ctx, black_box(210), 17, 5).unwrap())
    });
    let axis: Vec<u64> = (0..64).collect();
    c.bench_function("phi_grid rho=210 64x64", |bench| {
        bench.iter(|| phi_grid(&ctx, 210, &axis, &axis).unwrap())
    });
    let factors = PsiFactors::new(&ctx, 7, 11).unwrap();
    c.bench_function("psi zero value 7 11", |bench| {
        bench.iter(|| factors.zero_value(2, 2).unwrap())
    });
}

criterion_group!(benches, counting, local_sums, phi_sums);
criterion_main!(benches);
