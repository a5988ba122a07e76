use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use xxz_gge::qalgebra::{omega_numeric, GeneratingFunctionSet, OmegaOptions};
use xxz_gge::solvers::{solve_qa_gtba, SolverConfig};
use xxz_gge::spectral::{convolve, AnisotropyParams, Grid, PeriodicFunction};

fn convolution(c: &mut Criterion) {
    let mut group = c.benchmark_group("convolve");
    for size in [256, 1024, 4096] {
        let grid = Grid::new(size).unwrap();
        let f = PeriodicFunction::from_fn(&grid, |x| 1.0 / (1.3 - (2.0 * x).cos()));
        let g = PeriodicFunction::from_fn(&grid, |x| (2.0 * x).cos().exp());
        group.bench_with_input(BenchmarkId::from_parameter(size), &size, |b, _| {
            b.iter(|| convolve(black_box(&f), black_box(&g)).unwrap())
        });
    }
    group.finish();
}

fn omega_point(c: &mut Criterion) {
    let p = AnisotropyParams::new(2.0).unwrap();
    let mut group = c.benchmark_group("omega_numeric");
    for two_s in [1, 3, 5] {
        group.bench_with_input(BenchmarkId::from_parameter(two_s), &two_s, |b, &two_s| {
            b.iter(|| omega_numeric(two_s, black_box(0.37), &p).unwrap())
        });
    }
    group.finish();
}

fn generating_functions(c: &mut Criterion) {
    let p = AnisotropyParams::new(2.0).unwrap();
    let grid = Grid::new(256).unwrap();
    let mut group = c.benchmark_group("generating_functions");
    group.sample_size(10);
    group.bench_function("2s<=3, G=256", |b| {
        b.iter(|| GeneratingFunctionSet::new(&p, &grid, 3, 64, &OmegaOptions::default()).unwrap())
    });
    group.finish();
}

fn qa_solve(c: &mut Criterion) {
    let mut config = SolverConfig::new(2.0).unwrap();
    config.grid_size = 128;
    config.cutoff = 48;
    config.n_max = 12;
    config.tol = 1e-10;
    let mut group = c.benchmark_group("qa_solve");
    group.sample_size(10);
    group.bench_function("delta=2, G=128, n_max=12", |b| b.iter(|| solve_qa_gtba(black_box(&config)).unwrap()));
    group.finish();
}

criterion_group!(benches, convolution, omega_point, generating_functions, qa_solve);
criterion_main!(benches);
