//! Sequential versus data-parallel throughput.
//!
//! `workers = 1` runs on the calling thread; `workers = 0` uses every core.
//! Build with `--no-default-features` to benchmark the crate with the rayon
//! path compiled out entirely (both variants then run sequentially).

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;
use toeplitz_density::density::{Annulus, DensityField, GridSpec};
use toeplitz_density::eigen::Balance;
use toeplitz_density::ensemble::{run_ensemble, EnsembleConfig};
use toeplitz_density::SymbolParams;

const WORKERS: [(&str, usize); 2] = [("sequential", 1), ("all-cores", 0)];

fn params() -> SymbolParams {
    SymbolParams::normalize(Complex64::new(1.0, 0.0), Complex64::new(0.25, 0.0)).unwrap()
}

fn ensemble(c: &mut Criterion) {
    let s = params();
    let mut group = c.benchmark_group("ensemble_n101_trials32");
    group.sample_size(10);
    for (label, workers) in WORKERS {
        let cfg = EnsembleConfig {
            n: 101,
            delta: 1e-8,
            trials: 32,
            seed: 1,
            params: s,
            annulus: Annulus::new(&s, 0.6, 0.8).unwrap(),
            grid: GridSpec::square(1.5, 60),
            balance: Balance::On,
            workers,
        };
        group.bench_with_input(BenchmarkId::from_parameter(label), &cfg, |b, cfg| {
            b.iter(|| run_ensemble(cfg).unwrap())
        });
    }
    group.finish();
}

fn density(c: &mut Criterion) {
    let s = params();
    let mut group = c.benchmark_group("density_field_200x200");
    group.sample_size(10);
    for (label, workers) in WORKERS {
        group.bench_with_input(BenchmarkId::from_parameter(label), &workers, |b, &workers| {
            b.iter(|| DensityField::evaluate(&s, 101, GridSpec::square(1.5, 200), 0.9, 0.6, workers).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, ensemble, density);
criterion_main!(benches);
