//! Parallel against single-threaded runs of the main kernels.
//!
//! With the `parallel` feature each benchmark runs on the global rayon pool
//! and inside a one-thread pool. Without it only the sequential build is
//! measured: `cargo bench -p fdsmooth --no-default-features`.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fdsmooth::eval::{bandwidth_sweep, Centering, Quadrature, SmoothingPath, SweepSettings};
use fdsmooth::{
    bin_pairs, cov_weights, estimate_cov_binned, estimate_cov_surface, generate_dataset, uniform_grid, GroundTruth,
    Kernel, FunctionalDataset, KnownMean, SimulationConfig, SmootherSpec, WeightScheme,
};

fn modes() -> Vec<(&'static str, Option<rayon::ThreadPool>)> {
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    if fdsmooth::par::is_parallel() {
        vec![("parallel", None), ("one-thread", Some(single))]
    } else {
        vec![("sequential", None)]
    }
}

fn run<T: Send>(pool: &Option<rayon::ThreadPool>, f: impl FnOnce() -> T + Send) -> T {
    match pool {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

fn dataset(p: usize, t: usize) -> (FunctionalDataset, GroundTruth) {
    generate_dataset(&SimulationConfig {
        n: 100,
        p,
        t,
        seed: 1,
        ..SimulationConfig::default()
    })
    .unwrap()
}

fn covariance(c: &mut Criterion) {
    let (data, truth) = dataset(2, 20);
    let means = KnownMean(|j, u| truth.mean(j, u));
    let spec = SmootherSpec::epanechnikov(0.15).unwrap();
    let grid = uniform_grid(51);
    let w = cov_weights(&data, 0, 1, WeightScheme::PerObservation).unwrap();
    let pairs = bin_pairs(&data, 0, 1, 51, &means).unwrap();
    let mut group = c.benchmark_group("covariance");
    group.sample_size(20);
    for (name, pool) in modes() {
        group.bench_function(BenchmarkId::new("exact", name), |b| {
            b.iter(|| run(&pool, || estimate_cov_surface(&data, 0, 1, &grid, &grid, &spec, &means).unwrap()))
        });
        group.bench_function(BenchmarkId::new("binned", name), |b| {
            b.iter(|| run(&pool, || estimate_cov_binned(&pairs, &w, &grid, &grid, &spec).unwrap()))
        });
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let (data, truth) = dataset(5, 20);
    let hs = [0.05, 0.1, 0.2, 0.4];
    let settings = SweepSettings {
        kernel: Kernel::Epanechnikov,
        scheme: WeightScheme::PerObservation,
        path: SmoothingPath::Binned { bins: 50 },
        quadrature: Quadrature::Trapezoid,
        grid: uniform_grid(50),
    };
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for (name, pool) in modes() {
        group.bench_function(BenchmarkId::new("binned-p5", name), |b| {
            b.iter(|| run(&pool, || bandwidth_sweep(&data, &truth, &hs, &hs, &settings, Centering::Estimated).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, covariance, sweep);
criterion_main!(benches);
