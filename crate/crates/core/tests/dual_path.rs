use fdsmooth::eval::{bandwidth_sweep, Centering, Quadrature, SmoothingPath, SweepSettings};
use fdsmooth::{
    bin_marginal, bin_pairs, cov_weights, estimate_cov_binned, estimate_cov_surface, estimate_mean_binned,
    estimate_mean_curve, generate_dataset, mean_weights, uniform_grid, KnownMean, SimulationConfig, SmootherSpec,
    Kernel, WeightScheme, ZeroMean,
};

fn data() -> (fdsmooth::FunctionalDataset, fdsmooth::GroundTruth) {
    generate_dataset(&SimulationConfig {
        n: 60,
        p: 2,
        t: 15,
        seed: 3,
        ..SimulationConfig::default()
    })
    .unwrap()
}

fn sup_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn range(a: &[f64]) -> f64 {
    let (lo, hi) = a.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    hi - lo
}

#[test]
fn fine_bins_track_the_exact_mean() {
    let (data, _) = data();
    let spec = SmootherSpec::epanechnikov(0.15).unwrap();
    let grid = uniform_grid(41);
    let exact = estimate_mean_curve(&data, 0, &grid, &spec).unwrap();
    let w = mean_weights(&data, 0, spec.scheme).unwrap();
    let binned = estimate_mean_binned(&bin_marginal::<ZeroMean>(&data, 0, 400, None).unwrap(), &w, &grid, &spec).unwrap();
    assert!(exact.is_complete() && binned.is_complete());
    assert!(sup_gap(&exact.values, &binned.values) < 0.01 * range(&exact.values));
}

#[test]
fn fine_bins_track_the_exact_covariance() {
    let (data, truth) = data();
    let means = KnownMean(|j, u| truth.mean(j, u));
    let spec = SmootherSpec::epanechnikov(0.2).unwrap();
    let grid = uniform_grid(21);
    let exact = estimate_cov_surface(&data, 0, 1, &grid, &grid, &spec, &means).unwrap();
    let w = cov_weights(&data, 0, 1, spec.scheme).unwrap();
    let pairs = bin_pairs(&data, 0, 1, 400, &means).unwrap();
    let binned = estimate_cov_binned(&pairs, &w, &grid, &grid, &spec).unwrap();
    assert!(exact.is_complete() && binned.is_complete());
    assert!(sup_gap(&exact.values, &binned.values) < 0.01 * exact.range());
}

#[test]
fn gap_shrinks_with_more_bins() {
    let (data, _) = data();
    let spec = SmootherSpec::epanechnikov(0.2).unwrap();
    let grid = uniform_grid(21);
    let exact = estimate_cov_surface(&data, 1, 1, &grid, &grid, &spec, &ZeroMean).unwrap();
    let w = cov_weights(&data, 1, 1, spec.scheme).unwrap();
    let gap = |bins: usize| {
        let pairs = bin_pairs(&data, 1, 1, bins, &ZeroMean).unwrap();
        sup_gap(&exact.values, &estimate_cov_binned(&pairs, &w, &grid, &grid, &spec).unwrap().values)
    };
    let (coarse, fine) = (gap(26), gap(401));
    assert!(fine < coarse / 10.0, "{coarse} -> {fine}");
}

#[test]
fn sweeps_pick_similar_errors_on_both_paths() {
    let (data, truth) = data();
    let hs = [0.1, 0.2, 0.3];
    let settings = |path| SweepSettings {
        kernel: Kernel::Epanechnikov,
        scheme: WeightScheme::PerObservation,
        path,
        quadrature: Quadrature::Trapezoid,
        grid: uniform_grid(101),
    };
    let exact = bandwidth_sweep(&data, &truth, &hs, &hs, &settings(SmoothingPath::Exact), Centering::Truth).unwrap();
    let binned = bandwidth_sweep(
        &data,
        &truth,
        &hs,
        &hs,
        &settings(SmoothingPath::Binned { bins: 101 }),
        Centering::Truth,
    )
    .unwrap();
    for j in 0..2 {
        let (a, b) = (exact.best_mean(j).unwrap().1, binned.best_mean(j).unwrap().1);
        assert!((a - b).abs() < 0.1 * a, "mean {j}: {a} vs {b}");
        for k in j..2 {
            let (a, b) = (exact.best_cov(j, k).unwrap().1, binned.best_cov(j, k).unwrap().1);
            assert!((a - b).abs() < 0.1 * a, "cov {j},{k}: {a} vs {b}");
        }
    }
}
