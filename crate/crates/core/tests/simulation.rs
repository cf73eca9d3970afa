use fdsmooth::simulate::{sample_coefficients, true_mean, COMPONENT_VARIANCES};
use fdsmooth::{generate_dataset, SimulationConfig};

fn config(n: usize, p: usize, t: usize) -> SimulationConfig {
    SimulationConfig {
        n,
        p,
        t,
        seed: 11,
        ..SimulationConfig::default()
    }
}

#[test]
fn coefficient_moments() {
    let cfg = config(20_000, 3, 1);
    let draws: Vec<Vec<[f64; 4]>> = (0..cfg.n).map(|i| sample_coefficients(&cfg, i)).collect();
    let n = cfg.n as f64;
    for m in 0..4 {
        for j in 0..3 {
            for k in j..3 {
                let mean_j: f64 = draws.iter().map(|d| d[j][m]).sum::<f64>() / n;
                let mean_k: f64 = draws.iter().map(|d| d[k][m]).sum::<f64>() / n;
                let cov: f64 = draws.iter().map(|d| (d[j][m] - mean_j) * (d[k][m] - mean_k)).sum::<f64>() / (n - 1.0);
                let want = COMPONENT_VARIANCES[m] * cfg.rho.powi((k - j) as i32);
                // Five standard errors of a sample covariance with n = 20000.
                let se = COMPONENT_VARIANCES[m] * (2.0 / n).sqrt();
                assert!((cov - want).abs() < 5.0 * se, "m={m} j={j} k={k}: {cov} vs {want}");
            }
            let mean: f64 = draws.iter().map(|d| d[j][m]).sum::<f64>() / n;
            assert!(mean.abs() < 5.0 * (COMPONENT_VARIANCES[m] / n).sqrt());
        }
    }
    for m in 0..4 {
        let cross: f64 = draws.iter().map(|d| d[0][m] * d[0][(m + 1) % 4]).sum::<f64>() / n;
        assert!(cross.abs() < 0.01, "components {m} and {} correlate: {cross}", (m + 1) % 4);
    }
}

#[test]
fn response_moments() {
    let cfg = config(4000, 1, 5);
    let (data, _) = generate_dataset(&cfg).unwrap();
    let ys: Vec<f64> = (0..cfg.n).flat_map(|i| data.series(i, 0).values().to_vec()).collect();
    let count = ys.len() as f64;
    let mean = ys.iter().sum::<f64>() / count;
    let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (count - 1.0);

    let fine = 200_000;
    let mu: Vec<f64> = (0..fine).map(|s| true_mean((s as f64 + 0.5) / fine as f64)).collect();
    let mu_bar = mu.iter().sum::<f64>() / fine as f64;
    let mu_var = mu.iter().map(|m| (m - mu_bar).powi(2)).sum::<f64>() / fine as f64;
    // Each basis function has unit mean square on [0, 1].
    let want_var = mu_var + COMPONENT_VARIANCES.iter().sum::<f64>() + cfg.noise_sd.powi(2);

    assert!((mu_bar - 0.5).abs() < 1e-6);
    assert!((mean - mu_bar).abs() < 0.05, "mean {mean} vs {mu_bar}");
    assert!((var - want_var).abs() < 0.05 * want_var, "variance {var} vs {want_var}");
}

#[test]
fn observation_counts_and_domain() {
    let cfg = config(7, 4, 9);
    let (data, _) = generate_dataset(&cfg).unwrap();
    assert_eq!(data.total_observations(), 7 * 4 * 9);
    for i in 0..7 {
        for j in 0..4 {
            let s = data.series(i, j);
            assert_eq!(s.len(), 9);
            assert!(s.times().windows(2).all(|w| w[0] <= w[1]));
            assert!(s.times().iter().all(|&u| (0.0..=1.0).contains(&u)));
        }
    }
}

#[test]
fn seeds_change_the_draw() {
    let (a, _) = generate_dataset(&config(5, 2, 4)).unwrap();
    let (b, _) = generate_dataset(&SimulationConfig { seed: 12, ..config(5, 2, 4) }).unwrap();
    assert_ne!(a, b);
}
