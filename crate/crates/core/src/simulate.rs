//! Seeded generator for multivariate functional data with a Fourier-basis
//! Gaussian process and block AR(1) cross-covariance.
//!
//! `X_ij(u) = mu(u) + phi(u)^T theta_ij` where the coefficient blocks have
//! `cov(theta_ij, theta_ik) = rho^|j-k| diag(1/4, 1/9, 1/16, 1/25)`. The
//! observed values are `Y_ijt = X_ij(U_ijt) + eps_ijt` with uniform times and
//! Gaussian noise.
//!
//! Every random draw comes from a ChaCha stream keyed by
//! `(seed, subject, variable, role)`, so datasets do not depend on thread
//! count or generation order. A dataset with `p` variables is also a prefix
//! of the dataset with more variables and the same seed.

use std::f64::consts::{PI, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::data::{FunctionalDataset, Series};
use crate::error::{Error, Result};
use crate::par;

/// Variances of the four basis coefficients.
pub const COMPONENT_VARIANCES: [f64; 4] = [1.0 / 4.0, 1.0 / 9.0, 1.0 / 16.0, 1.0 / 25.0];

/// Settings of one simulated dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    pub n: usize,
    pub p: usize,
    /// Observations per subject and variable.
    pub t: usize,
    pub rho: f64,
    pub noise_sd: f64,
    pub seed: u64,
    /// Observe all variables of a subject at the same times.
    pub shared_times: bool,
    /// Draw the random coefficients; when false every curve equals the mean.
    pub random_effects: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            n: 100,
            p: 1,
            t: 5,
            rho: 0.5,
            noise_sd: 0.5,
            seed: 1,
            shared_times: false,
            random_effects: true,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 || self.t == 0 {
            return Err(Error::InvalidArgument(
                "simulation needs n, p and T of at least 1".into(),
            ));
        }
        if !(self.rho.abs() < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "rho must lie in (-1, 1), got {}",
                self.rho
            )));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "noise_sd must be a nonnegative number, got {}",
                self.noise_sd
            )));
        }
        if self.p >= 1 << 20 || self.n as u64 >= 1 << 40 {
            return Err(Error::InvalidArgument("n or p too large for the RNG key space".into()));
        }
        Ok(())
    }

    pub fn truth(&self) -> GroundTruth {
        GroundTruth { rho: self.rho }
    }
}

/// `1.5 sin(3 pi (u + 0.5)) + 2 u^3`
pub fn true_mean(u: f64) -> f64 {
    1.5 * (3.0 * PI * (u + 0.5)).sin() + 2.0 * u * u * u
}

/// `(sqrt2 cos 2 pi u, sqrt2 sin 2 pi u, sqrt2 cos 4 pi u, sqrt2 sin 4 pi u)`
pub fn basis(u: f64) -> [f64; 4] {
    let (a, b) = (2.0 * PI * u, 4.0 * PI * u);
    [SQRT_2 * a.cos(), SQRT_2 * a.sin(), SQRT_2 * b.cos(), SQRT_2 * b.sin()]
}

/// `rho^|j-k| sum_m d_m phi_m(u) phi_m(v)`
pub fn true_cov(j: usize, k: usize, u: f64, v: f64, rho: f64) -> f64 {
    let (fu, fv) = (basis(u), basis(v));
    let diag: f64 = (0..4).map(|m| COMPONENT_VARIANCES[m] * fu[m] * fv[m]).sum();
    rho.powi(j.abs_diff(k) as i32) * diag
}

/// Closed-form mean and covariance of the simulated process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruth {
    pub rho: f64,
}

impl GroundTruth {
    pub fn mean(&self, _j: usize, u: f64) -> f64 {
        true_mean(u)
    }

    pub fn cov(&self, j: usize, k: usize, u: f64, v: f64) -> f64 {
        true_cov(j, k, u, v, self.rho)
    }
}

#[derive(Clone, Copy)]
enum Role {
    Coefficients = 0,
    Times = 1,
    Noise = 2,
}

fn stream(seed: u64, subject: usize, var: usize, role: Role) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((subject as u64) << 24) | ((var as u64) << 4) | role as u64);
    rng
}

/// Basis coefficients `theta_ij` of subject `i` for every variable, drawn by
/// a per-component AR(1) recursion across variables.
pub fn sample_coefficients(config: &SimulationConfig, i: usize) -> Vec<[f64; 4]> {
    if !config.random_effects {
        return vec![[0.0; 4]; config.p];
    }
    let mut rng = stream(config.seed, i, 0, Role::Coefficients);
    let innovation = (1.0 - config.rho * config.rho).sqrt();
    let mut zeta = [0.0; 4];
    let mut out = Vec::with_capacity(config.p);
    for j in 0..config.p {
        let mut theta = [0.0; 4];
        for m in 0..4 {
            let eta: f64 = rng.sample(StandardNormal);
            zeta[m] = if j == 0 {
                eta
            } else {
                config.rho * zeta[m] + innovation * eta
            };
            theta[m] = COMPONENT_VARIANCES[m].sqrt() * zeta[m];
        }
        out.push(theta);
    }
    out
}

/// Latent curve value `mu(u) + phi(u)^T theta`.
pub fn curve_value(theta: &[f64; 4], u: f64) -> f64 {
    let phi = basis(u);
    true_mean(u) + (0..4).map(|m| phi[m] * theta[m]).sum::<f64>()
}

fn subject_series(config: &SimulationConfig, i: usize) -> Vec<Series> {
    let thetas = sample_coefficients(config, i);
    let draw_times = |var: usize| -> Vec<f64> {
        let mut rng = stream(config.seed, i, var, Role::Times);
        (0..config.t).map(|_| rng.random::<f64>()).collect()
    };
    let shared = config.shared_times.then(|| draw_times(0));
    (0..config.p)
        .map(|j| {
            let times = shared.clone().unwrap_or_else(|| draw_times(j));
            let mut noise = stream(config.seed, i, j, Role::Noise);
            let pairs = times
                .into_iter()
                .map(|u| {
                    let eps: f64 = noise.sample(StandardNormal);
                    (u, curve_value(&thetas[j], u) + config.noise_sd * eps)
                })
                .collect();
            Series::new(pairs).expect("simulated times lie in [0, 1)")
        })
        .collect()
}

/// Draws a dataset and returns it with the matching ground truth.
pub fn generate_dataset(config: &SimulationConfig) -> Result<(FunctionalDataset, GroundTruth)> {
    config.validate()?;
    let series: Vec<Series> = par::map_indices(config.n, |i| subject_series(config, i))
        .into_iter()
        .flatten()
        .collect();
    let data = FunctionalDataset::from_series(config.n, config.p, series)?;
    Ok((data, config.truth()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_values() {
        assert!((true_mean(0.0) + 1.5).abs() < 1e-12);
        assert!((true_mean(0.5) - 0.25).abs() < 1e-12);
        assert!((true_mean(1.0) - 3.5).abs() < 1e-12);
    }

    #[test]
    fn covariance_values() {
        assert!((true_cov(2, 2, 0.0, 0.0, 0.5) - 0.625).abs() < 1e-12);
        assert!((true_cov(1, 2, 0.0, 0.0, 0.5) - 0.3125).abs() < 1e-12);
        for (j, k, u, v) in [(0, 3, 0.1, 0.7), (2, 1, 0.45, 0.05)] {
            assert_eq!(true_cov(j, k, u, v, 0.3), true_cov(k, j, v, u, 0.3));
        }
    }

    #[test]
    fn degenerate_process_is_the_mean() {
        let config = SimulationConfig {
            n: 4,
            p: 2,
            t: 1,
            noise_sd: 0.0,
            random_effects: false,
            ..Default::default()
        };
        let (d, _) = generate_dataset(&config).unwrap();
        for i in 0..4 {
            for j in 0..2 {
                let s = d.series(i, j);
                assert_eq!(s.values()[0], true_mean(s.times()[0]));
            }
        }
    }

    #[test]
    fn reproducible_and_nested_in_p() {
        let small = SimulationConfig {
            n: 6,
            p: 2,
            t: 4,
            seed: 77,
            ..Default::default()
        };
        let big = SimulationConfig { p: 5, ..small };
        let (a, _) = generate_dataset(&small).unwrap();
        let (a2, _) = generate_dataset(&small).unwrap();
        assert_eq!(a, a2);
        let (b, _) = generate_dataset(&big).unwrap();
        assert_eq!(b.select_vars(2).unwrap(), a);
        let other = generate_dataset(&SimulationConfig { seed: 78, ..small }).unwrap().0;
        assert_ne!(other, a);
    }

    #[test]
    fn shared_times_mode() {
        let config = SimulationConfig {
            n: 3,
            p: 3,
            t: 5,
            shared_times: true,
            ..Default::default()
        };
        let (d, _) = generate_dataset(&config).unwrap();
        for i in 0..3 {
            assert_eq!(d.series(i, 0).times(), d.series(i, 2).times());
        }
    }

    #[test]
    fn rejects_invalid_configs() {
        for bad in [
            SimulationConfig { n: 0, ..Default::default() },
            SimulationConfig { rho: 1.0, ..Default::default() },
            SimulationConfig { noise_sd: -1.0, ..Default::default() },
        ] {
            assert!(generate_dataset(&bad).is_err());
        }
    }
}
