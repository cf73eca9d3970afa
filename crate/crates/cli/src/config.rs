//! Experiment configuration: a flat TOML file with list values. Unknown
//! keys are rejected.

use std::path::Path;

use anyhow::Context;
use fdsmooth::eval::{geometric_bandwidths, normalize_bandwidths};
use fdsmooth::{
    Centering, Kernel, Quadrature, SimulationConfig, SmoothingPath, SweepSettings, WeightScheme,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::UsageError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub n: usize,
    /// Variable counts. Single-dataset commands use the first entry.
    pub p: Vec<usize>,
    /// Observations per subject and variable. Single-dataset commands use
    /// the first entry.
    pub t: Vec<usize>,
    pub rho: f64,
    pub noise_sd: f64,
    pub seed: u64,
    pub shared_times: bool,
    pub random_effects: bool,
    pub reps: usize,
    /// `per-obs` or `per-subject`.
    pub scheme: String,
    pub kernel: String,
    pub binned: bool,
    /// Evaluation grid size; also the bin count on the binned path.
    pub grid: usize,
    pub mean_bandwidths: Vec<f64>,
    pub cov_bandwidths: Vec<f64>,
    /// `estimated` or `truth`.
    pub centering: String,
    pub out: Option<String>,
    pub threads: Option<usize>,
}

/// Geometric grids on [0.05, 0.5], rounded to four significant digits.
const DESK_MEAN_BANDWIDTHS: [f64; 15] = [
    0.05, 0.05894, 0.06947, 0.08189, 0.09653, 0.1138, 0.1341, 0.1581, 0.1864, 0.2197, 0.259, 0.3053, 0.3598,
    0.4242, 0.5,
];
const DESK_COV_BANDWIDTHS: [f64; 10] = [0.05, 0.06458, 0.08341, 0.1077, 0.1391, 0.1797, 0.2321, 0.2997, 0.3871, 0.5];

impl Default for ExperimentConfig {
    fn default() -> Self {
        let sim = SimulationConfig::default();
        let hs = geometric_bandwidths(0.02, 0.5, 15);
        Self {
            n: sim.n,
            p: vec![sim.p],
            t: vec![sim.t],
            rho: sim.rho,
            noise_sd: sim.noise_sd,
            seed: sim.seed,
            shared_times: sim.shared_times,
            random_effects: sim.random_effects,
            reps: 1,
            scheme: WeightScheme::default().name().into(),
            kernel: Kernel::default().name().into(),
            binned: false,
            grid: 51,
            mean_bandwidths: hs.clone(),
            cov_bandwidths: hs,
            centering: "estimated".into(),
            out: None,
            threads: None,
        }
    }
}

/// Validated settings derived from an [`ExperimentConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub config: ExperimentConfig,
    pub scheme: WeightScheme,
    pub kernel: Kernel,
    pub centering: Centering,
    pub mean_bandwidths: Vec<f64>,
    pub cov_bandwidths: Vec<f64>,
    pub hash: String,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        toml::from_str(text).map_err(|e| UsageError(format!("invalid config: {e}")).into())
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    /// Desk-scale phase-transition study.
    pub fn desk_phase() -> Self {
        Self {
            n: 100,
            p: vec![5, 10, 20],
            t: vec![5, 10, 20, 40, 80, 160],
            reps: 20,
            binned: true,
            grid: 50,
            mean_bandwidths: DESK_MEAN_BANDWIDTHS.to_vec(),
            cov_bandwidths: DESK_COV_BANDWIDTHS.to_vec(),
            ..Self::default()
        }
    }

    pub fn resolve(&self) -> anyhow::Result<Resolved> {
        let usage = |msg: String| -> anyhow::Error { UsageError(msg).into() };
        if self.reps == 0 {
            return Err(usage("reps must be at least 1".into()));
        }
        if self.p.is_empty() || self.t.is_empty() {
            return Err(usage("p and t lists must be nonempty".into()));
        }
        if self.grid < 2 {
            return Err(usage("grid needs at least 2 points".into()));
        }
        if self.threads == Some(0) {
            return Err(usage("threads must be at least 1".into()));
        }
        for &p in &self.p {
            self.simulation(p, self.t[0], self.seed).validate().map_err(|e| usage(e.to_string()))?;
        }
        for &t in &self.t {
            self.simulation(self.p[0], t, self.seed).validate().map_err(|e| usage(e.to_string()))?;
        }
        let scheme: WeightScheme = self.scheme.parse().map_err(|e: fdsmooth::Error| usage(e.to_string()))?;
        let kernel: Kernel = self.kernel.parse().map_err(|e: fdsmooth::Error| usage(e.to_string()))?;
        let centering = match self.centering.as_str() {
            "estimated" => Centering::Estimated,
            "truth" => Centering::Truth,
            other => return Err(usage(format!("unknown centering {other:?}"))),
        };
        let bw = |hs: &[f64], what: &str| {
            normalize_bandwidths(hs).map_err(|e| usage(format!("{what}: {e}")))
        };
        Ok(Resolved {
            scheme,
            kernel,
            centering,
            mean_bandwidths: bw(&self.mean_bandwidths, "mean_bandwidths")?,
            cov_bandwidths: bw(&self.cov_bandwidths, "cov_bandwidths")?,
            hash: self.hash(),
            config: self.clone(),
        })
    }

    pub fn simulation(&self, p: usize, t: usize, seed: u64) -> SimulationConfig {
        SimulationConfig {
            n: self.n,
            p,
            t,
            rho: self.rho,
            noise_sd: self.noise_sd,
            seed,
            shared_times: self.shared_times,
            random_effects: self.random_effects,
        }
    }

    /// SHA-256 of the settings that affect numerical output. The output
    /// directory and thread budget are left out.
    pub fn hash(&self) -> String {
        let canonical = Self {
            out: None,
            threads: None,
            ..self.clone()
        };
        let text = toml::to_string(&canonical).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl Resolved {
    pub fn path(&self) -> SmoothingPath {
        if self.config.binned {
            SmoothingPath::Binned {
                bins: self.config.grid,
            }
        } else {
            SmoothingPath::Exact
        }
    }

    pub fn sweep_settings(&self) -> SweepSettings {
        SweepSettings {
            kernel: self.kernel,
            scheme: self.scheme,
            path: self.path(),
            quadrature: Quadrature::Trapezoid,
            grid: fdsmooth::uniform_grid(self.config.grid),
        }
    }

    /// Seed of replication `rep`; shared by every `(p, T)` cell.
    pub fn rep_seed(&self, rep: usize) -> u64 {
        self.config.seed.wrapping_add(rep as u64)
    }

    /// Comment lines identifying the run.
    pub fn header(&self, seed: u64) -> Vec<String> {
        vec![format!("config_hash={} seed={seed}", self.hash)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ExperimentConfig::from_toml("n = 10\nrepz = 3\n").unwrap_err();
        assert!(err.downcast_ref::<UsageError>().is_some());
    }

    #[test]
    fn partial_configs_take_defaults() {
        let c = ExperimentConfig::from_toml("n = 10\np = [2, 3]\n").unwrap();
        assert_eq!(c.n, 10);
        assert_eq!(c.p, vec![2, 3]);
        assert_eq!(c.t, ExperimentConfig::default().t);
    }

    #[test]
    fn hash_ignores_threads_and_out() {
        let a = ExperimentConfig::default();
        let b = ExperimentConfig {
            threads: Some(3),
            out: Some("x".into()),
            ..a.clone()
        };
        assert_eq!(a.hash(), b.hash());
        let c = ExperimentConfig { seed: 9, ..a.clone() };
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn invalid_values_are_usage_errors() {
        for text in ["reps = 0", "scheme = \"odd\"", "p = []", "rho = 2.0", "cov_bandwidths = [0.0]"] {
            let c = ExperimentConfig::from_toml(text).unwrap();
            let err = c.resolve().unwrap_err();
            assert!(err.downcast_ref::<UsageError>().is_some(), "{text}");
        }
    }

    #[test]
    fn shipped_configs_parse() {
        let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
        let desk = ExperimentConfig::load(&root.join("phase_desk.toml")).unwrap();
        assert_eq!(desk, ExperimentConfig::desk_phase());
        for name in ["phase_full.toml", "sweep.toml", "rates_toy.toml"] {
            ExperimentConfig::load(&root.join(name)).unwrap().resolve().unwrap();
        }
    }
}
