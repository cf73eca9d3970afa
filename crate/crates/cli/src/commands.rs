//! Subcommands and their shared flags.

use std::fs::File;
use std::io::{BufReader, Write as _};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use fdsmooth::eval::{aggregate_mises, bandwidth_sweep, cov_surface, mean_curve, rate_diagnostics};
use fdsmooth::io::{save_curve, save_surface, write_mise_report, write_summary};
use fdsmooth::{generate_dataset, FunctionalDataset};

use crate::checks;
use crate::config::{ExperimentConfig, Resolved};
use crate::phase::run_phase;
use crate::UsageError;

#[derive(Debug, Clone, Parser)]
#[command(name = "fdsmooth", version, about = "Local linear smoothing experiments for multivariate functional data")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Experiment config (flat TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory [default: out].
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Use the linear-binning path.
    #[arg(long, global = true)]
    pub binned: bool,
    /// Evaluation grid size, also the bin count when binned.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Weighting scheme: per-obs or per-subject.
    #[arg(long, global = true)]
    pub scheme: Option<String>,
    /// Suppress status lines.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Draw a dataset from the simulation design.
    Simulate {
        /// Write 1-based subject and variable indices.
        #[arg(long)]
        one_based: bool,
    },
    /// Estimate mean curves and covariance surfaces from a dataset file.
    Estimate {
        /// Long-format dataset with header subject,var,u,y.
        #[arg(long)]
        data: PathBuf,
        /// Indices in the dataset start at 1.
        #[arg(long)]
        one_based: bool,
        /// Mean bandwidth.
        #[arg(long)]
        h_mean: f64,
        /// Covariance bandwidth [default: the mean bandwidth].
        #[arg(long)]
        h_cov: Option<f64>,
        /// Covariance pairs: all, diag, none, or a list like 0-0,0-1.
        #[arg(long, default_value = "all")]
        pairs: String,
    },
    /// MISE over the configured bandwidth grids for one simulated dataset.
    Sweep,
    /// Replicated sweeps over the p and T lists.
    PhaseExperiment,
    /// Run the acceptance checks and print a pass/fail table.
    Verify {
        /// Run only these checks, e.g. 1,2,6.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

impl Common {
    fn resolve(&self, base: ExperimentConfig) -> anyhow::Result<Resolved> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => base,
        };
        if let Some(out) = &self.out {
            config.out = Some(out.display().to_string());
        }
        if self.threads.is_some() {
            config.threads = self.threads;
        }
        if self.binned {
            config.binned = true;
        }
        if let Some(grid) = self.grid {
            config.grid = grid;
        }
        if let Some(scheme) = &self.scheme {
            config.scheme = scheme.clone();
        }
        config.resolve()
    }
}

fn out_dir(resolved: &Resolved) -> anyhow::Result<PathBuf> {
    let dir = PathBuf::from(resolved.config.out.as_deref().unwrap_or("out"));
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn write_file(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// Runs a parsed command line inside the requested thread budget.
pub fn execute(cli: &Cli) -> anyhow::Result<()> {
    if cli.common.threads == Some(0) {
        bail!(UsageError("--threads must be at least 1".into()));
    }
    #[cfg(feature = "parallel")]
    if let Some(n) = cli.common.threads {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building thread pool")?;
        return pool.install(|| dispatch(cli));
    }
    dispatch(cli)
}

fn dispatch(cli: &Cli) -> anyhow::Result<()> {
    let common = &cli.common;
    let status = |line: String| {
        if !common.quiet {
            println!("{line}");
        }
    };
    match &cli.command {
        Command::Simulate { one_based } => simulate(&common.resolve(ExperimentConfig::default())?, *one_based, &status),
        Command::Estimate {
            data,
            one_based,
            h_mean,
            h_cov,
            pairs,
        } => estimate(
            &common.resolve(ExperimentConfig::default())?,
            data,
            *one_based,
            *h_mean,
            h_cov.unwrap_or(*h_mean),
            pairs,
            &status,
        ),
        Command::Sweep => sweep(&common.resolve(ExperimentConfig::default())?, &status),
        Command::PhaseExperiment => {
            let resolved = common.resolve(ExperimentConfig::desk_phase())?;
            let dir = out_dir(&resolved)?;
            let results = run_phase(&resolved)?;
            results.write(&dir, &resolved.header(resolved.config.seed))?;
            status(format!(
                "{} metric rows, {} failed cells -> {}",
                results.rows.len(),
                results.failed.len(),
                dir.display()
            ));
            Ok(())
        }
        Command::Verify { only } => verify(only),
    }
}

fn simulate(resolved: &Resolved, one_based: bool, status: &dyn Fn(String)) -> anyhow::Result<()> {
    let c = &resolved.config;
    let sim = c.simulation(c.p[0], c.t[0], c.seed);
    let (data, _) = generate_dataset(&sim)?;
    let dir = out_dir(resolved)?;
    let header = resolved.header(c.seed);
    let mut buf = Vec::new();
    data.write_long(&mut buf, one_based, &header)?;
    write_file(&dir.join("dataset.csv"), &buf)?;
    let manifest = format!(
        "config_hash={}\nseed={}\nn={}\np={}\nT={}\nrho={}\nnoise_sd={}\nrows={}\n",
        resolved.hash,
        c.seed,
        sim.n,
        sim.p,
        sim.t,
        sim.rho,
        sim.noise_sd,
        data.total_observations()
    );
    write_file(&dir.join("manifest.txt"), manifest.as_bytes())?;
    status(format!("{} observations -> {}", data.total_observations(), dir.display()));
    Ok(())
}

/// Parses `all`, `diag`, `none` or `j-k,...` for `p` variables.
pub fn parse_pairs(spec: &str, p: usize) -> anyhow::Result<Vec<(usize, usize)>> {
    let usage = |m: String| -> anyhow::Error { UsageError(m).into() };
    match spec {
        "all" => Ok((0..p).flat_map(|j| (j..p).map(move |k| (j, k))).collect()),
        "diag" => Ok((0..p).map(|j| (j, j)).collect()),
        "none" => Ok(Vec::new()),
        list => list
            .split(',')
            .map(|item| {
                let (a, b) = item
                    .split_once('-')
                    .ok_or_else(|| usage(format!("pair {item:?} is not of the form j-k")))?;
                let j: usize = a.trim().parse().map_err(|_| usage(format!("bad index in {item:?}")))?;
                let k: usize = b.trim().parse().map_err(|_| usage(format!("bad index in {item:?}")))?;
                if j >= p || k >= p {
                    return Err(usage(format!("pair {item:?} outside {p} variables")));
                }
                Ok((j, k))
            })
            .collect(),
    }
}

fn estimate(
    resolved: &Resolved,
    data_path: &Path,
    one_based: bool,
    h_mean: f64,
    h_cov: f64,
    pairs: &str,
    status: &dyn Fn(String),
) -> anyhow::Result<()> {
    let file = File::open(data_path).with_context(|| format!("opening {}", data_path.display()))?;
    let data = FunctionalDataset::read_long(BufReader::new(file), one_based)
        .with_context(|| format!("reading {}", data_path.display()))?;
    let pairs = parse_pairs(pairs, data.n_vars())?;
    let settings = resolved.sweep_settings();
    let dir = out_dir(resolved)?;
    let header = resolved.header(resolved.config.seed);
    let mut summary = String::from("file,failed_points,total_points\n");
    let (mut failed, mut total) = (0usize, 0usize);
    let mut curves = Vec::with_capacity(data.n_vars());
    for j in 0..data.n_vars() {
        let curve = mean_curve(&data, j, h_mean, &settings).with_context(|| format!("mean of variable {j}"))?;
        let name = format!("mean_j{j}.csv");
        save_curve(&dir.join(&name), &curve, &header)?;
        summary.push_str(&format!("{name},{},{}\n", curve.failures.len(), curve.len()));
        failed += curve.failures.len();
        total += curve.len();
        curves.push(curve);
    }
    for (j, k) in pairs {
        let surface = cov_surface(&data, j, k, h_cov, &settings, &curves)
            .with_context(|| format!("covariance of ({j}, {k})"))?;
        let name = format!("cov_j{j}_k{k}.csv");
        save_surface(&dir.join(&name), &surface, &header)?;
        let cells = surface.rows() * surface.cols();
        summary.push_str(&format!("{name},{},{cells}\n", surface.failures.len()));
        failed += surface.failures.len();
        total += cells;
    }
    let mut text = crate::phase::comment_block(&header);
    text.push_str(&summary);
    write_file(&dir.join("failures.csv"), text.as_bytes())?;
    status(format!("{failed} of {total} points failed -> {}", dir.display()));
    if failed == total {
        bail!("every estimate failed; the bandwidth is too small for this design");
    }
    Ok(())
}

fn sweep(resolved: &Resolved, status: &dyn Fn(String)) -> anyhow::Result<()> {
    let c = &resolved.config;
    let (data, truth) = generate_dataset(&c.simulation(c.p[0], c.t[0], c.seed))?;
    let report = bandwidth_sweep(
        &data,
        &truth,
        &resolved.mean_bandwidths,
        &resolved.cov_bandwidths,
        &resolved.sweep_settings(),
        resolved.centering,
    )?;
    let dir = out_dir(resolved)?;
    let header = resolved.header(c.seed);
    let mut buf = Vec::new();
    write_mise_report(&mut buf, &report, &header)?;
    write_file(&dir.join("mise.csv"), &buf)?;
    let summary = aggregate_mises(&report)?;
    let mut buf = Vec::new();
    write_summary(&mut buf, &report, &summary, &header)?;
    let h_mean = (0..data.n_vars()).filter_map(|j| report.argmin_mean(j)).fold(f64::NAN, f64::max);
    let h_cov = (0..data.n_vars())
        .flat_map(|j| (0..data.n_vars()).map(move |k| (j, k)))
        .filter_map(|(j, k)| report.argmin_cov(j, k))
        .fold(f64::NAN, f64::max);
    let diag = rate_diagnostics(&data, h_mean, h_cov);
    writeln!(buf, "regime={}", diag.regime.name())?;
    writeln!(buf, "regime_threshold={:?}", diag.threshold)?;
    let tbar = diag.tbar_mean.iter().sum::<f64>() / diag.p as f64;
    writeln!(buf, "tbar_mean={tbar:?}")?;
    writeln!(buf, "gamma_min={:?}", diag.gamma.iter().copied().fold(f64::INFINITY, f64::min))?;
    writeln!(buf, "nu_min={:?}", diag.nu.iter().flatten().copied().fold(f64::INFINITY, f64::min))?;
    write_file(&dir.join("summary.txt"), &buf)?;
    status(format!(
        "AveMISE_mu={} MaxMISE_mu={} failed_cells={} -> {}",
        summary.ave_mean,
        summary.max_mean,
        report.failed_cells(),
        dir.display()
    ));
    Ok(())
}

fn verify(only: &[u8]) -> anyhow::Result<()> {
    let ids: Vec<u8> = if only.is_empty() { checks::ALL.to_vec() } else { only.to_vec() };
    if let Some(bad) = ids.iter().find(|id| !checks::ALL.contains(id)) {
        bail!(UsageError(format!("unknown check {bad}")));
    }
    let mut failures = 0;
    for id in ids {
        let result = checks::run(id);
        println!("{}", result.line());
        failures += usize::from(!result.passed);
    }
    if failures > 0 {
        bail!("{failures} acceptance check(s) failed");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_lists() {
        assert_eq!(parse_pairs("all", 2).unwrap(), vec![(0, 0), (0, 1), (1, 1)]);
        assert_eq!(parse_pairs("diag", 2).unwrap(), vec![(0, 0), (1, 1)]);
        assert_eq!(parse_pairs("1-0", 2).unwrap(), vec![(1, 0)]);
        assert!(parse_pairs("2-0", 2).is_err());
        assert!(parse_pairs("x", 2).is_err());
    }
}
