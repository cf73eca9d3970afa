//! Accuracy metrics, bandwidth sweeps and rate diagnostics.

use crate::binned::{bin_marginal, bin_pairs, estimate_mean_binned};
use crate::data::{cov_weights, mean_weights, FunctionalDataset, WeightScheme};
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::par;
use crate::simulate::GroundTruth;
use crate::smooth::{
    estimate_cov_surface, estimate_mean_curve_weighted, CurveEstimate, KnownMean, MeanModel,
    SmootherSpec, SurfaceEstimate, ZeroMean,
};

/// Quadrature used for integrated squared errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Quadrature {
    /// Composite trapezoid on the estimation grid.
    #[default]
    Trapezoid,
}

impl Quadrature {
    pub fn name(self) -> &'static str {
        "trapezoid"
    }

    fn weights(self, grid: &[f64]) -> Vec<f64> {
        let n = grid.len();
        let mut w = vec![0.0; n];
        for s in 1..n {
            let half = 0.5 * (grid[s] - grid[s - 1]);
            w[s - 1] += half;
            w[s] += half;
        }
        w
    }
}

/// True mean and covariance functions to score estimates against.
pub trait Truth: Sync {
    fn mean(&self, j: usize, u: f64) -> f64;
    fn cov(&self, j: usize, k: usize, u: f64, v: f64) -> f64;
}

impl Truth for GroundTruth {
    fn mean(&self, j: usize, u: f64) -> f64 {
        GroundTruth::mean(self, j, u)
    }

    fn cov(&self, j: usize, k: usize, u: f64, v: f64) -> f64 {
        GroundTruth::cov(self, j, k, u, v)
    }
}

/// Integrated squared error of a mean curve.
pub fn mise_mean(
    estimate: &CurveEstimate,
    truth: impl Fn(f64) -> f64,
    quadrature: Quadrature,
) -> Result<f64> {
    if !estimate.is_complete() {
        return Err(Error::IncompleteEstimate {
            failed: estimate.failures.len(),
        });
    }
    let w = quadrature.weights(&estimate.grid);
    Ok(estimate
        .grid
        .iter()
        .zip(&estimate.values)
        .zip(&w)
        .map(|((&u, &v), &w)| w * (v - truth(u)).powi(2))
        .sum())
}

/// Integrated squared error of a covariance surface.
pub fn mise_cov(
    estimate: &SurfaceEstimate,
    truth: impl Fn(f64, f64) -> f64,
    quadrature: Quadrature,
) -> Result<f64> {
    let values = truth_surface(&estimate.grid_u, &estimate.grid_v, truth);
    ise_surface(estimate, &values, quadrature)
}

fn truth_surface(grid_u: &[f64], grid_v: &[f64], truth: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    grid_u
        .iter()
        .flat_map(|&u| grid_v.iter().map(move |&v| (u, v)))
        .map(|(u, v)| truth(u, v))
        .collect()
}

/// Squared error against truth tabulated row-major on the estimate's grid.
fn ise_surface(estimate: &SurfaceEstimate, truth: &[f64], quadrature: Quadrature) -> Result<f64> {
    if !estimate.is_complete() {
        return Err(Error::IncompleteEstimate {
            failed: estimate.failures.len(),
        });
    }
    let wu = quadrature.weights(&estimate.grid_u);
    let wv = quadrature.weights(&estimate.grid_v);
    let cols = estimate.cols();
    let mut total = 0.0;
    for (r, w) in wu.iter().enumerate() {
        let row: f64 = (0..cols)
            .map(|c| wv[c] * (estimate.values[r * cols + c] - truth[r * cols + c]).powi(2))
            .sum();
        total += w * row;
    }
    Ok(total)
}

/// Exact smoothing or the linear-binning approximation on `bins` bins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoothingPath {
    Exact,
    Binned { bins: usize },
}

/// Outcome of one `(variable(s), bandwidth)` cell of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellStatus {
    Ok,
    /// Some grid points had singular local systems.
    Incomplete,
    /// Bandwidth below the binned minimum for the grid.
    BandwidthTooSmall,
}

impl CellStatus {
    pub fn name(self) -> &'static str {
        match self {
            CellStatus::Ok => "ok",
            CellStatus::Incomplete => "incomplete",
            CellStatus::BandwidthTooSmall => "bandwidth-too-small",
        }
    }
}

/// One MISE entry; `value` is `NaN` unless `status` is `Ok`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiseCell {
    pub value: f64,
    pub status: CellStatus,
}

impl MiseCell {
    pub fn ok(value: f64) -> Self {
        Self {
            value,
            status: CellStatus::Ok,
        }
    }

    pub fn failed(status: CellStatus) -> Self {
        Self {
            value: f64::NAN,
            status,
        }
    }

    pub fn get(&self) -> Option<f64> {
        (self.status == CellStatus::Ok).then_some(self.value)
    }

    fn from_result(r: Result<f64>) -> Result<Self> {
        match r {
            Ok(v) => Ok(Self::ok(v)),
            Err(Error::IncompleteEstimate { .. }) => Ok(Self::failed(CellStatus::Incomplete)),
            Err(Error::BandwidthTooSmallForGrid { .. }) => {
                Ok(Self::failed(CellStatus::BandwidthTooSmall))
            }
            Err(e) => Err(e),
        }
    }
}

/// MISE per variable (and per variable pair) over bandwidth grids.
#[derive(Debug, Clone, PartialEq)]
pub struct MiseReport {
    pub n_vars: usize,
    pub quadrature: Quadrature,
    pub grid: Vec<f64>,
    pub mean_bandwidths: Vec<f64>,
    pub cov_bandwidths: Vec<f64>,
    /// `mise_mean[j][h]`
    pub mise_mean: Vec<Vec<MiseCell>>,
    /// `mise_cov[j][k][h]`; empty when covariances were not swept.
    pub mise_cov: Vec<Vec<Vec<MiseCell>>>,
}

fn best(cells: &[MiseCell]) -> Option<(usize, f64)> {
    cells
        .iter()
        .enumerate()
        .filter_map(|(h, c)| c.get().map(|v| (h, v)))
        .fold(None, |acc, (h, v)| match acc {
            Some((_, bv)) if bv <= v => acc,
            _ => Some((h, v)),
        })
}

impl MiseReport {
    /// Index and value of the smallest mean MISE of variable `j`.
    pub fn best_mean(&self, j: usize) -> Option<(usize, f64)> {
        best(&self.mise_mean[j])
    }

    /// Index and value of the smallest covariance MISE of pair `(j, k)`.
    pub fn best_cov(&self, j: usize, k: usize) -> Option<(usize, f64)> {
        best(&self.mise_cov[j][k])
    }

    /// Bandwidth minimizing the mean MISE of variable `j`.
    pub fn argmin_mean(&self, j: usize) -> Option<f64> {
        self.best_mean(j).map(|(h, _)| self.mean_bandwidths[h])
    }

    pub fn argmin_cov(&self, j: usize, k: usize) -> Option<f64> {
        self.best_cov(j, k).map(|(h, _)| self.cov_bandwidths[h])
    }

    /// The report restricted to the first `p` variables.
    pub fn leading(&self, p: usize) -> Result<MiseReport> {
        if p == 0 || p > self.n_vars {
            return Err(Error::IndexOutOfRange {
                what: "variable count",
                index: p,
                limit: self.n_vars,
            });
        }
        let mise_cov = if self.mise_cov.is_empty() {
            Vec::new()
        } else {
            self.mise_cov[..p].iter().map(|r| r[..p].to_vec()).collect()
        };
        Ok(MiseReport {
            n_vars: p,
            mise_mean: self.mise_mean[..p].to_vec(),
            mise_cov,
            ..self.clone()
        })
    }

    /// Failed mean cells plus failed covariance cells with `j <= k`.
    pub fn failed_cells(&self) -> usize {
        let mean = self.mise_mean.iter().flatten();
        let cov = self.mise_cov.iter().enumerate().flat_map(|(j, rows)| rows[j..].iter().flatten());
        mean.chain(cov).filter(|c| c.get().is_none()).count()
    }

    /// Min-over-bandwidth tables: rows are variables (mean) or pairs in
    /// row-major `(j, k)` order (covariance).
    pub fn table(&self, target: Target) -> Vec<Vec<MiseCell>> {
        match target {
            Target::Mean => self.mise_mean.clone(),
            Target::Cov => self.mise_cov.iter().flatten().cloned().collect(),
        }
    }
}

/// Which estimator a quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Mean,
    Cov,
}

/// Sorted, deduplicated, validated bandwidth set.
pub fn normalize_bandwidths(bandwidths: &[f64]) -> Result<Vec<f64>> {
    if bandwidths.is_empty() {
        return Err(Error::InvalidArgument("bandwidth set is empty".into()));
    }
    let mut hs = bandwidths.to_vec();
    for &h in &hs {
        if !(h > 0.0 && h <= 1.0) {
            return Err(Error::InvalidBandwidth(h));
        }
    }
    hs.sort_by(f64::total_cmp);
    hs.dedup();
    Ok(hs)
}

/// `count` bandwidths spaced geometrically between `lo` and `hi`.
pub fn geometric_bandwidths(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|s| lo * (hi / lo).powf(s as f64 / (count - 1) as f64))
            .collect(),
    }
}

/// Fixed settings of a bandwidth sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub kernel: Kernel,
    pub scheme: WeightScheme,
    pub path: SmoothingPath,
    pub quadrature: Quadrature,
    /// Evaluation grid, shared by both axes of covariance surfaces.
    pub grid: Vec<f64>,
}

fn spec(settings: &SweepSettings, h: f64) -> SmootherSpec {
    SmootherSpec {
        kernel: settings.kernel,
        bandwidth: h,
        scheme: settings.scheme,
    }
}

/// Mean curve of variable `j` at bandwidth `h` on the settings' path.
pub fn mean_curve(
    data: &FunctionalDataset,
    j: usize,
    h: f64,
    settings: &SweepSettings,
) -> Result<CurveEstimate> {
    let spec = spec(settings, h);
    spec.validate()?;
    let weights = mean_weights(data, j, settings.scheme)?;
    match settings.path {
        SmoothingPath::Exact => {
            estimate_mean_curve_weighted(data, j, &settings.grid, spec.kernel, h, &weights)
        }
        SmoothingPath::Binned { bins } => {
            let binned = bin_marginal(data, j, bins, None::<&ZeroMean>)?;
            estimate_mean_binned(&binned, &weights, &settings.grid, &spec)
        }
    }
}

/// Covariance surface of `(j, k)` at bandwidth `h` on the settings' path.
pub fn cov_surface<M: MeanModel + ?Sized>(
    data: &FunctionalDataset,
    j: usize,
    k: usize,
    h: f64,
    settings: &SweepSettings,
    means: &M,
) -> Result<SurfaceEstimate> {
    let spec = spec(settings, h);
    let grid = &settings.grid;
    match settings.path {
        SmoothingPath::Exact => estimate_cov_surface(data, j, k, grid, grid, &spec, means),
        SmoothingPath::Binned { bins } => {
            let weights = cov_weights(data, j, k, settings.scheme)?;
            bin_pairs(data, j, k, bins, means)?
                .aggregate(&weights)?
                .smooth(grid, grid, &spec)
        }
    }
}

/// MISE of every variable's mean estimate over the bandwidth set.
pub fn bandwidth_sweep_mean<T: Truth + ?Sized>(
    data: &FunctionalDataset,
    truth: &T,
    bandwidths: &[f64],
    settings: &SweepSettings,
) -> Result<MiseReport> {
    let hs = normalize_bandwidths(bandwidths)?;
    let p = data.n_vars();
    let per_var: Vec<Result<Vec<MiseCell>>> = par::map_indices(p, |j| {
        let weights = mean_weights(data, j, settings.scheme)?;
        let binned = match settings.path {
            SmoothingPath::Binned { bins } => Some(bin_marginal(data, j, bins, None::<&ZeroMean>)?),
            SmoothingPath::Exact => None,
        };
        hs.iter()
            .map(|&h| {
                let spec = spec(settings, h);
                let curve = match &binned {
                    Some(b) => estimate_mean_binned(b, &weights, &settings.grid, &spec),
                    None => estimate_mean_curve_weighted(
                        data,
                        j,
                        &settings.grid,
                        spec.kernel,
                        h,
                        &weights,
                    ),
                };
                MiseCell::from_result(
                    curve.and_then(|c| mise_mean(&c, |u| truth.mean(j, u), settings.quadrature)),
                )
            })
            .collect()
    });
    Ok(MiseReport {
        n_vars: p,
        quadrature: settings.quadrature,
        grid: settings.grid.clone(),
        mean_bandwidths: hs,
        cov_bandwidths: Vec::new(),
        mise_mean: per_var.into_iter().collect::<Result<_>>()?,
        mise_cov: Vec::new(),
    })
}

/// MISE of every covariance surface `(j, k)` over the bandwidth set, after
/// centering with `means`. Only `j <= k` is smoothed; `(k, j)` reuses it
/// since `Sigma_kj(u, v) = Sigma_jk(v, u)` has the same integrated error.
pub fn bandwidth_sweep_cov<T: Truth + ?Sized, M: MeanModel + ?Sized>(
    data: &FunctionalDataset,
    truth: &T,
    bandwidths: &[f64],
    settings: &SweepSettings,
    means: &M,
) -> Result<Vec<Vec<Vec<MiseCell>>>> {
    let hs = normalize_bandwidths(bandwidths)?;
    let p = data.n_vars();
    let pairs: Vec<(usize, usize)> = (0..p).flat_map(|j| (j..p).map(move |k| (j, k))).collect();
    let grid = &settings.grid;
    let results: Vec<Result<Vec<MiseCell>>> = par::map_indices(pairs.len(), |idx| {
        let (j, k) = pairs[idx];
        let truth_grid = truth_surface(grid, grid, |u, v| truth.cov(j, k, u, v));
        match settings.path {
            SmoothingPath::Exact => hs
                .iter()
                .map(|&h| {
                    let s = estimate_cov_surface(data, j, k, grid, grid, &spec(settings, h), means);
                    MiseCell::from_result(s.and_then(|s| ise_surface(&s, &truth_grid, settings.quadrature)))
                })
                .collect(),
            SmoothingPath::Binned { bins } => {
                let weights = cov_weights(data, j, k, settings.scheme)?;
                let moments = bin_pairs(data, j, k, bins, means)?.aggregate(&weights)?;
                hs.iter()
                    .map(|&h| {
                        let s = moments.smooth(grid, grid, &spec(settings, h));
                        MiseCell::from_result(
                            s.and_then(|s| ise_surface(&s, &truth_grid, settings.quadrature)),
                        )
                    })
                    .collect()
            }
        }
    });
    let mut table = vec![vec![Vec::new(); p]; p];
    for ((j, k), cells) in pairs.into_iter().zip(results) {
        let cells = cells?;
        table[k][j] = cells.clone();
        table[j][k] = cells;
    }
    Ok(table)
}

/// How observations are centered before raw covariances are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Centering {
    /// The true mean.
    Truth,
    /// Each variable's estimated mean at its MISE-minimizing bandwidth.
    #[default]
    Estimated,
}

/// Mean and covariance sweep. Covariances are centered according to
/// `centering`.
pub fn bandwidth_sweep<T: Truth + ?Sized>(
    data: &FunctionalDataset,
    truth: &T,
    mean_bandwidths: &[f64],
    cov_bandwidths: &[f64],
    settings: &SweepSettings,
    centering: Centering,
) -> Result<MiseReport> {
    let mut report = bandwidth_sweep_mean(data, truth, mean_bandwidths, settings)?;
    report.cov_bandwidths = normalize_bandwidths(cov_bandwidths)?;
    report.mise_cov = match centering {
        Centering::Truth => {
            let means = KnownMean(|j: usize, u: f64| truth.mean(j, u));
            bandwidth_sweep_cov(data, truth, cov_bandwidths, settings, &means)?
        }
        Centering::Estimated => {
            let curves = (0..data.n_vars())
                .map(|j| {
                    let h = report
                        .argmin_mean(j)
                        .ok_or(Error::IncompleteEstimate { failed: report.mise_mean[j].len() })?;
                    mean_curve(data, j, h, settings)
                })
                .collect::<Result<Vec<_>>>()?;
            bandwidth_sweep_cov(data, truth, cov_bandwidths, settings, &curves)?
        }
    };
    Ok(report)
}

/// Averages and maxima over variables of the elementwise minimal MISEs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiseSummary {
    pub ave_mean: f64,
    pub max_mean: f64,
    /// `None` when the report has no covariance sweep.
    pub ave_cov: Option<f64>,
    pub max_cov: Option<f64>,
}

/// `(mean, max)` over rows of the row-wise minimum.
pub fn ave_max(table: &[Vec<MiseCell>]) -> Result<(f64, f64)> {
    if table.is_empty() {
        return Err(Error::InvalidArgument("empty MISE table".into()));
    }
    let mins = table
        .iter()
        .map(|row| {
            best(row)
                .map(|(_, v)| v)
                .ok_or(Error::IncompleteEstimate { failed: row.len() })
        })
        .collect::<Result<Vec<f64>>>()?;
    let ave = mins.iter().sum::<f64>() / mins.len() as f64;
    let max = mins.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((ave, max))
}

/// AveMISE and MaxMISE for the mean and, when present, the covariance.
pub fn aggregate_mises(report: &MiseReport) -> Result<MiseSummary> {
    let (ave_mean, max_mean) = ave_max(&report.mise_mean)?;
    let (ave_cov, max_cov) = if report.mise_cov.is_empty() {
        (None, None)
    } else {
        let (a, m) = ave_max(&report.table(Target::Cov))?;
        (Some(a), Some(m))
    };
    Ok(MiseSummary {
        ave_mean,
        max_mean,
        ave_cov,
        max_cov,
    })
}

/// Largest number of assignments the brute-force search will visit.
pub const BRUTE_FORCE_LIMIT: f64 = 1e7;

/// `min over bandwidth assignments (one per row) of max over rows`, by full
/// enumeration. Failed cells never win.
pub fn global_opt_table(table: &[Vec<MiseCell>]) -> Result<f64> {
    if table.is_empty() || table.iter().any(Vec::is_empty) {
        return Err(Error::InvalidArgument("empty MISE table".into()));
    }
    let count: f64 = table.iter().map(|r| r.len() as f64).product();
    if count > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            count,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let value = |row: &[MiseCell], m: usize| row[m].get().unwrap_or(f64::INFINITY);
    let mut choice = vec![0usize; table.len()];
    let mut best = f64::INFINITY;
    loop {
        let worst = table
            .iter()
            .zip(&choice)
            .map(|(row, &m)| value(row, m))
            .fold(f64::NEG_INFINITY, f64::max);
        best = best.min(worst);
        // Odometer increment.
        let mut pos = 0;
        loop {
            if pos == choice.len() {
                return if best.is_finite() {
                    Ok(best)
                } else {
                    Err(Error::IncompleteEstimate { failed: 0 })
                };
            }
            choice[pos] += 1;
            if choice[pos] < table[pos].len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

/// Brute-force minimal elementwise maximum MISE over all bandwidth
/// assignments.
pub fn global_opt_bruteforce(report: &MiseReport, which: Target) -> Result<f64> {
    global_opt_table(&report.table(which))
}

/// Sampling regime of the design.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Sparse,
    SemiDense,
    UltraDense,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Sparse => "sparse",
            Regime::SemiDense => "semi-dense",
            Regime::UltraDense => "ultra-dense",
        }
    }
}

/// `log p`, floored at one so that the regime threshold stays finite for
/// small `p`.
pub fn log_dim(p: usize) -> f64 {
    (p as f64).ln().max(1.0)
}

/// Sampling-frequency threshold `n^{1/4} (log p)^{-1/4}` between the
/// semi-dense and ultra-dense regimes.
pub fn regime_threshold(n: usize, p: usize) -> f64 {
    (n as f64).powf(0.25) * log_dim(p).powf(-0.25)
}

/// Regime of an average sampling frequency: semi-dense within a factor of
/// two of the threshold, sparse below, ultra-dense above.
pub fn classify_regime(tbar: f64, n: usize, p: usize) -> Regime {
    let tau = regime_threshold(n, p);
    if tbar < 0.5 * tau {
        Regime::Sparse
    } else if tbar <= 2.0 * tau {
        Regime::SemiDense
    } else {
        Regime::UltraDense
    }
}

/// `n (1 ∧ T̄ h)`
pub fn gamma(n: usize, tbar_mean: f64, h: f64) -> f64 {
    n as f64 * (tbar_mean * h).min(1.0)
}

/// `n (1 ∧ T̄² h²)`
pub fn nu(n: usize, tbar_cov: f64, h: f64) -> f64 {
    n as f64 * (tbar_cov * tbar_cov * h * h).min(1.0)
}

/// Effective sample sizes and regime of a design.
#[derive(Debug, Clone, PartialEq)]
pub struct RateDiagnostics {
    pub n: usize,
    pub p: usize,
    /// `T̄_{mu,j} = n^{-1} sum_i T_ij`
    pub tbar_mean: Vec<f64>,
    /// `T̄_{Sigma,jk} = [n^{-1} sum_i T_ij (T_ik - 1{j=k})]^{1/2}`
    pub tbar_cov: Vec<Vec<f64>>,
    pub gamma: Vec<f64>,
    pub nu: Vec<Vec<f64>>,
    pub threshold: f64,
    /// Regime of the average `T̄_{mu,j}` over variables.
    pub regime: Regime,
}

pub fn rate_diagnostics(data: &FunctionalDataset, h_mean: f64, h_cov: f64) -> RateDiagnostics {
    let (n, p) = (data.n_subjects(), data.n_vars());
    let nf = n as f64;
    let tbar_mean: Vec<f64> = (0..p)
        .map(|j| (0..n).map(|i| data.count(i, j) as f64).sum::<f64>() / nf)
        .collect();
    let tbar_cov: Vec<Vec<f64>> = (0..p)
        .map(|j| {
            (0..p)
                .map(|k| {
                    let pairs: usize = (0..n).map(|i| crate::data::pair_count(data, i, j, k)).sum();
                    (pairs as f64 / nf).sqrt()
                })
                .collect()
        })
        .collect();
    let gammas = tbar_mean.iter().map(|&t| gamma(n, t, h_mean)).collect();
    let nus = tbar_cov
        .iter()
        .map(|row| row.iter().map(|&t| nu(n, t, h_cov)).collect())
        .collect();
    let average = tbar_mean.iter().sum::<f64>() / p as f64;
    RateDiagnostics {
        n,
        p,
        threshold: regime_threshold(n, p),
        regime: classify_regime(average, n, p),
        tbar_mean,
        tbar_cov,
        gamma: gammas,
        nu: nus,
    }
}

/// Rate-optimal bandwidth with unit constant. For covariances `tbar` is
/// `T̄_Sigma`.
pub fn optimal_bandwidth(n: usize, tbar: f64, p: usize, target: Target, regime: Regime) -> f64 {
    let lp = log_dim(p);
    let nf = n as f64;
    match (regime, target) {
        (Regime::Sparse, Target::Mean) => (lp / nf).powf(0.2),
        (Regime::SemiDense, Target::Mean) => (lp / (nf * tbar)).powf(0.2),
        (Regime::Sparse, Target::Cov) => (lp / nf).powf(1.0 / 6.0),
        (Regime::SemiDense, Target::Cov) => (lp / (nf * tbar * tbar)).powf(1.0 / 6.0),
        (Regime::UltraDense, _) => (lp / nf).powf(0.25),
    }
}

/// Least-squares slope and intercept of `log y` on `log x`.
pub fn fit_rate_slope(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() {
        return Err(Error::Shape(format!("{} x values, {} y values", xs.len(), ys.len())));
    }
    if xs.len() < 3 {
        return Err(Error::InvalidArgument(
            "rate fit needs at least three points".into(),
        ));
    }
    if let Some(&bad) = xs.iter().chain(ys).find(|&&v| !(v > 0.0)) {
        return Err(Error::NonPositive(bad));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let m = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("rate fit needs distinct x values".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}
