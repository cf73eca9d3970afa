//! Exact local linear smoothers.
//!
//! The mean at `u` is the intercept of a kernel-weighted straight-line fit to
//! all observations of variable `j`; the covariance at `(u, v)` is the
//! intercept of a kernel-weighted plane fit to the raw covariances
//! `(Y_ijt - mu_j(U_ijt)) (Y_iks - mu_k(U_iks))`, leaving out the `t = s`
//! products when `j = k`. Sums run in a fixed order (subject, then
//! observation) so results are reproducible bit for bit.

use crate::data::{cov_weights, mean_weights, FunctionalDataset, WeightScheme};
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::linalg::{conditioning2, intercept2, Conditioning, GivensLs, Sym3};
use crate::par;

/// Kernel, bandwidth and weighting used by one smoothing pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmootherSpec {
    pub kernel: Kernel,
    pub bandwidth: f64,
    pub scheme: WeightScheme,
}

impl SmootherSpec {
    pub fn new(kernel: Kernel, bandwidth: f64, scheme: WeightScheme) -> Result<Self> {
        let spec = Self {
            kernel,
            bandwidth,
            scheme,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Epanechnikov kernel with per-observation weights.
    pub fn epanechnikov(bandwidth: f64) -> Result<Self> {
        Self::new(Kernel::Epanechnikov, bandwidth, WeightScheme::PerObservation)
    }

    pub fn with_scheme(self, scheme: WeightScheme) -> Self {
        Self { scheme, ..self }
    }

    pub fn with_bandwidth(self, bandwidth: f64) -> Result<Self> {
        Self::new(self.kernel, bandwidth, self.scheme)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.bandwidth > 0.0 && self.bandwidth <= 1.0) {
            return Err(Error::InvalidBandwidth(self.bandwidth));
        }
        Ok(())
    }
}

/// `r` equispaced points `0, 1/(r-1), ..., 1`.
pub fn uniform_grid(r: usize) -> Vec<f64> {
    match r {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..r).map(|i| i as f64 / (r - 1) as f64).collect(),
    }
}

pub(crate) fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("evaluation grid is empty".into()));
    }
    for &g in grid {
        if !(0.0..=1.0).contains(&g) {
            return Err(Error::TimeOutOfRange(g));
        }
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "evaluation grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// A curve estimated on a grid. Failed points hold `NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveEstimate {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub failures: Vec<usize>,
}

impl CurveEstimate {
    pub(crate) fn from_points(grid: Vec<f64>, points: Vec<Option<f64>>) -> Self {
        let failures = points
            .iter()
            .enumerate()
            .filter_map(|(g, v)| v.is_none().then_some(g))
            .collect();
        let values = points.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect();
        Self {
            grid,
            values,
            failures,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Linear interpolation between solved grid points, constant beyond
    /// the outermost ones. `NaN` when no point was solved.
    pub fn interpolate(&self, u: f64) -> f64 {
        let ok = |g: usize| !self.values[g].is_nan();
        let right = self.grid.partition_point(|&g| g < u);
        let hi = (right..self.grid.len()).find(|&g| ok(g));
        let lo = (0..right.min(self.grid.len())).rev().find(|&g| ok(g));
        match (lo, hi) {
            (Some(a), Some(b)) if a != b => {
                let (ga, gb) = (self.grid[a], self.grid[b]);
                let t = (u - ga) / (gb - ga);
                self.values[a] + t * (self.values[b] - self.values[a])
            }
            (Some(a), _) => self.values[a],
            (None, Some(b)) => self.values[b],
            (None, None) => f64::NAN,
        }
    }
}

/// A surface estimated on `grid_u x grid_v`, stored row-major. Failed cells
/// hold `NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceEstimate {
    pub grid_u: Vec<f64>,
    pub grid_v: Vec<f64>,
    pub values: Vec<f64>,
    pub failures: Vec<(usize, usize)>,
}

impl SurfaceEstimate {
    /// Assembles rows of cell results; symmetrizes when `symmetric`.
    pub(crate) fn from_rows(
        grid_u: Vec<f64>,
        grid_v: Vec<f64>,
        rows: Vec<Vec<Option<f64>>>,
        symmetric: bool,
    ) -> Self {
        let cols = grid_v.len();
        let mut values: Vec<f64> = rows
            .into_iter()
            .flatten()
            .map(|v| v.unwrap_or(f64::NAN))
            .collect();
        if symmetric {
            for r in 0..cols {
                for c in r + 1..cols {
                    let avg = 0.5 * (values[r * cols + c] + values[c * cols + r]);
                    values[r * cols + c] = avg;
                    values[c * cols + r] = avg;
                }
            }
        }
        let failures = values
            .iter()
            .enumerate()
            .filter_map(|(idx, v)| v.is_nan().then_some((idx / cols, idx % cols)))
            .collect();
        Self {
            grid_u,
            grid_v,
            values,
            failures,
        }
    }

    pub fn rows(&self) -> usize {
        self.grid_u.len()
    }

    pub fn cols(&self) -> usize {
        self.grid_v.len()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.grid_v.len() + c]
    }

    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }

    /// Range `max - min` over solved cells.
    pub fn range(&self) -> f64 {
        value_range(&self.values)
    }
}

pub(crate) fn value_range(values: &[f64]) -> f64 {
    let (lo, hi) = values
        .iter()
        .filter(|v| !v.is_nan())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if hi >= lo {
        hi - lo
    } else {
        0.0
    }
}

/// Mean functions used to center observations before forming raw
/// covariances.
pub trait MeanModel: Sync {
    fn mean(&self, j: usize, u: f64) -> f64;
}

/// Means known in closed form.
pub struct KnownMean<F>(pub F);

impl<F: Fn(usize, f64) -> f64 + Sync> MeanModel for KnownMean<F> {
    fn mean(&self, j: usize, u: f64) -> f64 {
        (self.0)(j, u)
    }
}

/// Treats the data as already centered.
pub struct ZeroMean;

impl MeanModel for ZeroMean {
    fn mean(&self, _: usize, _: f64) -> f64 {
        0.0
    }
}

/// Estimated mean curves, one per variable, read by linear interpolation.
impl MeanModel for [CurveEstimate] {
    fn mean(&self, j: usize, u: f64) -> f64 {
        self[j].interpolate(u)
    }
}

impl MeanModel for Vec<CurveEstimate> {
    fn mean(&self, j: usize, u: f64) -> f64 {
        self[j].interpolate(u)
    }
}

/// Per-subject residuals `Y_ijt - mu_j(U_ijt)`, aligned with the sorted
/// series.
pub fn residuals<M: MeanModel + ?Sized>(
    data: &FunctionalDataset,
    j: usize,
    means: &M,
) -> Result<Vec<Vec<f64>>> {
    data.check_var(j)?;
    let out: Vec<Vec<f64>> = (0..data.n_subjects())
        .map(|i| {
            let s = data.series(i, j);
            s.times()
                .iter()
                .zip(s.values())
                .map(|(&u, &y)| y - means.mean(j, u))
                .collect()
        })
        .collect();
    if out.iter().flatten().any(|r| !r.is_finite()) {
        return Err(Error::NonFinite("centering mean"));
    }
    Ok(out)
}

/// Local linear mean at `u` with explicit per-subject weights.
pub fn mean_at_weighted(
    data: &FunctionalDataset,
    j: usize,
    weights: &[f64],
    kernel: Kernel,
    h: f64,
    u: f64,
) -> Option<f64> {
    let (mut s0, mut s1, mut s2, mut r0, mut r1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, &v) in weights.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let s = data.series(i, j);
        let (times, ys) = (s.times(), s.values());
        for t in s.window(u, h) {
            let x = (times[t] - u) / h;
            let kw = v * kernel.eval(x) / h;
            s0 += kw;
            s1 += kw * x;
            s2 += kw * x * x;
            r0 += kw * ys[t];
            r1 += kw * x * ys[t];
        }
    }
    match conditioning2(s0, s1, s2) {
        Conditioning::Singular => None,
        Conditioning::Good => intercept2(s0, s1, s2, r0, r1),
        Conditioning::Poor => {
            let mut ls = GivensLs::<2>::default();
            for (i, &v) in weights.iter().enumerate() {
                let s = data.series(i, j);
                for t in s.window(u, h) {
                    let x = (s.times()[t] - u) / h;
                    ls.push(v * kernel.eval(x) / h, [1.0, x], s.values()[t]);
                }
            }
            ls.intercept()
        }
    }
}

/// Local linear estimate of `mu_j(u)`.
pub fn estimate_mean_at(
    data: &FunctionalDataset,
    j: usize,
    u: f64,
    spec: &SmootherSpec,
) -> Result<f64> {
    spec.validate()?;
    let weights = mean_weights(data, j, spec.scheme)?;
    mean_at_weighted(data, j, &weights, spec.kernel, spec.bandwidth, u).ok_or_else(|| {
        Error::SingularSystem {
            location: format!("var {j}, u = {u}"),
        }
    })
}

/// Mean curve with explicit per-subject weights.
pub fn estimate_mean_curve_weighted(
    data: &FunctionalDataset,
    j: usize,
    grid: &[f64],
    kernel: Kernel,
    h: f64,
    weights: &[f64],
) -> Result<CurveEstimate> {
    data.check_var(j)?;
    validate_grid(grid)?;
    if weights.len() != data.n_subjects() {
        return Err(Error::Shape(format!(
            "{} weights for {} subjects",
            weights.len(),
            data.n_subjects()
        )));
    }
    let points = par::map_indices(grid.len(), |g| {
        mean_at_weighted(data, j, weights, kernel, h, grid[g])
    });
    Ok(CurveEstimate::from_points(grid.to_vec(), points))
}

/// Local linear estimate of `mu_j` at every grid point. Unsolvable points
/// are recorded in `failures`.
pub fn estimate_mean_curve(
    data: &FunctionalDataset,
    j: usize,
    grid: &[f64],
    spec: &SmootherSpec,
) -> Result<CurveEstimate> {
    spec.validate()?;
    let weights = mean_weights(data, j, spec.scheme)?;
    estimate_mean_curve_weighted(data, j, grid, spec.kernel, spec.bandwidth, &weights)
}

/// Raw covariance triples `(U_ijt, U_iks, Theta_ijkts)` of subject `i`,
/// without the `t = s` products when `j = k`.
pub fn raw_covariances<M: MeanModel + ?Sized>(
    data: &FunctionalDataset,
    j: usize,
    k: usize,
    means: &M,
    i: usize,
) -> Result<Vec<(f64, f64, f64)>> {
    data.check_var(j)?;
    data.check_var(k)?;
    if i >= data.n_subjects() {
        return Err(Error::IndexOutOfRange {
            what: "subject",
            index: i,
            limit: data.n_subjects(),
        });
    }
    let (sj, sk) = (data.series(i, j), data.series(i, k));
    let rj: Vec<f64> = sj
        .times()
        .iter()
        .zip(sj.values())
        .map(|(&u, &y)| y - means.mean(j, u))
        .collect();
    let rk: Vec<f64> = sk
        .times()
        .iter()
        .zip(sk.values())
        .map(|(&u, &y)| y - means.mean(k, u))
        .collect();
    let mut out = Vec::with_capacity(rj.len() * rk.len());
    for (t, (&ut, &at)) in sj.times().iter().zip(&rj).enumerate() {
        for (s, (&us, &bs)) in sk.times().iter().zip(&rk).enumerate() {
            if j == k && t == s {
                continue;
            }
            out.push((ut, us, at * bs));
        }
    }
    Ok(out)
}

/// Intercept of the kernel-weighted plane fit to raw covariance triples
/// `(u_t, v_s, theta)` grouped by subject, each group carrying its weight.
pub fn local_plane_intercept<G: AsRef<[(f64, f64, f64)]>>(
    groups: &[(f64, G)],
    kernel: Kernel,
    h: f64,
    u: f64,
    v: f64,
) -> Option<f64> {
    let mut m = Sym3::default();
    let mut z = [0.0; 3];
    for (w, triples) in groups {
        for &(ut, vs, theta) in triples.as_ref() {
            let (x, y) = ((ut - u) / h, (vs - v) / h);
            let kw = w * kernel.eval(x) * kernel.eval(y) / (h * h);
            if kw == 0.0 {
                continue;
            }
            m.m00 += kw;
            m.m01 += kw * x;
            m.m02 += kw * y;
            m.m11 += kw * x * x;
            m.m12 += kw * x * y;
            m.m22 += kw * y * y;
            z[0] += kw * theta;
            z[1] += kw * x * theta;
            z[2] += kw * y * theta;
        }
    }
    match m.conditioning() {
        Conditioning::Singular => None,
        Conditioning::Good => m.intercept(z),
        Conditioning::Poor => {
            let mut ls = GivensLs::<3>::default();
            for (w, triples) in groups {
                for &(ut, vs, theta) in triples.as_ref() {
                    let (x, y) = ((ut - u) / h, (vs - v) / h);
                    ls.push(w * kernel.eval(x) * kernel.eval(y) / (h * h), [1.0, x, y], theta);
                }
            }
            ls.intercept()
        }
    }
}

/// Residualized data for one `(j, k)` pair with precomputed weights.
struct PairData<'a> {
    data: &'a FunctionalDataset,
    j: usize,
    k: usize,
    weights: Vec<f64>,
    res_j: Vec<Vec<f64>>,
    res_k: Vec<Vec<f64>>,
}

impl<'a> PairData<'a> {
    fn new<M: MeanModel + ?Sized>(
        data: &'a FunctionalDataset,
        j: usize,
        k: usize,
        scheme: WeightScheme,
        means: &M,
    ) -> Result<Self> {
        let weights = cov_weights(data, j, k, scheme)?;
        let res_j = residuals(data, j, means)?;
        let res_k = if j == k {
            res_j.clone()
        } else {
            residuals(data, k, means)?
        };
        Ok(Self {
            data,
            j,
            k,
            weights,
            res_j,
            res_k,
        })
    }

    /// Intercept of the local plane at `(u, v)`, given each subject's
    /// kernel-window index ranges on both variables.
    fn cell(
        &self,
        kernel: Kernel,
        h: f64,
        u: f64,
        v: f64,
        win_u: &[std::ops::Range<usize>],
        win_v: &[std::ops::Range<usize>],
    ) -> Option<f64> {
        let mut m = Sym3::default();
        let mut z = [0.0; 3];
        let h2 = h * h;
        for (i, &w) in self.weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let tu = self.data.series(i, self.j).times();
            let tv = self.data.series(i, self.k).times();
            for t in win_u[i].clone() {
                let x = (tu[t] - u) / h;
                let kx = w * kernel.eval(x) / h2;
                let rt = self.res_j[i][t];
                for s in win_v[i].clone() {
                    if self.j == self.k && t == s {
                        continue;
                    }
                    let y = (tv[s] - v) / h;
                    let kw = kx * kernel.eval(y);
                    let theta = rt * self.res_k[i][s];
                    m.m00 += kw;
                    m.m01 += kw * x;
                    m.m02 += kw * y;
                    m.m11 += kw * x * x;
                    m.m12 += kw * x * y;
                    m.m22 += kw * y * y;
                    z[0] += kw * theta;
                    z[1] += kw * x * theta;
                    z[2] += kw * y * theta;
                }
            }
        }
        match m.conditioning() {
            Conditioning::Singular => None,
            Conditioning::Good => m.intercept(z),
            Conditioning::Poor => self.refit(kernel, h, u, v, win_u, win_v),
        }
    }

    /// Orthogonal re-solve of a poorly conditioned cell.
    fn refit(
        &self,
        kernel: Kernel,
        h: f64,
        u: f64,
        v: f64,
        win_u: &[std::ops::Range<usize>],
        win_v: &[std::ops::Range<usize>],
    ) -> Option<f64> {
        let mut ls = GivensLs::<3>::default();
        for (i, &w) in self.weights.iter().enumerate() {
            let tu = self.data.series(i, self.j).times();
            let tv = self.data.series(i, self.k).times();
            for t in win_u[i].clone() {
                let x = (tu[t] - u) / h;
                for s in win_v[i].clone() {
                    if self.j == self.k && t == s {
                        continue;
                    }
                    let y = (tv[s] - v) / h;
                    let kw = w * kernel.eval(x) * kernel.eval(y) / (h * h);
                    ls.push(kw, [1.0, x, y], self.res_j[i][t] * self.res_k[i][s]);
                }
            }
        }
        ls.intercept()
    }

    fn windows(&self, var: usize, at: f64, h: f64) -> Vec<std::ops::Range<usize>> {
        (0..self.data.n_subjects())
            .map(|i| self.data.series(i, var).window(at, h))
            .collect()
    }
}

/// Local linear surface estimate of `Sigma_jk(u, v)`.
pub fn estimate_cov_at<M: MeanModel + ?Sized>(
    data: &FunctionalDataset,
    j: usize,
    k: usize,
    u: f64,
    v: f64,
    spec: &SmootherSpec,
    means: &M,
) -> Result<f64> {
    spec.validate()?;
    let pd = PairData::new(data, j, k, spec.scheme, means)?;
    let h = spec.bandwidth;
    let (wu, wv) = (pd.windows(j, u, h), pd.windows(k, v, h));
    pd.cell(spec.kernel, h, u, v, &wu, &wv)
        .ok_or_else(|| Error::SingularSystem {
            location: format!("vars ({j}, {k}), (u, v) = ({u}, {v})"),
        })
}

/// Local linear surface estimate of `Sigma_jk` on `grid_u x grid_v`. For
/// `j = k` on a square grid the result is symmetrized as `(M + M^T) / 2`.
pub fn estimate_cov_surface<M: MeanModel + ?Sized>(
    data: &FunctionalDataset,
    j: usize,
    k: usize,
    grid_u: &[f64],
    grid_v: &[f64],
    spec: &SmootherSpec,
    means: &M,
) -> Result<SurfaceEstimate> {
    spec.validate()?;
    validate_grid(grid_u)?;
    validate_grid(grid_v)?;
    let pd = PairData::new(data, j, k, spec.scheme, means)?;
    let h = spec.bandwidth;
    let win_v: Vec<_> = grid_v.iter().map(|&v| pd.windows(k, v, h)).collect();
    let rows = par::map_indices(grid_u.len(), |r| {
        let u = grid_u[r];
        let win_u = pd.windows(j, u, h);
        grid_v
            .iter()
            .zip(&win_v)
            .map(|(&v, wv)| pd.cell(spec.kernel, h, u, v, &win_u, wv))
            .collect()
    });
    let symmetric = j == k && grid_u == grid_v;
    Ok(SurfaceEstimate::from_rows(
        grid_u.to_vec(),
        grid_v.to_vec(),
        rows,
        symmetric,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_dataset(seed: u64, n: usize, p: usize, t: usize) -> FunctionalDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pairs = (0..n)
            .map(|_| {
                (0..p)
                    .map(|_| {
                        (0..t)
                            .map(|_| (rng.random::<f64>(), rng.random::<f64>() * 4.0 - 2.0))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        FunctionalDataset::from_pairs(pairs).unwrap()
    }

    fn map_values(d: &FunctionalDataset, f: impl Fn(usize, f64) -> f64) -> FunctionalDataset {
        let pairs = (0..d.n_subjects())
            .map(|i| {
                (0..d.n_vars())
                    .map(|j| d.series(i, j).times().iter().map(|&u| (u, f(j, u))).collect())
                    .collect()
            })
            .collect();
        FunctionalDataset::from_pairs(pairs).unwrap()
    }

    /// Dense weighted least squares on the design (1, x): forms the full
    /// observation list and solves the normal equations by Gaussian
    /// elimination with partial pivoting.
    fn dense_wls(rows: &[(Vec<f64>, f64, f64)]) -> f64 {
        let d = rows[0].0.len();
        let mut a = vec![vec![0.0; d + 1]; d];
        for (x, y, w) in rows {
            for r in 0..d {
                for c in 0..d {
                    a[r][c] += w * x[r] * x[c];
                }
                a[r][d] += w * x[r] * y;
            }
        }
        for col in 0..d {
            let piv = (col..d)
                .max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))
                .unwrap();
            a.swap(col, piv);
            for r in 0..d {
                if r != col {
                    let f = a[r][col] / a[col][col];
                    for c in col..=d {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
        a[0][d] / a[0][0]
    }

    #[test]
    fn reproduces_constants_and_lines() {
        let d = random_dataset(3, 30, 1, 8);
        let spec = SmootherSpec::epanechnikov(0.2).unwrap();
        let grid = uniform_grid(21);
        let constant = map_values(&d, |_, _| 3.7);
        let curve = estimate_mean_curve(&constant, 0, &grid, &spec).unwrap();
        assert!(curve.is_complete());
        assert!(curve.values.iter().all(|v| (v - 3.7).abs() < 1e-12));

        let line = map_values(&d, |_, u| 2.0 * u);
        let curve = estimate_mean_curve(&line, 0, &grid, &spec).unwrap();
        for (g, v) in curve.grid.iter().zip(&curve.values) {
            assert!((v - 2.0 * g).abs() < 1e-10);
        }
        assert!((estimate_mean_at(&line, 0, 0.5, &spec).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn mean_matches_dense_oracle() {
        let d = random_dataset(11, 5, 1, 4);
        let spec = SmootherSpec::epanechnikov(0.35).unwrap();
        let w = mean_weights(&d, 0, spec.scheme).unwrap();
        for &u in &[0.0, 0.3, 0.5, 0.77, 1.0] {
            let mut rows = Vec::new();
            for i in 0..d.n_subjects() {
                let s = d.series(i, 0);
                for (&t, &y) in s.times().iter().zip(s.values()) {
                    let k = Kernel::Epanechnikov.eval((t - u) / 0.35) / 0.35;
                    if k > 0.0 {
                        rows.push((vec![1.0, (t - u) / 0.35], y, w[i] * k));
                    }
                }
            }
            match estimate_mean_at(&d, 0, u, &spec) {
                Ok(est) => assert!((est - dense_wls(&rows)).abs() < 1e-10),
                Err(Error::SingularSystem { .. }) => assert!(rows.len() < 2),
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn empty_window_is_reported() {
        let d = FunctionalDataset::from_pairs(vec![vec![vec![(0.0, 1.0), (0.05, 2.0)]]]).unwrap();
        let spec = SmootherSpec::epanechnikov(0.1).unwrap();
        assert!(matches!(
            estimate_mean_at(&d, 0, 0.9, &spec),
            Err(Error::SingularSystem { .. })
        ));
        let curve = estimate_mean_curve(&d, 0, &[0.0, 0.5, 1.0], &spec).unwrap();
        assert_eq!(curve.failures, vec![1, 2]);
        assert!(curve.values[1].is_nan());
    }

    #[test]
    fn raw_covariance_counts_and_values() {
        let d = FunctionalDataset::from_pairs(vec![vec![
            vec![(0.1, 1.0), (0.4, 2.0)],
            vec![(0.2, 3.0), (0.5, -1.0), (0.9, 0.5)],
        ]])
        .unwrap();
        assert_eq!(raw_covariances(&d, 0, 0, &ZeroMean, 0).unwrap().len(), 2);
        assert_eq!(raw_covariances(&d, 0, 1, &ZeroMean, 0).unwrap().len(), 6);

        let d = FunctionalDataset::from_pairs(vec![vec![
            vec![(0.1, 1.0), (0.4, 2.0)],
            vec![(0.2, 3.0), (0.5, -1.0)],
        ]])
        .unwrap();
        let thetas: Vec<f64> = raw_covariances(&d, 0, 1, &ZeroMean, 0)
            .unwrap()
            .into_iter()
            .map(|t| t.2)
            .collect();
        assert_eq!(thetas, vec![3.0, -1.0, 6.0, -2.0]);
    }

    #[test]
    fn covariance_reproduces_planes() {
        // Y_k == 1 makes Theta = Y_j, so a line in u becomes a plane in (u, v).
        let d = random_dataset(5, 40, 2, 6);
        let spec = SmootherSpec::epanechnikov(0.3).unwrap();
        let plane = map_values(&d, |j, u| if j == 0 { 0.5 - 1.5 * u } else { 1.0 });
        let grid = uniform_grid(9);
        let s = estimate_cov_surface(&plane, 0, 1, &grid, &grid, &spec, &ZeroMean).unwrap();
        for r in 0..grid.len() {
            for c in 0..grid.len() {
                if !s.get(r, c).is_nan() {
                    assert!((s.get(r, c) - (0.5 - 1.5 * grid[r])).abs() < 1e-10);
                }
            }
        }
        let constant = map_values(&d, |_, _| 2.0);
        let s = estimate_cov_surface(&constant, 1, 1, &grid, &grid, &spec, &ZeroMean).unwrap();
        assert!(s.is_complete());
        assert!(s.values.iter().all(|v| (v - 4.0).abs() < 1e-10));
    }

    #[test]
    fn plane_fit_on_raw_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let groups: Vec<(f64, Vec<(f64, f64, f64)>)> = (0..8)
            .map(|_| {
                let triples = (0..20)
                    .map(|_| {
                        let (u, v) = (rng.random::<f64>(), rng.random::<f64>());
                        (u, v, 0.3 - 2.0 * u + 0.7 * v)
                    })
                    .collect();
                (1.0 / 160.0, triples)
            })
            .collect();
        for &(u, v) in &[(0.0, 0.0), (0.5, 0.5), (0.9, 0.2)] {
            let est = local_plane_intercept(&groups, Kernel::Epanechnikov, 0.3, u, v).unwrap();
            assert!((est - (0.3 - 2.0 * u + 0.7 * v)).abs() < 1e-10);
        }
    }

    #[test]
    fn marginal_surface_is_symmetric_and_roles_swap() {
        let d = random_dataset(9, 25, 2, 5);
        let spec = SmootherSpec::epanechnikov(0.25).unwrap();
        let grid = uniform_grid(11);
        let s = estimate_cov_surface(&d, 0, 0, &grid, &grid, &spec, &ZeroMean).unwrap();
        for r in 0..11 {
            for c in 0..11 {
                assert_eq!(s.get(r, c).to_bits(), s.get(c, r).to_bits());
            }
        }
        let a = estimate_cov_surface(&d, 0, 1, &grid, &grid, &spec, &ZeroMean).unwrap();
        let b = estimate_cov_surface(&d, 1, 0, &grid, &grid, &spec, &ZeroMean).unwrap();
        for r in 0..11 {
            for c in 0..11 {
                assert!((a.get(r, c) - b.get(c, r)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn interpolation_skips_failed_nodes() {
        let c = CurveEstimate::from_points(
            vec![0.0, 0.5, 1.0],
            vec![Some(0.0), None, Some(2.0)],
        );
        assert_eq!(c.interpolate(0.25), 0.5);
        assert_eq!(c.interpolate(1.0), 2.0);
        let dead = CurveEstimate::from_points(vec![0.0, 1.0], vec![None, None]);
        assert!(dead.interpolate(0.5).is_nan());
    }

    #[test]
    fn rejects_bad_bandwidths_and_grids() {
        assert_eq!(
            SmootherSpec::epanechnikov(0.0),
            Err(Error::InvalidBandwidth(0.0))
        );
        assert!(SmootherSpec::epanechnikov(1.5).is_err());
        let d = random_dataset(1, 3, 1, 3);
        let spec = SmootherSpec::epanechnikov(0.5).unwrap();
        assert!(estimate_mean_curve(&d, 0, &[0.5, 0.2], &spec).is_err());
        assert!(estimate_mean_curve(&d, 1, &[0.5], &spec).is_err());
    }
}
