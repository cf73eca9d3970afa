//! Linear-binning fast path.
//!
//! Observations are spread onto `R` equispaced bin centers on `[0, 1]`: an
//! observation at `u` between centers `c_l` and `c_{l+1}` gives weight
//! `1 - delta` to `l` and `delta` to `l + 1`, with `delta = (u - c_l)(R - 1)`.
//! This keeps the zeroth and first moments of the design, so kernel sums over
//! observations become sums over bins.
//!
//! For covariances, the product kernel and the basis `{1, (U - u)/h, (V - v)/h}`
//! separate, so a subject's contribution to every moment is an outer product
//! of two 1-D binned vectors. The `t = s` products of a marginal covariance
//! are removed exactly through `sum_{t != s} = (sum_t)(sum_s) - sum_{t = s}`.
//! Per-subject outer products are aggregated once into `R x R` moment
//! matrices; each bandwidth then costs two banded kernel passes.

use std::cell::Cell;

use crate::data::FunctionalDataset;
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::linalg::{conditioning2, intercept2, Conditioning, GivensLs, Sym3};
use crate::par;
use crate::smooth::{
    uniform_grid, validate_grid, CurveEstimate, MeanModel, SmootherSpec, SurfaceEstimate,
};

/// Bin count used when none is given.
pub const DEFAULT_BINS: usize = 100;

thread_local! {
    static KERNEL_EVALS: Cell<u64> = const { Cell::new(0) };
}

/// Kernel evaluations performed by binned smoothers on the current thread.
/// Instrumentation for complexity checks.
pub fn kernel_evaluations() -> u64 {
    KERNEL_EVALS.with(Cell::get)
}

/// Smallest bandwidth accepted by the binned smoothers on `bins` bins: the
/// window must span at least two bin spacings.
pub fn min_bandwidth(bins: usize) -> f64 {
    2.0 / (bins.max(2) - 1) as f64
}

fn check_bandwidth(spec: &SmootherSpec, bins: usize) -> Result<()> {
    spec.validate()?;
    let minimum = min_bandwidth(bins);
    // Tolerate representation error when h is computed as 2/(R-1) elsewhere.
    if spec.bandwidth < minimum * (1.0 - 1e-12) {
        return Err(Error::BandwidthTooSmallForGrid {
            bandwidth: spec.bandwidth,
            minimum,
            bins,
        });
    }
    Ok(())
}

fn check_bins(bins: usize) -> Result<()> {
    if bins < 2 {
        return Err(Error::InvalidArgument(format!(
            "linear binning needs at least 2 bins, got {bins}"
        )));
    }
    Ok(())
}

/// Left bin and the share `delta` assigned to its right neighbour.
#[inline]
fn locate(u: f64, bins: usize) -> (usize, f64) {
    let pos = u * (bins - 1) as f64;
    let left = (pos.floor() as usize).min(bins - 2);
    (left, pos - left as f64)
}

/// Kernel weights of every bin center relative to each evaluation point,
/// restricted to the band of bins inside the kernel window.
struct KernelTable {
    // For grid point g, bins first[g]..first[g] + k0[g].len().
    first: Vec<usize>,
    k0: Vec<Vec<f64>>,
    k1: Vec<Vec<f64>>,
    k2: Vec<Vec<f64>>,
}

impl KernelTable {
    fn new(kernel: Kernel, h: f64, centers: &[f64], grid: &[f64]) -> Self {
        let mut first = Vec::with_capacity(grid.len());
        let (mut k0, mut k1, mut k2) = (Vec::new(), Vec::new(), Vec::new());
        let mut evals = 0u64;
        for &u in grid {
            let lo = centers.partition_point(|&c| c < u - h);
            let hi = centers.partition_point(|&c| c <= u + h).max(lo);
            first.push(lo);
            let (mut a, mut b, mut c) = (Vec::new(), Vec::new(), Vec::new());
            for &center in &centers[lo..hi] {
                let x = (center - u) / h;
                let kv = kernel.eval(x) / h;
                evals += 1;
                a.push(kv);
                b.push(kv * x);
                c.push(kv * x * x);
            }
            k0.push(a);
            k1.push(b);
            k2.push(c);
        }
        KERNEL_EVALS.with(|n| n.set(n.get() + evals));
        Self { first, k0, k1, k2 }
    }

    fn band(&self, g: usize) -> std::ops::Range<usize> {
        self.first[g]..self.first[g] + self.k0[g].len()
    }
}

/// Linearly binned observations of one variable, per subject.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedMarginal {
    centers: Vec<f64>,
    // counts[i][r]: binned observation weight; sums[i][r]: binned weight * y.
    counts: Vec<Vec<f64>>,
    sums: Vec<Vec<f64>>,
}

impl BinnedMarginal {
    pub fn bins(&self) -> usize {
        self.centers.len()
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn n_subjects(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self, i: usize) -> &[f64] {
        &self.counts[i]
    }

    pub fn sums(&self, i: usize) -> &[f64] {
        &self.sums[i]
    }
}

/// Bins variable `j` onto `bins` equispaced centers. With `means`, responses
/// are centered before binning.
pub fn bin_marginal<M: MeanModel + ?Sized>(
    data: &FunctionalDataset,
    j: usize,
    bins: usize,
    means: Option<&M>,
) -> Result<BinnedMarginal> {
    data.check_var(j)?;
    check_bins(bins)?;
    let mut counts = Vec::with_capacity(data.n_subjects());
    let mut sums = Vec::with_capacity(data.n_subjects());
    for i in 0..data.n_subjects() {
        let s = data.series(i, j);
        let mut c = vec![0.0; bins];
        let mut y_sum = vec![0.0; bins];
        for (&u, &y) in s.times().iter().zip(s.values()) {
            let y = match means {
                Some(m) => y - m.mean(j, u),
                None => y,
            };
            let (l, d) = locate(u, bins);
            c[l] += 1.0 - d;
            c[l + 1] += d;
            y_sum[l] += (1.0 - d) * y;
            y_sum[l + 1] += d * y;
        }
        counts.push(c);
        sums.push(y_sum);
    }
    if sums.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("centering mean"));
    }
    Ok(BinnedMarginal {
        centers: uniform_grid(bins),
        counts,
        sums,
    })
}

/// Binned local linear mean curve.
pub fn estimate_mean_binned(
    binned: &BinnedMarginal,
    weights: &[f64],
    grid: &[f64],
    spec: &SmootherSpec,
) -> Result<CurveEstimate> {
    check_bandwidth(spec, binned.bins())?;
    validate_grid(grid)?;
    if weights.len() != binned.n_subjects() {
        return Err(Error::Shape(format!(
            "{} weights for {} subjects",
            weights.len(),
            binned.n_subjects()
        )));
    }
    let bins = binned.bins();
    let mut mass = vec![0.0; bins];
    let mut resp = vec![0.0; bins];
    for (i, &v) in weights.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        for r in 0..bins {
            mass[r] += v * binned.counts[i][r];
            resp[r] += v * binned.sums[i][r];
        }
    }
    let table = KernelTable::new(spec.kernel, spec.bandwidth, binned.centers(), grid);
    let points = par::map_indices(grid.len(), |g| {
        let band = table.band(g);
        let (mut s0, mut s1, mut s2, mut r0, mut r1) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (off, r) in band.enumerate() {
            s0 += table.k0[g][off] * mass[r];
            s1 += table.k1[g][off] * mass[r];
            s2 += table.k2[g][off] * mass[r];
            r0 += table.k0[g][off] * resp[r];
            r1 += table.k1[g][off] * resp[r];
        }
        match conditioning2(s0, s1, s2) {
            Conditioning::Singular => None,
            Conditioning::Good => intercept2(s0, s1, s2, r0, r1),
            Conditioning::Poor => {
                // Bin-level rows: weight K * mass, response resp / mass.
                let mut ls = GivensLs::<2>::default();
                for (off, r) in table.band(g).enumerate() {
                    if mass[r] > 0.0 {
                        let x = (binned.centers[r] - grid[g]) / spec.bandwidth;
                        ls.push(table.k0[g][off] * mass[r], [1.0, x], resp[r] / mass[r]);
                    }
                }
                ls.intercept()
            }
        }
    });
    Ok(CurveEstimate::from_points(grid.to_vec(), points))
}

/// One binned observation: its left bin, right share and centered response.
#[derive(Debug, Clone, Copy, PartialEq)]
struct BinnedPoint {
    left: usize,
    delta: f64,
    resid: f64,
}

/// Sparse binned vector: `(bin, weight, weight * residual)` sorted by bin.
type SparseBins = Vec<(usize, f64, f64)>;

fn sparse_bins(points: &[BinnedPoint], bins: usize) -> SparseBins {
    let mut a = vec![0.0; bins];
    let mut b = vec![0.0; bins];
    let mut touched = vec![false; bins];
    for p in points {
        for (r, share) in [(p.left, 1.0 - p.delta), (p.left + 1, p.delta)] {
            a[r] += share;
            b[r] += share * p.resid;
            touched[r] = true;
        }
    }
    (0..bins)
        .filter(|&r| touched[r])
        .map(|r| (r, a[r], b[r]))
        .collect()
}

/// Binned raw-covariance structure for a variable pair `(j, k)`.
///
/// Each subject keeps its binned weight and weight-times-residual vectors for
/// both variables. For `j = k` the individual binned points are kept too, so
/// the same-observation products can be subtracted exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedPairs {
    j: usize,
    k: usize,
    centers: Vec<f64>,
    side_j: Vec<SparseBins>,
    side_k: Vec<SparseBins>,
    same_point: Vec<Vec<BinnedPoint>>,
}

impl BinnedPairs {
    pub fn bins(&self) -> usize {
        self.centers.len()
    }

    pub fn vars(&self) -> (usize, usize) {
        (self.j, self.k)
    }

    pub fn n_subjects(&self) -> usize {
        self.side_j.len()
    }

    /// Reconstructed pair mass of subject `i`:
    /// `sum_{r, r'} a_j[r] a_k[r'] - (same-point mass when j = k)`.
    pub fn pair_mass(&self, i: usize) -> f64 {
        let total_j: f64 = self.side_j[i].iter().map(|e| e.1).sum();
        let total_k: f64 = self.side_k[i].iter().map(|e| e.1).sum();
        let same: f64 = self.same_point[i]
            .iter()
            .map(|p| {
                let s = (1.0 - p.delta) + p.delta;
                s * s
            })
            .sum();
        total_j * total_k - same
    }

    /// Aggregates the per-subject outer products with weights `w_ijk` into
    /// moment matrices.
    pub fn aggregate(&self, weights: &[f64]) -> Result<PairMoments> {
        if weights.len() != self.n_subjects() {
            return Err(Error::Shape(format!(
                "{} weights for {} subjects",
                weights.len(),
                self.n_subjects()
            )));
        }
        let bins = self.bins();
        let mut mass = vec![0.0; bins * bins];
        let mut resp = vec![0.0; bins * bins];
        for (i, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for &(r, a_r, b_r) in &self.side_j[i] {
                let (wa, wb) = (w * a_r, w * b_r);
                let row = r * bins;
                for &(c, a_c, b_c) in &self.side_k[i] {
                    mass[row + c] += wa * a_c;
                    resp[row + c] += wb * b_c;
                }
            }
            for p in &self.same_point[i] {
                let cells = [(p.left, 1.0 - p.delta), (p.left + 1, p.delta)];
                let e2 = p.resid * p.resid;
                for &(r, sr) in &cells {
                    for &(c, sc) in &cells {
                        mass[r * bins + c] -= w * sr * sc;
                        resp[r * bins + c] -= w * e2 * sr * sc;
                    }
                }
            }
        }
        Ok(PairMoments {
            symmetric: self.j == self.k,
            centers: self.centers.clone(),
            mass,
            resp,
        })
    }
}

/// Bins the centered observations of variables `j` and `k` for covariance
/// smoothing.
pub fn bin_pairs<M: MeanModel + ?Sized>(
    data: &FunctionalDataset,
    j: usize,
    k: usize,
    bins: usize,
    means: &M,
) -> Result<BinnedPairs> {
    data.check_var(j)?;
    data.check_var(k)?;
    check_bins(bins)?;
    let points_of = |i: usize, var: usize| -> Vec<BinnedPoint> {
        let s = data.series(i, var);
        s.times()
            .iter()
            .zip(s.values())
            .map(|(&u, &y)| {
                let (left, delta) = locate(u, bins);
                BinnedPoint {
                    left,
                    delta,
                    resid: y - means.mean(var, u),
                }
            })
            .collect()
    };
    let mut side_j = Vec::with_capacity(data.n_subjects());
    let mut side_k = Vec::with_capacity(data.n_subjects());
    let mut same_point = Vec::with_capacity(data.n_subjects());
    for i in 0..data.n_subjects() {
        let pj = points_of(i, j);
        if pj.iter().any(|p| !p.resid.is_finite()) {
            return Err(Error::NonFinite("centering mean"));
        }
        side_j.push(sparse_bins(&pj, bins));
        if j == k {
            side_k.push(side_j[i].clone());
            same_point.push(pj);
        } else {
            let pk = points_of(i, k);
            if pk.iter().any(|p| !p.resid.is_finite()) {
                return Err(Error::NonFinite("centering mean"));
            }
            side_k.push(sparse_bins(&pk, bins));
            same_point.push(Vec::new());
        }
    }
    Ok(BinnedPairs {
        j,
        k,
        centers: uniform_grid(bins),
        side_j,
        side_k,
        same_point,
    })
}

/// Weighted `R x R` moment matrices of a binned variable pair: binned pair
/// mass and binned raw-covariance response. Independent of the bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct PairMoments {
    symmetric: bool,
    centers: Vec<f64>,
    mass: Vec<f64>,
    resp: Vec<f64>,
}

impl PairMoments {
    pub fn bins(&self) -> usize {
        self.centers.len()
    }

    /// Total weighted pair mass; equals one for normalized weights.
    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Local plane intercepts on `grid_u x grid_v`.
    pub fn smooth(
        &self,
        grid_u: &[f64],
        grid_v: &[f64],
        spec: &SmootherSpec,
    ) -> Result<SurfaceEstimate> {
        let bins = self.bins();
        check_bandwidth(spec, bins)?;
        validate_grid(grid_u)?;
        validate_grid(grid_v)?;
        let (kernel, h) = (spec.kernel, spec.bandwidth);
        let tu = KernelTable::new(kernel, h, &self.centers, grid_u);
        let tv = if grid_u == grid_v {
            None
        } else {
            Some(KernelTable::new(kernel, h, &self.centers, grid_v))
        };
        let tv = tv.as_ref().unwrap_or(&tu);

        let rows = par::map_indices(grid_u.len(), |g| {
            // Left pass: contract the row bins against the kernel band of u.
            let mut l0 = vec![0.0; bins];
            let mut l1 = vec![0.0; bins];
            let mut l2 = vec![0.0; bins];
            let mut p0 = vec![0.0; bins];
            let mut p1 = vec![0.0; bins];
            for (off, r) in tu.band(g).enumerate() {
                let (k0, k1, k2) = (tu.k0[g][off], tu.k1[g][off], tu.k2[g][off]);
                let m_row = &self.mass[r * bins..(r + 1) * bins];
                let n_row = &self.resp[r * bins..(r + 1) * bins];
                for c in 0..bins {
                    l0[c] += k0 * m_row[c];
                    l1[c] += k1 * m_row[c];
                    l2[c] += k2 * m_row[c];
                    p0[c] += k0 * n_row[c];
                    p1[c] += k1 * n_row[c];
                }
            }
            // Right pass per column point v.
            (0..grid_v.len())
                .map(|gv| {
                    let band = tv.band(gv);
                    let first = band.start;
                    let mut m = Sym3::default();
                    let mut z = [0.0; 3];
                    for c in band {
                        let off = c - first;
                        let (k0, k1, k2) = (tv.k0[gv][off], tv.k1[gv][off], tv.k2[gv][off]);
                        m.m00 += l0[c] * k0;
                        m.m01 += l1[c] * k0;
                        m.m02 += l0[c] * k1;
                        m.m11 += l2[c] * k0;
                        m.m12 += l1[c] * k1;
                        m.m22 += l0[c] * k2;
                        z[0] += p0[c] * k0;
                        z[1] += p1[c] * k0;
                        z[2] += p0[c] * k1;
                    }
                    match m.conditioning() {
                        Conditioning::Singular => None,
                        Conditioning::Good => m.intercept(z),
                        Conditioning::Poor => self.refit(&tu, g, grid_u[g], tv, gv, grid_v[gv], h),
                    }
                })
                .collect()
        });
        let symmetric = self.symmetric && grid_u == grid_v;
        Ok(SurfaceEstimate::from_rows(
            grid_u.to_vec(),
            grid_v.to_vec(),
            rows,
            symmetric,
        ))
    }
}

impl PairMoments {
    /// Orthogonal re-solve of a poorly conditioned cell from bin-level rows.
    #[allow(clippy::too_many_arguments)]
    fn refit(&self, tu: &KernelTable, g: usize, u: f64, tv: &KernelTable, gv: usize, v: f64, h: f64) -> Option<f64> {
        let bins = self.bins();
        let mut ls = GivensLs::<3>::default();
        let (band_u, band_v) = (tu.band(g), tv.band(gv));
        for (off_r, r) in band_u.enumerate() {
            let x = (self.centers[r] - u) / h;
            for (off_c, c) in band_v.clone().enumerate() {
                let mass = self.mass[r * bins + c];
                if mass > 0.0 {
                    let y = (self.centers[c] - v) / h;
                    let kw = tu.k0[g][off_r] * tv.k0[gv][off_c] * mass;
                    ls.push(kw, [1.0, x, y], self.resp[r * bins + c] / mass);
                }
            }
        }
        ls.intercept()
    }
}

/// Binned local linear covariance surface.
pub fn estimate_cov_binned(
    binned: &BinnedPairs,
    weights: &[f64],
    grid_u: &[f64],
    grid_v: &[f64],
    spec: &SmootherSpec,
) -> Result<SurfaceEstimate> {
    check_bandwidth(spec, binned.bins())?;
    binned.aggregate(weights)?.smooth(grid_u, grid_v, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{cov_weights, mean_weights};
    use crate::smooth::{estimate_cov_surface, estimate_mean_curve, ZeroMean};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn single(u: f64, y: f64) -> FunctionalDataset {
        FunctionalDataset::from_pairs(vec![vec![vec![(u, y)]]]).unwrap()
    }

    fn on_nodes(seed: u64, n: usize, p: usize, t: usize, bins: usize) -> FunctionalDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let centers = uniform_grid(bins);
        let pairs = (0..n)
            .map(|_| {
                (0..p)
                    .map(|_| {
                        (0..t)
                            .map(|_| (centers[rng.random_range(0..bins)], rng.random::<f64>() - 0.5))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        FunctionalDataset::from_pairs(pairs).unwrap()
    }

    #[test]
    fn linear_binning_weights() {
        let b = bin_marginal::<ZeroMean>(&single(0.25, 2.0), 0, 5, None).unwrap();
        assert_eq!(b.counts(0), &[0.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(b.sums(0), &[0.0, 2.0, 0.0, 0.0, 0.0]);

        let b = bin_marginal::<ZeroMean>(&single(0.375, 1.0), 0, 5, None).unwrap();
        assert_eq!(b.counts(0), &[0.0, 0.5, 0.5, 0.0, 0.0]);

        let b = bin_marginal::<ZeroMean>(&single(1.0, 1.0), 0, 5, None).unwrap();
        assert_eq!(b.counts(0), &[0.0, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn binning_conserves_mass_and_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let obs: Vec<(f64, f64)> = (0..37).map(|_| (rng.random(), rng.random())).collect();
        let d = FunctionalDataset::from_pairs(vec![vec![obs.clone()]]).unwrap();
        let b = bin_marginal::<ZeroMean>(&d, 0, 23, None).unwrap();
        let mass: f64 = b.counts(0).iter().sum();
        assert!((mass - 37.0).abs() < 1e-12);
        let first: f64 = b.counts(0).iter().zip(b.centers()).map(|(c, x)| c * x).sum();
        let expected: f64 = obs.iter().map(|o| o.0).sum();
        assert!((first - expected).abs() < 1e-10);
        let ys: f64 = b.sums(0).iter().sum();
        assert!((ys - obs.iter().map(|o| o.1).sum::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn bandwidth_guard() {
        let d = single(0.5, 1.0);
        let b = bin_marginal::<ZeroMean>(&d, 0, 11, None).unwrap();
        let spec = SmootherSpec::epanechnikov(0.15).unwrap();
        assert!(matches!(
            estimate_mean_binned(&b, &[1.0], &[0.5], &spec),
            Err(Error::BandwidthTooSmallForGrid { .. })
        ));
        assert!(bin_marginal::<ZeroMean>(&d, 0, 1, None).is_err());
    }

    #[test]
    fn lossless_at_nodes() {
        let bins = 41;
        let d = on_nodes(4, 30, 2, 6, bins);
        let grid = uniform_grid(bins);
        let spec = SmootherSpec::epanechnikov(0.2).unwrap();
        let exact = estimate_mean_curve(&d, 0, &grid, &spec).unwrap();
        let b = bin_marginal::<ZeroMean>(&d, 0, bins, None).unwrap();
        let w = mean_weights(&d, 0, spec.scheme).unwrap();
        let fast = estimate_mean_binned(&b, &w, &grid, &spec).unwrap();
        for (a, b) in exact.values.iter().zip(&fast.values) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }

        for (j, k) in [(0, 0), (0, 1)] {
            let exact = estimate_cov_surface(&d, j, k, &grid, &grid, &spec, &ZeroMean).unwrap();
            let bp = bin_pairs(&d, j, k, bins, &ZeroMean).unwrap();
            let w = cov_weights(&d, j, k, spec.scheme).unwrap();
            let fast = estimate_cov_binned(&bp, &w, &grid, &grid, &spec).unwrap();
            assert_eq!(exact.failures, fast.failures);
            for (a, b) in exact.values.iter().zip(&fast.values) {
                if !a.is_nan() {
                    assert!((a - b).abs() < 1e-12, "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn pair_mass_reconstruction() {
        let d = single(0.3, 1.0);
        assert_eq!(bin_pairs(&d, 0, 0, 10, &ZeroMean).unwrap().pair_mass(0), 0.0);

        let d = FunctionalDataset::from_pairs(vec![vec![
            vec![(0.1, 1.0), (0.77, 2.0)],
            vec![(0.2, 1.0), (0.3, 1.0), (0.95, 1.0)],
        ]])
        .unwrap();
        let bp = bin_pairs(&d, 0, 1, 10, &ZeroMean).unwrap();
        assert!((bp.pair_mass(0) - 6.0).abs() < 1e-12);

        let centers = uniform_grid(6);
        let d = FunctionalDataset::from_pairs(vec![vec![vec![(centers[1], 1.0), (centers[4], 3.0)]]])
            .unwrap();
        let bp = bin_pairs(&d, 0, 0, 6, &ZeroMean).unwrap();
        assert!((bp.pair_mass(0) - 2.0).abs() < 1e-12);
        let m = bp.aggregate(&[1.0]).unwrap();
        // Only the two cross products (1,4) and (4,1) survive.
        for r in 0..6 {
            for c in 0..6 {
                let expect = if (r, c) == (1, 4) || (r, c) == (4, 1) { 1.0 } else { 0.0 };
                assert!((m.mass[r * 6 + c] - expect).abs() < 1e-12);
                let resp = if expect > 0.0 { 3.0 } else { 0.0 };
                assert!((m.resp[r * 6 + c] - resp).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn affine_survives_binning() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let pairs = (0..50)
            .map(|_| {
                vec![(0..10)
                    .map(|_| {
                        let u: f64 = rng.random();
                        (u, 2.0 * u)
                    })
                    .collect()]
            })
            .collect();
        let d = FunctionalDataset::from_pairs(pairs).unwrap();
        let b = bin_marginal::<ZeroMean>(&d, 0, 401, None).unwrap();
        let w = mean_weights(&d, 0, crate::WeightScheme::PerObservation).unwrap();
        let spec = SmootherSpec::epanechnikov(0.2).unwrap();
        let c = estimate_mean_binned(&b, &w, &[0.5], &spec).unwrap();
        // Off-node data carry an O((R - 1)^-2) binning error.
        let step = 1.0 / 400.0;
        assert!((c.values[0] - 1.0).abs() < 2.0 * step * step, "{}", c.values[0]);
    }

    #[test]
    fn kernel_work_is_independent_of_sample_size() {
        let grid = uniform_grid(50);
        let spec = SmootherSpec::epanechnikov(0.1).unwrap();
        let mut counts = Vec::new();
        for (n, t) in [(5, 2), (200, 40)] {
            let d = on_nodes(1, n, 1, t, 50);
            let b = bin_marginal::<ZeroMean>(&d, 0, 50, None).unwrap();
            let w = mean_weights(&d, 0, spec.scheme).unwrap();
            let before = kernel_evaluations();
            estimate_mean_binned(&b, &w, &grid, &spec).unwrap();
            counts.push(kernel_evaluations() - before);
        }
        assert_eq!(counts[0], counts[1]);
        // At most one window of 2h(R-1) + 1 bins per grid point.
        assert!(counts[0] <= 50 * (2.0f64 * 0.1 * 49.0 + 1.0).floor() as u64);
    }
}
