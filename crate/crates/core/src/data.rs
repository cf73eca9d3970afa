//! Observation container for discretely sampled multivariate functional data.
//!
//! A dataset holds, for every subject `i` and variable `j`, the list of
//! `(u, y)` pairs observed for that curve. Times live on the closed unit
//! interval. Each list is stored sorted by time so that kernel windows can be
//! located by binary search; the original within-list order carries no
//! meaning and is not retained.

use std::cmp::Ordering;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Observations of one curve `X_ij`, sorted by time.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Series {
    u: Vec<f64>,
    y: Vec<f64>,
}

impl Series {
    /// Builds a series from unordered `(u, y)` pairs.
    pub fn new(mut pairs: Vec<(f64, f64)>) -> Result<Self> {
        for &(u, y) in &pairs {
            if !u.is_finite() {
                return Err(Error::NonFinite("observation time"));
            }
            if !(0.0..=1.0).contains(&u) {
                return Err(Error::TimeOutOfRange(u));
            }
            if !y.is_finite() {
                return Err(Error::NonFinite("observation value"));
            }
        }
        // Sorting on (u, y) makes the stored order a function of the multiset
        // of pairs alone.
        pairs.sort_by(|a, b| match a.0.total_cmp(&b.0) {
            Ordering::Equal => a.1.total_cmp(&b.1),
            o => o,
        });
        let (u, y) = pairs.into_iter().unzip();
        Ok(Self { u, y })
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.u
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    /// Index range of observations with `|u_t - center| <= half_width`.
    pub fn window(&self, center: f64, half_width: f64) -> std::ops::Range<usize> {
        let lo = self.u.partition_point(|&t| t < center - half_width);
        let hi = self.u.partition_point(|&t| t <= center + half_width);
        lo..hi.max(lo)
    }
}

/// Irregularly sampled observations of `n_vars` functional variables on
/// `n_subjects` subjects.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalDataset {
    n_subjects: usize,
    n_vars: usize,
    // Row-major: subject i, variable j lives at i * n_vars + j.
    series: Vec<Series>,
}

impl FunctionalDataset {
    /// Builds a dataset from `series[i][j]` lists of `(u, y)` pairs.
    pub fn from_pairs(series: Vec<Vec<Vec<(f64, f64)>>>) -> Result<Self> {
        let n_subjects = series.len();
        let n_vars = series.first().map_or(0, Vec::len);
        let mut flat = Vec::with_capacity(n_subjects * n_vars);
        for (i, row) in series.into_iter().enumerate() {
            if row.len() != n_vars {
                return Err(Error::Shape(format!(
                    "subject {i} has {} variables, expected {n_vars}",
                    row.len()
                )));
            }
            for pairs in row {
                flat.push(Series::new(pairs)?);
            }
        }
        Self::from_series(n_subjects, n_vars, flat)
    }

    /// Builds a dataset from already validated series in subject-major order.
    pub fn from_series(n_subjects: usize, n_vars: usize, series: Vec<Series>) -> Result<Self> {
        if n_subjects == 0 || n_vars == 0 {
            return Err(Error::Shape(
                "a dataset needs at least one subject and one variable".into(),
            ));
        }
        if series.len() != n_subjects * n_vars {
            return Err(Error::Shape(format!(
                "expected {} series, got {}",
                n_subjects * n_vars,
                series.len()
            )));
        }
        Ok(Self {
            n_subjects,
            n_vars,
            series,
        })
    }

    pub fn n_subjects(&self) -> usize {
        self.n_subjects
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn series(&self, i: usize, j: usize) -> &Series {
        &self.series[i * self.n_vars + j]
    }

    /// `T_ij`, the number of observations of subject `i` on variable `j`.
    pub fn count(&self, i: usize, j: usize) -> usize {
        self.series(i, j).len()
    }

    /// Total number of observations over all subjects and variables.
    pub fn total_observations(&self) -> usize {
        self.series.iter().map(Series::len).sum()
    }

    pub(crate) fn check_var(&self, j: usize) -> Result<()> {
        if j >= self.n_vars {
            return Err(Error::IndexOutOfRange {
                what: "variable",
                index: j,
                limit: self.n_vars,
            });
        }
        Ok(())
    }

    /// Keeps the first `p` variables.
    pub fn select_vars(&self, p: usize) -> Result<Self> {
        if p == 0 || p > self.n_vars {
            return Err(Error::IndexOutOfRange {
                what: "variable count",
                index: p,
                limit: self.n_vars,
            });
        }
        let series = (0..self.n_subjects)
            .flat_map(|i| (0..p).map(move |j| (i, j)))
            .map(|(i, j)| self.series(i, j).clone())
            .collect();
        Self::from_series(self.n_subjects, p, series)
    }

    /// Reads the long format `subject,var,u,y`. Lines starting with `#` are
    /// comments. With `one_based`, indices start at 1.
    pub fn read_long<R: BufRead>(reader: R, one_based: bool) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::Parse {
                line: 1,
                message: e.to_string(),
            })?
            .clone();
        let expected = ["subject", "var", "u", "y"];
        if headers.len() != 4 || headers.iter().zip(expected).any(|(a, b)| a != b) {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header subject,var,u,y, got {:?}", headers),
            });
        }

        let offset = usize::from(one_based);
        let mut rows: Vec<(usize, usize, f64, f64)> = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| Error::Parse {
                line: e.position().map_or(0, |p| p.line() as usize),
                message: e.to_string(),
            })?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            let bad = |message: String| Error::Parse { line, message };
            let index = |s: &str, what: &str| -> Result<usize> {
                let v: usize = s
                    .parse()
                    .map_err(|_| bad(format!("invalid {what} index {s:?}")))?;
                v.checked_sub(offset)
                    .ok_or_else(|| bad(format!("{what} index {v} below base {offset}")))
            };
            let real = |s: &str, what: &str| -> Result<f64> {
                s.parse()
                    .map_err(|_| bad(format!("invalid {what} value {s:?}")))
            };
            rows.push((
                index(&record[0], "subject")?,
                index(&record[1], "var")?,
                real(&record[2], "u")?,
                real(&record[3], "y")?,
            ));
        }
        if rows.is_empty() {
            return Err(Error::AllEmpty { var: 0 });
        }
        let n = rows.iter().map(|r| r.0).max().unwrap_or(0) + 1;
        let p = rows.iter().map(|r| r.1).max().unwrap_or(0) + 1;
        let mut pairs = vec![vec![Vec::new(); p]; n];
        for (i, j, u, y) in rows {
            pairs[i][j].push((u, y));
        }
        Self::from_pairs(pairs)
    }

    /// Writes the long format read by [`read_long`](Self::read_long),
    /// preceded by the given comment lines.
    pub fn write_long<W: Write>(&self, mut out: W, one_based: bool, comments: &[String]) -> Result<()> {
        let offset = usize::from(one_based);
        for c in comments {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "subject,var,u,y")?;
        for i in 0..self.n_subjects {
            for j in 0..self.n_vars {
                let s = self.series(i, j);
                for (u, y) in s.times().iter().zip(s.values()) {
                    writeln!(out, "{},{},{u},{y}", i + offset, j + offset)?;
                }
            }
        }
        Ok(())
    }
}

/// How subject influence is allocated in the smoothing objectives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightScheme {
    /// Every observation (or pair) weighs the same.
    #[default]
    PerObservation,
    /// Every subject weighs the same in total.
    PerSubject,
}

impl WeightScheme {
    pub fn name(self) -> &'static str {
        match self {
            WeightScheme::PerObservation => "per-obs",
            WeightScheme::PerSubject => "per-subject",
        }
    }
}

impl std::str::FromStr for WeightScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-obs" | "per-observation" => Ok(WeightScheme::PerObservation),
            "per-subject" => Ok(WeightScheme::PerSubject),
            other => Err(Error::InvalidArgument(format!("unknown weight scheme {other:?}"))),
        }
    }
}

/// Normalizes per-subject counts into weights with `sum_i count_i * w_i = 1`.
/// Subjects with a zero count get weight zero and are left out of the
/// normalization.
fn normalized(counts: &[usize], scheme: WeightScheme) -> Option<Vec<f64>> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return None;
    }
    let active = counts.iter().filter(|&&c| c > 0).count() as f64;
    Some(
        counts
            .iter()
            .map(|&c| match (c, scheme) {
                (0, _) => 0.0,
                (_, WeightScheme::PerObservation) => 1.0 / total as f64,
                (c, WeightScheme::PerSubject) => 1.0 / (active * c as f64),
            })
            .collect(),
    )
}

/// Per-subject mean-smoother weights `v_ij` for variable `j`.
pub fn mean_weights(data: &FunctionalDataset, j: usize, scheme: WeightScheme) -> Result<Vec<f64>> {
    data.check_var(j)?;
    let counts: Vec<usize> = (0..data.n_subjects()).map(|i| data.count(i, j)).collect();
    normalized(&counts, scheme).ok_or(Error::AllEmpty { var: j })
}

/// Number of raw-covariance pairs subject `i` contributes to `(j, k)`.
pub fn pair_count(data: &FunctionalDataset, i: usize, j: usize, k: usize) -> usize {
    let tj = data.count(i, j);
    let tk = data.count(i, k);
    if j == k {
        tj * tj.saturating_sub(1)
    } else {
        tj * tk
    }
}

/// Per-subject covariance-smoother weights `w_ijk` for the pair `(j, k)`.
pub fn cov_weights(
    data: &FunctionalDataset,
    j: usize,
    k: usize,
    scheme: WeightScheme,
) -> Result<Vec<f64>> {
    data.check_var(j)?;
    data.check_var(k)?;
    let counts: Vec<usize> = (0..data.n_subjects())
        .map(|i| pair_count(data, i, j, k))
        .collect();
    normalized(&counts, scheme).ok_or(Error::NoPairs { j, k })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn design(counts: &[&[usize]]) -> FunctionalDataset {
        let pairs = counts
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&t| (0..t).map(|s| (s as f64 / t.max(1) as f64, 1.0)).collect())
                    .collect()
            })
            .collect();
        FunctionalDataset::from_pairs(pairs).unwrap()
    }

    #[test]
    fn mean_weight_examples() {
        let d = design(&[&[3], &[2]]);
        assert_eq!(mean_weights(&d, 0, WeightScheme::PerObservation).unwrap(), vec![0.2, 0.2]);
        let v = mean_weights(&d, 0, WeightScheme::PerSubject).unwrap();
        assert_eq!(v, vec![1.0 / 6.0, 0.25]);
        assert!((3.0 * v[0] + 2.0 * v[1] - 1.0).abs() < 1e-15);

        let single = design(&[&[7]]);
        for scheme in [WeightScheme::PerObservation, WeightScheme::PerSubject] {
            assert_eq!(mean_weights(&single, 0, scheme).unwrap(), vec![1.0 / 7.0]);
        }
    }

    #[test]
    fn cov_weight_examples() {
        let d = design(&[&[3], &[2]]);
        assert_eq!(
            cov_weights(&d, 0, 0, WeightScheme::PerObservation).unwrap(),
            vec![0.125, 0.125]
        );

        let d = design(&[&[2, 3], &[1, 4]]);
        let w = cov_weights(&d, 0, 1, WeightScheme::PerSubject).unwrap();
        assert_eq!(w, vec![1.0 / 12.0, 0.125]);

        let d = design(&[&[1]]);
        assert_eq!(
            cov_weights(&d, 0, 0, WeightScheme::PerObservation),
            Err(Error::NoPairs { j: 0, k: 0 })
        );
    }

    #[test]
    fn empty_subjects_get_zero_weight() {
        let d = design(&[&[0], &[4], &[2]]);
        let v = mean_weights(&d, 0, WeightScheme::PerSubject).unwrap();
        assert_eq!(v[0], 0.0);
        assert!((4.0 * v[1] + 2.0 * v[2] - 1.0).abs() < 1e-15);

        let d = design(&[&[0], &[0]]);
        assert_eq!(
            mean_weights(&d, 0, WeightScheme::PerObservation),
            Err(Error::AllEmpty { var: 0 })
        );
    }

    #[test]
    fn rejects_times_outside_unit_interval() {
        let err = FunctionalDataset::from_pairs(vec![vec![vec![(1.5, 0.0)]]]).unwrap_err();
        assert_eq!(err, Error::TimeOutOfRange(1.5));
    }

    #[test]
    fn long_format_roundtrip() {
        let d = FunctionalDataset::from_pairs(vec![
            vec![vec![(0.25, 1.5), (0.1, -2.0)], vec![(0.5, 3.0)]],
            vec![vec![], vec![(1.0, 0.125)]],
        ])
        .unwrap();
        for one_based in [false, true] {
            let mut buf = Vec::new();
            d.write_long(&mut buf, one_based, &["seed=1".into()]).unwrap();
            let back = FunctionalDataset::read_long(buf.as_slice(), one_based).unwrap();
            assert_eq!(back, d);
        }
    }

    #[test]
    fn read_rejects_bad_header() {
        let text = "subject,variable,u,y\n0,0,0.5,1\n";
        assert!(matches!(
            FunctionalDataset::read_long(text.as_bytes(), false),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn read_reports_empty_dataset() {
        let text = "# seed=1\nsubject,var,u,y\n";
        assert_eq!(
            FunctionalDataset::read_long(text.as_bytes(), false),
            Err(Error::AllEmpty { var: 0 })
        );
    }

    #[test]
    fn window_is_inclusive() {
        let s = Series::new(vec![(0.1, 0.0), (0.2, 0.0), (0.3, 0.0), (0.6, 0.0)]).unwrap();
        assert_eq!(s.window(0.2, 0.1), 0..3);
        assert_eq!(s.window(0.9, 0.1), 4..4);
    }

    fn ragged() -> impl Strategy<Value = Vec<Vec<usize>>> {
        (1usize..4).prop_flat_map(|p| prop::collection::vec(prop::collection::vec(0usize..9, p), 1..12))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn weights_normalize(counts in ragged(), per_subject in any::<bool>()) {
            let scheme = if per_subject { WeightScheme::PerSubject } else { WeightScheme::PerObservation };
            let rows: Vec<&[usize]> = counts.iter().map(Vec::as_slice).collect();
            let d = design(&rows);
            for j in 0..d.n_vars() {
                if let Ok(v) = mean_weights(&d, j, scheme) {
                    let s: f64 = (0..d.n_subjects()).map(|i| d.count(i, j) as f64 * v[i]).sum();
                    prop_assert!((s - 1.0).abs() <= 1e-12);
                    prop_assert!(v.iter().all(|&x| x >= 0.0));
                }
                for k in 0..d.n_vars() {
                    if let Ok(w) = cov_weights(&d, j, k, scheme) {
                        let s: f64 = (0..d.n_subjects()).map(|i| pair_count(&d, i, j, k) as f64 * w[i]).sum();
                        prop_assert!((s - 1.0).abs() <= 1e-12);
                    }
                }
            }
        }

        #[test]
        fn schemes_agree_for_balanced_designs(n in 1usize..10, t in 1usize..8) {
            let row = [t, t];
            let rows: Vec<&[usize]> = (0..n).map(|_| &row[..]).collect();
            let d = design(&rows);
            prop_assert_eq!(
                mean_weights(&d, 0, WeightScheme::PerObservation).unwrap(),
                mean_weights(&d, 0, WeightScheme::PerSubject).unwrap()
            );
            let a = cov_weights(&d, 0, 1, WeightScheme::PerObservation).unwrap();
            let b = cov_weights(&d, 0, 1, WeightScheme::PerSubject).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() <= 1e-15 * x.abs());
            }
        }
    }
}
