//! Replicated sweeps over `(p, T)` and their aggregation into the four
//! summary metrics.
//!
//! Each `(rep, T)` cell draws one dataset with the largest `p`. Smaller `p`
//! are its leading variables: the simulation nests in `p`, and per-variable
//! and per-pair errors do not depend on the other variables, so the sweep
//! is run once per cell.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Context;
use fdsmooth::eval::{aggregate_mises, bandwidth_sweep, CellStatus, MiseReport};
use fdsmooth::generate_dataset;

use crate::config::Resolved;
use crate::plot::{Chart, Series};

pub const METRICS: [&str; 4] = ["AveMISE_mu", "MaxMISE_mu", "AveMISE_sigma", "MaxMISE_sigma"];

#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub rep: usize,
    pub p: usize,
    pub t: usize,
    pub metric: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FailedRow {
    pub rep: usize,
    pub p: usize,
    pub t: usize,
    /// `mean`, `cov`, or `aggregate` when no bandwidth worked for some row.
    pub target: &'static str,
    pub j: usize,
    pub k: Option<usize>,
    pub h: Option<f64>,
    pub status: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseResults {
    pub n: usize,
    pub ps: Vec<usize>,
    pub ts: Vec<usize>,
    pub reps: usize,
    pub rows: Vec<MetricRow>,
    pub failed: Vec<FailedRow>,
}

/// Mean and standard deviation of a metric over replications.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub p: usize,
    pub t: usize,
    pub metric: &'static str,
    pub mean: f64,
    pub sd: f64,
    pub count: usize,
}

fn failed_cells(report: &MiseReport, rep: usize, p: usize, t: usize) -> Vec<FailedRow> {
    let mut out = Vec::new();
    for (j, row) in report.mise_mean.iter().enumerate() {
        for (cell, &h) in row.iter().zip(&report.mean_bandwidths) {
            if cell.status != CellStatus::Ok {
                out.push(FailedRow { rep, p, t, target: "mean", j, k: None, h: Some(h), status: cell.status.name() });
            }
        }
    }
    for (j, rows) in report.mise_cov.iter().enumerate() {
        for (k, row) in rows.iter().enumerate().skip(j) {
            for (cell, &h) in row.iter().zip(&report.cov_bandwidths) {
                if cell.status != CellStatus::Ok {
                    out.push(FailedRow { rep, p, t, target: "cov", j, k: Some(k), h: Some(h), status: cell.status.name() });
                }
            }
        }
    }
    out
}

fn run_cell(
    resolved: &Resolved,
    rep: usize,
    t: usize,
) -> anyhow::Result<(Vec<MetricRow>, Vec<FailedRow>)> {
    let config = &resolved.config;
    let p_max = *config.p.iter().max().expect("nonempty p list");
    let seed = resolved.rep_seed(rep);
    let (data, truth) = generate_dataset(&config.simulation(p_max, t, seed))?;
    let report = bandwidth_sweep(
        &data,
        &truth,
        &resolved.mean_bandwidths,
        &resolved.cov_bandwidths,
        &resolved.sweep_settings(),
        resolved.centering,
    )
    .with_context(|| format!("rep {rep}, T = {t}"))?;
    let mut rows = Vec::new();
    let mut failed = Vec::new();
    for &p in &config.p {
        let sub = report.leading(p)?;
        failed.extend(failed_cells(&sub, rep, p, t));
        match aggregate_mises(&sub) {
            Ok(s) => {
                let values = [s.ave_mean, s.max_mean, s.ave_cov.unwrap_or(f64::NAN), s.max_cov.unwrap_or(f64::NAN)];
                for (metric, value) in METRICS.into_iter().zip(values) {
                    rows.push(MetricRow { rep, p, t, metric, value });
                }
            }
            Err(_) => failed.push(FailedRow {
                rep,
                p,
                t,
                target: "aggregate",
                j: 0,
                k: None,
                h: None,
                status: "no-valid-bandwidth",
            }),
        }
    }
    Ok((rows, failed))
}

/// Runs every `(rep, T)` cell; the merge is sorted by `(rep, p, T)`.
pub fn run_phase(resolved: &Resolved) -> anyhow::Result<PhaseResults> {
    let config = &resolved.config;
    let ts = config.t.clone();
    let cells: Vec<(usize, usize)> = (0..config.reps)
        .flat_map(|rep| ts.iter().map(move |&t| (rep, t)))
        .collect();
    let results = fdsmooth::par::map_indices(cells.len(), |c| run_cell(resolved, cells[c].0, cells[c].1));
    let mut rows = Vec::new();
    let mut failed = Vec::new();
    for r in results {
        let (a, b) = r?;
        rows.extend(a);
        failed.extend(b);
    }
    let metric_index = |m: &str| METRICS.iter().position(|&x| x == m).unwrap_or(usize::MAX);
    rows.sort_by_key(|r| (r.rep, r.p, r.t, metric_index(r.metric)));
    failed.sort_by(|a, b| {
        (a.rep, a.p, a.t, a.target, a.j, a.k)
            .cmp(&(b.rep, b.p, b.t, b.target, b.j, b.k))
            .then(a.h.unwrap_or(0.0).total_cmp(&b.h.unwrap_or(0.0)))
    });
    let mut ps = config.p.clone();
    ps.sort_unstable();
    ps.dedup();
    let mut ts = ts;
    ts.sort_unstable();
    ts.dedup();
    Ok(PhaseResults { n: config.n, ps, ts, reps: config.reps, rows, failed })
}

impl PhaseResults {
    /// Replication means per `(p, T, metric)`, ordered by `p`, `T`, metric.
    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut out = Vec::new();
        for &p in &self.ps {
            for &t in &self.ts {
                for metric in METRICS {
                    let values: Vec<f64> = self
                        .rows
                        .iter()
                        .filter(|r| r.p == p && r.t == t && r.metric == metric && r.value.is_finite())
                        .map(|r| r.value)
                        .collect();
                    let count = values.len();
                    let mean = if count == 0 { f64::NAN } else { values.iter().sum::<f64>() / count as f64 };
                    let sd = if count < 2 {
                        f64::NAN
                    } else {
                        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
                    };
                    out.push(SummaryRow { p, t, metric, mean, sd, count });
                }
            }
        }
        out
    }

    /// Mean of `metric` at `(p, T)` over replications.
    pub fn mean(&self, p: usize, t: usize, metric: &str) -> f64 {
        self.summary()
            .into_iter()
            .find(|s| s.p == p && s.t == t && s.metric == metric)
            .map_or(f64::NAN, |s| s.mean)
    }

    pub fn results_csv(&self, header: &[String]) -> String {
        let mut out = comment_block(header);
        out.push_str("rep,p,T,metric,value\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{},{:?}", r.rep, r.p, r.t, r.metric, r.value);
        }
        out
    }

    pub fn failed_csv(&self, header: &[String]) -> String {
        let mut out = comment_block(header);
        out.push_str("rep,p,T,target,j,k,h,status\n");
        for f in &self.failed {
            let k = f.k.map_or(String::new(), |k| k.to_string());
            let h = f.h.map_or(String::new(), |h| format!("{h:?}"));
            let _ = writeln!(out, "{},{},{},{},{},{k},{h},{}", f.rep, f.p, f.t, f.target, f.j, f.status);
        }
        out
    }

    pub fn summary_csv(&self, header: &[String]) -> String {
        let mut out = comment_block(header);
        out.push_str("p,T,metric,mean,sd,reps\n");
        for s in self.summary() {
            let _ = writeln!(out, "{},{},{},{:?},{:?},{}", s.p, s.t, s.metric, s.mean, s.sd, s.count);
        }
        out
    }

    /// One chart per metric: replication mean against `T`, a series per `p`.
    pub fn charts(&self) -> Vec<(&'static str, Chart)> {
        let summary = self.summary();
        METRICS
            .into_iter()
            .map(|metric| {
                let series = self
                    .ps
                    .iter()
                    .map(|&p| Series {
                        label: format!("p={p}"),
                        points: summary
                            .iter()
                            .filter(|s| s.p == p && s.metric == metric)
                            .map(|s| (s.t as f64, s.mean))
                            .collect(),
                    })
                    .collect();
                let chart = Chart {
                    title: format!("{metric}, n={}", self.n),
                    x_label: "T".into(),
                    y_label: format!("mean {metric} over {} reps", self.reps),
                    series,
                };
                (metric, chart)
            })
            .collect()
    }

    /// Writes `results.csv`, `failed_cells.csv`, `summary.csv` and one SVG
    /// per metric into `dir`.
    pub fn write(&self, dir: &Path, header: &[String]) -> anyhow::Result<()> {
        let write = |name: &str, text: String| {
            let path = dir.join(name);
            std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
        };
        write("results.csv", self.results_csv(header))?;
        write("failed_cells.csv", self.failed_csv(header))?;
        write("summary.csv", self.summary_csv(header))?;
        let comment = header.join("; ");
        for (metric, chart) in self.charts() {
            write(&format!("plot_{metric}.svg"), chart.to_svg(&comment))?;
        }
        Ok(())
    }
}

pub fn comment_block(header: &[String]) -> String {
    header.iter().map(|h| format!("# {h}\n")).collect()
}
