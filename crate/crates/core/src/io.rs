//! Plain-text writers for estimated curves and surfaces.
//!
//! Files start with `# ` comment lines. A curve file holds the grid as a
//! header row and the estimates as a second row. A surface file holds the
//! column grid as a header row followed by one row per row-grid point; the
//! row grid is written to a `.grid` sidecar. Failed points are written as
//! `NaN`.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::eval::{MiseReport, MiseSummary};
use crate::smooth::{CurveEstimate, SurfaceEstimate};

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(",")
}

fn comments<W: Write>(out: &mut W, lines: &[String]) -> Result<()> {
    for line in lines {
        writeln!(out, "# {line}")?;
    }
    Ok(())
}

pub fn write_curve<W: Write>(mut out: W, curve: &CurveEstimate, header: &[String]) -> Result<()> {
    comments(&mut out, header)?;
    writeln!(out, "{}", join(&curve.grid))?;
    writeln!(out, "{}", join(&curve.values))?;
    Ok(())
}

pub fn write_surface<W: Write>(
    mut out: W,
    surface: &SurfaceEstimate,
    header: &[String],
) -> Result<()> {
    comments(&mut out, header)?;
    writeln!(out, "{}", join(&surface.grid_v))?;
    let cols = surface.cols();
    for row in surface.values.chunks(cols) {
        writeln!(out, "{}", join(row))?;
    }
    Ok(())
}

/// Path of the row-grid sidecar for a surface file.
pub fn grid_sidecar(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".grid");
    PathBuf::from(name)
}

/// Writes `surface` to `path` and its row and column grids to the sidecar.
pub fn save_surface(path: &Path, surface: &SurfaceEstimate, header: &[String]) -> Result<()> {
    let mut buf = Vec::new();
    write_surface(&mut buf, surface, header)?;
    std::fs::write(path, buf)?;
    let mut side = Vec::new();
    comments(&mut side, header)?;
    writeln!(side, "rows,{}", join(&surface.grid_u))?;
    writeln!(side, "cols,{}", join(&surface.grid_v))?;
    std::fs::write(grid_sidecar(path), side)?;
    Ok(())
}

pub fn save_curve(path: &Path, curve: &CurveEstimate, header: &[String]) -> Result<()> {
    let mut buf = Vec::new();
    write_curve(&mut buf, curve, header)?;
    std::fs::write(path, buf)?;
    Ok(())
}

/// One row per sweep cell: `j,k,h,mise,status`, with `k` blank for means.
/// Covariance rows cover `j <= k` only.
pub fn write_mise_report<W: Write>(mut out: W, report: &MiseReport, header: &[String]) -> Result<()> {
    comments(&mut out, header)?;
    writeln!(out, "j,k,h,mise,status")?;
    for (j, row) in report.mise_mean.iter().enumerate() {
        for (cell, h) in row.iter().zip(&report.mean_bandwidths) {
            writeln!(out, "{j},,{h:?},{:?},{}", cell.value, cell.status.name())?;
        }
    }
    for (j, rows) in report.mise_cov.iter().enumerate() {
        for (k, row) in rows.iter().enumerate().skip(j) {
            for (cell, h) in row.iter().zip(&report.cov_bandwidths) {
                writeln!(out, "{j},{k},{h:?},{:?},{}", cell.value, cell.status.name())?;
            }
        }
    }
    Ok(())
}

/// `key=value` block with the aggregates and the failed-cell count.
pub fn write_summary<W: Write>(
    mut out: W,
    report: &MiseReport,
    summary: &MiseSummary,
    header: &[String],
) -> Result<()> {
    comments(&mut out, header)?;
    let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |v| format!("{v:?}"));
    writeln!(out, "quadrature={}", report.quadrature.name())?;
    writeln!(out, "grid_points={}", report.grid.len())?;
    writeln!(out, "AveMISE_mu={:?}", summary.ave_mean)?;
    writeln!(out, "MaxMISE_mu={:?}", summary.max_mean)?;
    writeln!(out, "AveMISE_sigma={}", opt(summary.ave_cov))?;
    writeln!(out, "MaxMISE_sigma={}", opt(summary.max_cov))?;
    writeln!(out, "failed_cells={}", report.failed_cells())?;
    Ok(())
}
