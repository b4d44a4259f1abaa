//! CSV artifacts. Every real number is written with 17 significant digits.

use std::fs::File;
use std::path::Path;

use crate::error::{Error, Result};
use crate::parareal::{ConvergenceReport, PararealGrid};

pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    Ok(csv::Writer::from_writer(File::create(path)?))
}

/// Columns `iteration, residual` and `error` when errors were tracked; one
/// row per iteration `k >= 1`.
pub fn write_convergence_csv(path: &Path, report: &ConvergenceReport<f64>) -> Result<()> {
    let mut w = writer(path)?;
    let with_error = report.errors.is_some();
    if with_error {
        w.write_record(["iteration", "residual", "error"])?;
    } else {
        w.write_record(["iteration", "residual"])?;
    }
    for k in 1..=report.iterations_run {
        let mut row = vec![k.to_string(), format_real(report.residuals[k - 1])];
        if let Some(e) = report.error(k) {
            row.push(format_real(e));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `t, <species...>`.
pub fn write_trajectory_csv(path: &Path, species: &[String], times: &[f64], states: &[Vec<f64>]) -> Result<()> {
    if times.len() != states.len() {
        return Err(Error::ShapeMismatch(format!("{} times for {} states", times.len(), states.len())));
    }
    let mut w = writer(path)?;
    let mut header = vec!["t".to_string()];
    header.extend(species.iter().cloned());
    w.write_record(&header)?;
    for (t, x) in times.iter().zip(states) {
        if x.len() != species.len() {
            return Err(Error::ShapeMismatch("state length differs from species count".into()));
        }
        let mut row = vec![format_real(*t)];
        row.extend(x.iter().map(|&v| format_real(v)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `iteration, n, t, <species...>` over the whole iterate matrix.
pub fn write_iterates_csv(path: &Path, species: &[String], times: &[f64], grid: &PararealGrid<f64>) -> Result<()> {
    let mut w = writer(path)?;
    let mut header = vec!["iteration".to_string(), "n".to_string(), "t".to_string()];
    header.extend(species.iter().cloned());
    w.write_record(&header)?;
    for (k, row) in grid.iterates.iter().enumerate() {
        for (n, x) in row.iter().enumerate() {
            let mut rec = vec![k.to_string(), n.to_string(), format_real(times[n])];
            rec.extend(x.iter().map(|&v| format_real(v)));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub size: f64,
    pub iteration: usize,
    pub residual: f64,
}

/// Columns `size, iteration, residual`.
pub fn write_scaling_csv(path: &Path, rows: &[ScalingRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["size", "iteration", "residual"])?;
    for r in rows {
        w.write_record([format_real(r.size), r.iteration.to_string(), format_real(r.residual)])?;
    }
    w.flush()?;
    Ok(())
}
