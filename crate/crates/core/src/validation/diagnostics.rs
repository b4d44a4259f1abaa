use serde::Serialize;

use crate::parareal::ConvergenceReport;
use crate::scalar::Scalar;

/// One line of the convergence table; ratios compare with the previous
/// iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub iteration: usize,
    pub residual: f64,
    pub residual_ratio: Option<f64>,
    pub error: Option<f64>,
    pub error_ratio: Option<f64>,
}

pub fn convergence_curve_diagnostic<T: Scalar>(report: &ConvergenceReport<T>) -> Vec<ConvergenceRow> {
    let f = |v: T| v.to_f64().unwrap_or(f64::NAN);
    let ratio = |cur: f64, prev: f64| if prev != 0.0 { Some(cur / prev) } else { None };
    (1..=report.iterations_run)
        .map(|k| {
            let residual = f(report.residuals[k - 1]);
            let residual_ratio = (k > 1).then(|| ratio(residual, f(report.residuals[k - 2]))).flatten();
            let error = report.error(k).map(f);
            let error_ratio = match (error, report.error(k - 1).map(f)) {
                (Some(e), Some(p)) => ratio(e, p),
                _ => None,
            };
            ConvergenceRow { iteration: k, residual, residual_ratio, error, error_ratio }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parareal::StopReason;

    #[test]
    fn monotone_residuals_give_small_ratios() {
        let report = ConvergenceReport {
            iterations_run: 3,
            residuals: vec![1.0, 0.5, 0.1],
            errors: Some(vec![2.0, 1.0, 0.25, 0.0]),
            stop_reason: StopReason::MaxIterations,
        };
        let rows = convergence_curve_diagnostic(&report);
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].residual_ratio, None);
        assert_eq!(rows[0].error_ratio, Some(0.5));
        assert!(rows[1..].iter().all(|r| r.residual_ratio.unwrap() <= 1.0));
        assert_eq!(rows[2].error, Some(0.0));
    }

    #[test]
    fn single_iteration_one_row() {
        let report = ConvergenceReport {
            iterations_run: 1,
            residuals: vec![0.3f64],
            errors: None,
            stop_reason: StopReason::ToleranceMet,
        };
        let rows = convergence_curve_diagnostic(&report);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].error, None);
    }
}
