//! Log-log growth fits of timing columns.

use serde::Serialize;

use crate::error::{CliError, Result};
use crate::output::ResultRow;

/// `t ~ c N^exponent` fitted by least squares in log-log space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Fit {
    pub exponent: f64,
    /// Root-mean-square residual of the fit in natural-log units.
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScalingSummary {
    pub setup: Fit,
    /// Solve time divided by the iteration count.
    pub solve_per_iteration: Fit,
}

pub fn fit_power_law(n: &[f64], t: &[f64]) -> Result<Fit> {
    if n.len() != t.len() || n.len() < 3 {
        return Err(CliError::Insufficient(format!("at least 3 points, got {}", n.len())));
    }
    if n.iter().chain(t).any(|v| !(*v > 0.0)) {
        return Err(CliError::Insufficient("positive sizes and times".into()));
    }
    let x: Vec<f64> = n.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = t.iter().map(|v| v.ln()).collect();
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let exponent = sxy / sxx;
    let icpt = my - exponent * mx;
    let rss: f64 = x.iter().zip(&y).map(|(a, b)| (b - icpt - exponent * a).powi(2)).sum();
    Ok(Fit { exponent, residual: (rss / k).sqrt() })
}

pub fn scaling_summary(rows: &[ResultRow]) -> Result<ScalingSummary> {
    if rows.len() < 3 {
        return Err(CliError::Insufficient(format!("at least 3 rows, got {}", rows.len())));
    }
    let n: Vec<f64> = rows.iter().map(|r| r.unknowns as f64).collect();
    let (lo, hi) = n.iter().fold((f64::MAX, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    if hi < 4.0 * lo {
        return Err(CliError::Insufficient(format!("rows spanning 4x in N, got {lo}..{hi}")));
    }
    let setup: Vec<f64> = rows.iter().map(|r| r.t_setup).collect();
    let per_iter: Vec<f64> = rows.iter().map(|r| r.t_solve / r.n_iter.max(1) as f64).collect();
    Ok(ScalingSummary { setup: fit_power_law(&n, &setup)?, solve_per_iteration: fit_power_law(&n, &per_iter)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::output::SCHEMA_VERSION;

    fn rows(f: impl Fn(f64) -> f64) -> Vec<ResultRow> {
        [1000usize, 4000, 16000, 64000]
            .iter()
            .map(|&n| ResultRow {
                schema: SCHEMA_VERSION,
                dim: 2,
                freq: 1.0,
                n: 1,
                unknowns: n,
                t_setup: f(n as f64),
                n_iter: 4,
                t_solve: 4.0 * f(n as f64),
                converged: true,
                final_residual: 1e-4,
                medium: "lens".into(),
                force: "point_source".into(),
                config_hash: String::new(),
            })
            .collect()
    }

    #[test]
    fn linear_growth() {
        let s = scaling_summary(&rows(|n| 3e-6 * n)).unwrap();
        assert!((s.setup.exponent - 1.0).abs() <= 0.01);
        assert!((s.solve_per_iteration.exponent - 1.0).abs() <= 0.01);
        assert!(s.setup.residual < 1e-12);
    }

    #[test]
    fn four_thirds_growth() {
        let s = scaling_summary(&rows(|n| 1e-7 * n.powf(4.0 / 3.0))).unwrap();
        assert!((s.setup.exponent - 4.0 / 3.0).abs() <= 0.02);
    }

    #[test]
    fn insufficient_rows() {
        let r = rows(|n| n);
        assert!(scaling_summary(&r[..2]).is_err());
        let mut narrow = r[..3].to_vec();
        for (k, row) in narrow.iter_mut().enumerate() {
            row.unknowns = 1000 + k;
        }
        assert!(scaling_summary(&narrow).is_err());
    }
}
