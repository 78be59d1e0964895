//! Rate fitting and report plumbing shared by the experiment drivers.

use crate::error::{CoreError, Result};

/// Least-squares fit of `log(value)` against `log(level)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub num_points: usize,
}

/// Fit a power law through strictly positive `(level, value)` pairs.
pub fn fit_rate(pairs: &[(f64, f64)]) -> Result<FitResult> {
    if pairs.len() < 3 {
        return Err(CoreError::InvalidParam(format!(
            "rate fit requires >= 3 points, got {}",
            pairs.len()
        )));
    }
    if pairs.iter().any(|&(l, v)| l <= 0.0 || v <= 0.0) {
        return Err(CoreError::InvalidParam("rate fit requires strictly positive pairs".into()));
    }
    let n = pairs.len() as f64;
    let logs: Vec<(f64, f64)> = pairs.iter().map(|&(l, v)| (l.ln(), v.ln())).collect();
    let sx: f64 = logs.iter().map(|p| p.0).sum();
    let sy: f64 = logs.iter().map(|p| p.1).sum();
    let sxx: f64 = logs.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = logs.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-14 {
        return Err(CoreError::InvalidParam("rate fit levels are degenerate".into()));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let residual_rms = (logs
        .iter()
        .map(|&(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(FitResult { slope, intercept, residual_rms, num_points: pairs.len() })
}

/// `(level, error)` samples with the fitted log-log slope; the common
/// output of every rate experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub levels: Vec<f64>,
    pub errors: Vec<f64>,
    /// Per-level spread (standard error or IQR-style width, per experiment).
    pub spread: Vec<f64>,
    pub fit: FitResult,
}

/// Deterministic float formatting used in every emitted CSV.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.12e}")
}
