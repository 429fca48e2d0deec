use super::records::SweepRecord;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Predictor {
    W,
    T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Standard error of the slope.
    pub stderr: f64,
    pub used: usize,
    pub warnings: Vec<String>,
}

/// Least squares of log(energy) against log(predictor).
pub fn fit_exponent(records: &[SweepRecord], predictor: Predictor) -> Result<FitResult> {
    let mut warnings = Vec::new();
    let mut pts = Vec::new();
    for r in records {
        let x = match predictor {
            Predictor::W => r.w,
            Predictor::T => r.t,
        };
        if r.is_failed() || !(r.energy > 0.0) || !r.energy.is_finite() {
            warnings.push(format!("excluded w = {} (energy {})", r.w, r.energy));
            continue;
        }
        if !(x > 0.0) {
            warnings.push(format!("excluded w = {} (predictor {x})", r.w));
            continue;
        }
        pts.push((x.ln(), r.energy.ln()));
    }
    for m in &warnings {
        log::warn!("fit_exponent: {m}");
    }
    fit_log_points(&pts).map(|(slope, intercept, r2, stderr)| FitResult {
        slope,
        intercept,
        r2,
        stderr,
        used: pts.len(),
        warnings,
    })
}

/// Returns (slope, intercept, R^2, slope standard error) of a line fit.
pub fn fit_log_points(pts: &[(f64, f64)]) -> Result<(f64, f64, f64, f64)> {
    let n = pts.len();
    if n < 4 {
        return Err(Error::Domain(format!("fit needs at least 4 usable points, got {n}")));
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Domain("fit needs distinct predictor values".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let stderr = (sse / (nf - 2.0) / sxx).sqrt();
    Ok((slope, intercept, r2, stderr))
}
