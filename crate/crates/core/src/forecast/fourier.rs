//! Harmonic regressors for long seasonal cycles.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Row-major `n × 2K` matrix of `sin(2πkt/period), cos(2πkt/period)` pairs
/// for `t = start .. start + n` (time index starts at 1 for the first
/// observation).
pub fn fourier_terms_from(start: usize, n: usize, period: f64, k: usize) -> Result<Vec<Vec<f64>>> {
    if k == 0 {
        return Err(Error::Domain("fourier K must be >= 1".into()));
    }
    if !(period > 0.0) || !period.is_finite() {
        return Err(Error::Domain(format!("fourier period must be positive, got {}", period)));
    }
    Ok((start..start + n)
        .map(|t| {
            let mut row = Vec::with_capacity(2 * k);
            for harmonic in 1..=k {
                let angle = 2.0 * PI * harmonic as f64 * t as f64 / period;
                row.push(angle.sin());
                row.push(angle.cos());
            }
            row
        })
        .collect())
}

/// Fourier regressors for `t = 1..=n`.
pub fn fourier_terms(n: usize, period: f64, k: usize) -> Result<Vec<Vec<f64>>> {
    fourier_terms_from(1, n, period, k)
}

/// Column names in the order produced by [`fourier_terms`].
pub fn fourier_names(period: f64, k: usize) -> Vec<String> {
    (1..=k)
        .flat_map(|h| [format!("s{}-{}", h, period), format!("c{}-{}", h, period)])
        .collect()
}
