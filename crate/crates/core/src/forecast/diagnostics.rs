//! Residual autocorrelation and the Ljung-Box portmanteau test.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};

/// Sample autocorrelations for lags `1..=max_lag`.
pub fn acf(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = x.len();
    if n == 0 {
        return Err(Error::EmptySeries);
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let denom: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    if !(denom > 0.0) {
        return Err(Error::Inapplicable("series has zero variance".into()));
    }
    Ok((1..=max_lag)
        .map(|k| {
            if k >= n {
                return 0.0;
            }
            (k..n).map(|t| (x[t] - mean) * (x[t - k] - mean)).sum::<f64>() / denom
        })
        .collect())
}

/// Upper tail of the chi-square distribution.
pub fn chi_square_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_ur(df / 2.0, x / 2.0).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LjungBox {
    pub statistic: f64,
    pub p_value: f64,
    pub lags: usize,
    pub df: usize,
}

/// `Q = n(n+2) Σ ρ_k² / (n-k)` with `lags - fitted_params` degrees of freedom.
pub fn ljung_box(residuals: &[f64], lags: usize, fitted_params: usize) -> Result<LjungBox> {
    if lags <= fitted_params {
        return Err(Error::Domain(format!(
            "ljung-box needs more lags ({}) than fitted parameters ({})",
            lags, fitted_params
        )));
    }
    let n = residuals.len();
    if n <= lags {
        return Err(Error::InsufficientData { needed: lags + 1, got: n });
    }
    let rho = acf(residuals, lags)?;
    let nf = n as f64;
    let statistic = nf
        * (nf + 2.0)
        * rho
            .iter()
            .enumerate()
            .map(|(i, r)| r * r / (nf - (i + 1) as f64))
            .sum::<f64>();
    let df = lags - fitted_params;
    Ok(LjungBox {
        statistic,
        p_value: chi_square_sf(statistic, df as f64),
        lags,
        df,
    })
}

/// Lag count heuristic: `min(10, n/5)` non-seasonal, `min(2s, n/5)`
/// seasonal, raised so that at least three degrees of freedom remain.
pub fn default_lags(n: usize, season: usize, fitted_params: usize) -> usize {
    let base = if season > 1 { 2 * season } else { 10 };
    base.min(n / 5).max(fitted_params + 3)
}
