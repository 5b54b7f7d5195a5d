//! Augmented Dickey-Fuller unit-root test.
//!
//! The default regression has a constant and picks the number of lagged
//! differences by AIC. A constant-plus-trend variant with a fixed cube-root
//! lag order is available through [`AdfConfig`].

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::linalg::ols;
use crate::error::{Error, Result};

/// MacKinnon (2010) response-surface coefficients,
/// `tau = b0 + b1/T + b2/T^2 + b3/T^3`, for 1%, 5% and 10%.
const CRIT_C: [[f64; 4]; 3] = [
    [-3.43035, -6.5393, -16.786, -79.433],
    [-2.86154, -2.8903, -4.234, -40.040],
    [-2.56677, -1.5384, -2.809, 0.0],
];
const CRIT_CT: [[f64; 4]; 3] = [
    [-3.95877, -9.0531, -28.428, -134.155],
    [-3.41049, -4.3904, -9.036, -45.374],
    [-3.12705, -2.5856, -3.925, -22.380],
];

fn critical_value(coef: &[f64; 4], nobs: usize) -> f64 {
    let t = nobs as f64;
    coef[0] + coef[1] / t + coef[2] / (t * t) + coef[3] / (t * t * t)
}

/// Deterministic terms of the test regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdfTrend {
    Constant,
    ConstantTrend,
}

/// How many lagged differences enter the regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdfLags {
    /// Minimum AIC over `0..=max`; `max` defaults to [`schwert_lags`].
    Aic { max: Option<usize> },
    Fixed(usize),
    /// `trunc((n - 1)^(1/3))`
    CubeRoot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdfConfig {
    pub trend: AdfTrend,
    pub lags: AdfLags,
}

impl Default for AdfConfig {
    fn default() -> Self {
        Self {
            trend: AdfTrend::Constant,
            lags: AdfLags::Aic { max: None },
        }
    }
}

impl AdfConfig {
    /// Constant and linear trend with a cube-root lag order, the convention
    /// of R's `tseries::adf.test`.
    pub fn trend_cube_root() -> Self {
        Self {
            trend: AdfTrend::ConstantTrend,
            lags: AdfLags::CubeRoot,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdfResult {
    /// t-statistic of the lagged level coefficient.
    pub statistic: f64,
    pub lags: usize,
    pub nobs: usize,
    pub trend: AdfTrend,
    pub critical_1pct: f64,
    pub critical_5pct: f64,
    pub critical_10pct: f64,
    /// Unit root rejected at 5%, i.e. the series looks stationary.
    pub reject_5pct: bool,
}

/// Default maximum lag order `floor(12 * (n / 100)^(1/4))`.
pub fn schwert_lags(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

pub fn cube_root_lags(n: usize) -> usize {
    ((n - 1) as f64).powf(1.0 / 3.0).trunc() as usize
}

fn check_series(series: &[f64]) -> Result<()> {
    let n = series.len();
    if n < 20 {
        return Err(Error::InsufficientData { needed: 20, got: n });
    }
    let first = series[0];
    if series.iter().all(|&v| v == first) {
        return Err(Error::Inapplicable("constant series".into()));
    }
    Ok(())
}

/// OLS of `Δy_t` on the deterministic terms, `y_{t-1}` and `k` lagged
/// differences over the observations from `Δy_skip` onwards (`skip >= k`).
/// Returns the t-statistic, AIC and number of observations.
fn adf_regression(series: &[f64], dy: &[f64], trend: AdfTrend, k: usize, skip: usize) -> Result<(f64, f64, usize)> {
    let nobs = dy.len() - skip;
    let det = match trend {
        AdfTrend::Constant => 1,
        AdfTrend::ConstantTrend => 2,
    };
    let x = DMatrix::from_fn(nobs, det + 1 + k, |r, c| {
        let i = r + skip;
        if c == 0 {
            1.0
        } else if c < det {
            (i + 1) as f64
        } else if c == det {
            series[i]
        } else {
            dy[i - (c - det)]
        }
    });
    let y = DVector::from_fn(nobs, |r, _| dy[r + skip]);
    let fit = ols(&x, &y)?;
    let rss = fit.residuals.norm_squared();
    let aic = nobs as f64 * (rss / nobs as f64).ln() + 2.0 * (det + 1 + k) as f64;
    Ok((fit.beta[det] / fit.std_error(det), aic, nobs))
}

/// ADF test with a constant, the lag order chosen by AIC among
/// `0..=max_lag`.
pub fn adf_test(series: &[f64], max_lag: Option<usize>) -> Result<AdfResult> {
    adf_test_with(
        series,
        &AdfConfig {
            trend: AdfTrend::Constant,
            lags: AdfLags::Aic { max: max_lag },
        },
    )
}

/// ADF test with a constant and exactly `lags` lagged differences.
pub fn adf_test_fixed(series: &[f64], lags: usize) -> Result<AdfResult> {
    adf_test_with(
        series,
        &AdfConfig {
            trend: AdfTrend::Constant,
            lags: AdfLags::Fixed(lags),
        },
    )
}

/// Under AIC selection all candidate orders are compared on the same
/// observations and the winner is refitted on every observation it can use.
pub fn adf_test_with(series: &[f64], cfg: &AdfConfig) -> Result<AdfResult> {
    check_series(series)?;
    let n = series.len();
    let dy: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();
    let k = match cfg.lags {
        AdfLags::Fixed(k) => k,
        AdfLags::CubeRoot => cube_root_lags(n),
        AdfLags::Aic { max } => {
            let det = match cfg.trend {
                AdfTrend::Constant => 1,
                AdfTrend::ConstantTrend => 2,
            };
            let cap = (n / 2).saturating_sub(det + 1);
            let max = max.unwrap_or_else(|| schwert_lags(n)).min(cap);
            let mut best: Option<(f64, usize)> = None;
            for k in 0..=max {
                let (_, aic, _) = adf_regression(series, &dy, cfg.trend, k, max)?;
                if best.is_none_or(|(b, _)| aic < b) {
                    best = Some((aic, k));
                }
            }
            best.map(|b| b.1).unwrap_or(0)
        }
    };
    if dy.len() <= k + 4 {
        return Err(Error::InsufficientData { needed: k + 6, got: n });
    }
    let (statistic, _, nobs) = adf_regression(series, &dy, cfg.trend, k, k)?;
    let table = match cfg.trend {
        AdfTrend::Constant => &CRIT_C,
        AdfTrend::ConstantTrend => &CRIT_CT,
    };
    let critical_5pct = critical_value(&table[1], nobs);
    Ok(AdfResult {
        statistic,
        lags: k,
        nobs,
        trend: cfg.trend,
        critical_1pct: critical_value(&table[0], nobs),
        critical_5pct,
        critical_10pct: critical_value(&table[2], nobs),
        reject_5pct: statistic < critical_5pct,
    })
}
