//! Point-error measures: RMSE, MAE and MASE.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_pair(actual: &[f64], predicted: &[f64]) -> Result<()> {
    if actual.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            left: actual.len(),
            right: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(Error::EmptySeries);
    }
    Ok(())
}

/// Root mean squared error.
pub fn rmse(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_pair(actual, predicted)?;
    let ss: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p) * (a - p))
        .sum();
    Ok((ss / actual.len() as f64).sqrt())
}

/// Mean absolute error.
pub fn mae(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_pair(actual, predicted)?;
    let s: f64 = actual.iter().zip(predicted).map(|(a, p)| (a - p).abs()).sum();
    Ok(s / actual.len() as f64)
}

/// Mean absolute lag-`m` difference of `series`, the in-sample naive error.
///
/// Returns `None` when the scale is zero.
pub fn naive_scale(series: &[f64], m: usize) -> Result<Option<f64>> {
    if m == 0 {
        return Err(Error::Domain("seasonal lag must be >= 1".into()));
    }
    if m >= series.len() {
        return Err(Error::Domain(format!(
            "seasonal lag {} needs more than {} points",
            m,
            series.len()
        )));
    }
    let s: f64 = (m..series.len()).map(|t| (series[t] - series[t - m]).abs()).sum();
    let scale = s / (series.len() - m) as f64;
    Ok(if scale > 0.0 { Some(scale) } else { None })
}

/// MASE with the naive scale computed on `actual` itself.
pub fn mase(actual: &[f64], predicted: &[f64], m: usize) -> Result<Option<f64>> {
    mase_scaled(actual, predicted, actual, m)
}

/// MASE of a forecast, scaled by the naive error of the training window.
pub fn mase_scaled(
    actual: &[f64],
    predicted: &[f64],
    training: &[f64],
    m: usize,
) -> Result<Option<f64>> {
    let numerator = mae(actual, predicted)?;
    Ok(naive_scale(training, m)?.map(|scale| numerator / scale))
}

/// All three error measures for one actual/predicted pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub rmse: f64,
    pub mae: f64,
    /// `None` when the naive scale is zero.
    pub mase: Option<f64>,
    pub n: usize,
    /// Seasonal lag of the MASE scale.
    pub m: usize,
    /// Which series provided the MASE scale.
    pub mase_scale_source: String,
}

impl ErrorReport {
    /// Scores `predicted` against `actual`. The MASE scale comes from
    /// `training` when given, otherwise from `actual`.
    pub fn compute(
        actual: &[f64],
        predicted: &[f64],
        training: Option<&[f64]>,
        m: usize,
    ) -> Result<Self> {
        let (scale_series, source) = match training {
            Some(t) => (t, "training"),
            None => (actual, "actual"),
        };
        Ok(Self {
            rmse: rmse(actual, predicted)?,
            mae: mae(actual, predicted)?,
            mase: mase_scaled(actual, predicted, scale_series, m)?,
            n: actual.len(),
            m,
            mase_scale_source: source.to_string(),
        })
    }
}
