//! Classical additive decomposition: `y = trend + seasonal + residual`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default period for daily data (weekly cycle).
pub const DAILY_PERIOD: usize = 7;
/// Default period for monthly data.
pub const MONTHLY_PERIOD: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionResult {
    /// Centered moving average; `None` in the half-window at each edge.
    pub trend: Vec<Option<f64>>,
    /// Periodic component with zero mean over one period.
    pub seasonal: Vec<f64>,
    /// `None` wherever the trend is undefined.
    pub residual: Vec<Option<f64>>,
    pub period: usize,
}

impl DecompositionResult {
    /// Index range on which trend and residual are defined.
    pub fn interior(&self) -> std::ops::Range<usize> {
        let half = self.period / 2;
        half..self.trend.len() - half
    }
}

/// Centered moving average of width `period`; even periods use the 2×period
/// half-weight filter.
pub fn centered_moving_average(series: &[f64], period: usize) -> Vec<Option<f64>> {
    let n = series.len();
    let half = period / 2;
    let mut out = vec![None; n];
    if n < 2 * half + 1 {
        return out;
    }
    for (t, slot) in out.iter_mut().enumerate().take(n - half).skip(half) {
        let value = if period % 2 == 1 {
            series[t - half..=t + half].iter().sum::<f64>() / period as f64
        } else {
            let inner: f64 = series[t - half + 1..t + half].iter().sum();
            (0.5 * series[t - half] + inner + 0.5 * series[t + half]) / period as f64
        };
        *slot = Some(value);
    }
    out
}

pub fn decompose_additive(series: &[f64], period: usize) -> Result<DecompositionResult> {
    if period == 0 {
        return Err(Error::Domain("period must be >= 1".into()));
    }
    if series.len() < 2 * period {
        return Err(Error::InsufficientData {
            needed: 2 * period,
            got: series.len(),
        });
    }
    let trend = centered_moving_average(series, period);

    let mut sums = vec![0.0; period];
    let mut counts = vec![0usize; period];
    for (t, tr) in trend.iter().enumerate() {
        if let Some(tr) = tr {
            sums[t % period] += series[t] - tr;
            counts[t % period] += 1;
        }
    }
    let mut figure: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect();
    let centre = figure.iter().sum::<f64>() / period as f64;
    for f in &mut figure {
        *f -= centre;
    }

    let seasonal: Vec<f64> = (0..series.len()).map(|t| figure[t % period]).collect();
    let residual = trend
        .iter()
        .enumerate()
        .map(|(t, tr)| tr.map(|tr| series[t] - tr - seasonal[t]))
        .collect();

    Ok(DecompositionResult {
        trend,
        seasonal,
        residual,
        period,
    })
}
