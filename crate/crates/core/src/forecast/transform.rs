//! Differencing and Box-Cox transforms together with their inverses.

use crate::error::{Error, Result};

/// Applies the first difference `d` times.
pub fn difference(series: &[f64], d: usize) -> Result<Vec<f64>> {
    if series.len() <= d {
        return Err(Error::InsufficientData {
            needed: d + 1,
            got: series.len(),
        });
    }
    let mut out = series.to_vec();
    for _ in 0..d {
        out = out.windows(2).map(|w| w[1] - w[0]).collect();
    }
    Ok(out)
}

/// Applies the lag-`s` difference `big_d` times.
pub fn seasonal_difference(series: &[f64], big_d: usize, s: usize) -> Result<Vec<f64>> {
    if big_d > 0 && s == 0 {
        return Err(Error::Domain("seasonal period must be >= 1".into()));
    }
    if series.len() <= big_d * s {
        return Err(Error::InsufficientData {
            needed: big_d * s + 1,
            got: series.len(),
        });
    }
    let mut out = series.to_vec();
    for _ in 0..big_d {
        out = (s..out.len()).map(|t| out[t] - out[t - s]).collect();
    }
    Ok(out)
}

/// Coefficients `c` of `(1 - B)^d (1 - B^s)^D`, with `c[0] = 1`.
pub fn differencing_polynomial(d: usize, big_d: usize, s: usize) -> Vec<f64> {
    let mut poly = vec![1.0];
    for _ in 0..d {
        poly = poly_mul(&poly, &[1.0, -1.0]);
    }
    if s > 0 {
        let mut seasonal = vec![0.0; s + 1];
        seasonal[0] = 1.0;
        seasonal[s] = -1.0;
        for _ in 0..big_d {
            poly = poly_mul(&poly, &seasonal);
        }
    }
    poly
}

pub(crate) fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Extends `history` with values whose differences are `future_diffs`.
///
/// `poly` is the full differencing polynomial; the first `poly.len() - 1`
/// history values act as the retained initial values.
pub fn integrate(history: &[f64], future_diffs: &[f64], poly: &[f64]) -> Result<Vec<f64>> {
    let order = poly.len() - 1;
    if history.len() < order {
        return Err(Error::InsufficientData {
            needed: order,
            got: history.len(),
        });
    }
    let mut full = history.to_vec();
    for &z in future_diffs {
        let t = full.len();
        let carried: f64 = (1..=order).map(|k| poly[k] * full[t - k]).sum();
        full.push(z - carried);
    }
    Ok(full.split_off(history.len()))
}

/// Box-Cox transform: `(y^λ - 1) / λ`, or `ln y` when `λ = 0`.
pub fn box_cox(series: &[f64], lambda: f64) -> Result<Vec<f64>> {
    series
        .iter()
        .map(|&y| {
            if lambda == 0.0 {
                if y > 0.0 {
                    Ok(y.ln())
                } else {
                    Err(Error::Domain(format!("box-cox with lambda 0 needs y > 0, got {}", y)))
                }
            } else if lambda < 0.0 && y <= 0.0 {
                Err(Error::Domain(format!("box-cox with lambda < 0 needs y > 0, got {}", y)))
            } else if y < 0.0 {
                Err(Error::Domain(format!("box-cox needs y >= 0, got {}", y)))
            } else {
                Ok((y.powf(lambda) - 1.0) / lambda)
            }
        })
        .collect()
}

/// Inverse of [`box_cox`]; fails outside the image of the transform.
pub fn inv_box_cox(series: &[f64], lambda: f64) -> Result<Vec<f64>> {
    series
        .iter()
        .map(|&x| {
            if lambda == 0.0 {
                Ok(x.exp())
            } else {
                let base = lambda * x + 1.0;
                if base < 0.0 {
                    Err(Error::Domain(format!("{} is outside the box-cox image for lambda {}", x, lambda)))
                } else {
                    Ok(base.powf(1.0 / lambda))
                }
            }
        })
        .collect()
}

/// Inverse Box-Cox for forecasts, clamping values below the image to zero.
pub fn inv_box_cox_clamped(series: &[f64], lambda: f64) -> Vec<f64> {
    series
        .iter()
        .map(|&x| {
            if lambda == 0.0 {
                x.exp()
            } else {
                (lambda * x + 1.0).max(0.0).powf(1.0 / lambda)
            }
        })
        .collect()
}
