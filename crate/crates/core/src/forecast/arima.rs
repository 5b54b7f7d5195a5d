//! Seasonal ARIMA with optional harmonic regressors, fitted by conditional
//! sum of squares.
//!
//! The model for a (possibly Box-Cox transformed) series `y` is
//!
//! ```text
//! ∇^d ∇_s^D y_t = x_t'β + w_t
//! φ(B) Φ(B^s) w_t = θ(B) Θ(B^s) e_t
//! ```
//!
//! where `x_t` holds an intercept (only without differencing) and Fourier
//! terms, differenced the same way as `y`. `β` is estimated by least squares;
//! the ARMA polynomials are then estimated by minimizing `Σ e_t²`, with
//! innovations computed recursively from zero pre-sample values.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Complex, DMatrix, DVector, Schur};
use serde::{Deserialize, Serialize};

use super::fourier::fourier_terms_from;
use super::linalg::ols;
use super::optim::{nelder_mead, NelderMeadConfig};
use super::transform::{box_cox, differencing_polynomial, integrate, inv_box_cox_clamped, poly_mul};
use crate::error::{Error, Result};

/// Model orders and preprocessing options.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArimaSpec {
    pub p: usize,
    pub d: usize,
    pub q: usize,
    pub seasonal_p: usize,
    pub seasonal_d: usize,
    pub seasonal_q: usize,
    /// Seasonal period, 0 for none.
    pub season: usize,
    /// Number of sine/cosine pairs.
    pub fourier_k: usize,
    pub fourier_period: f64,
    /// Constant term; dropped automatically when any differencing is applied.
    pub include_intercept: bool,
    pub boxcox_lambda: Option<f64>,
}

impl ArimaSpec {
    pub fn arima(p: usize, d: usize, q: usize) -> Self {
        Self {
            p,
            d,
            q,
            seasonal_p: 0,
            seasonal_d: 0,
            seasonal_q: 0,
            season: 0,
            fourier_k: 0,
            fourier_period: 0.0,
            include_intercept: false,
            boxcox_lambda: None,
        }
    }

    pub fn sarima(order: (usize, usize, usize), seasonal: (usize, usize, usize), season: usize) -> Self {
        Self {
            seasonal_p: seasonal.0,
            seasonal_d: seasonal.1,
            seasonal_q: seasonal.2,
            season,
            ..Self::arima(order.0, order.1, order.2)
        }
    }

    pub fn with_intercept(mut self, on: bool) -> Self {
        self.include_intercept = on;
        self
    }

    pub fn with_fourier(mut self, k: usize, period: f64) -> Self {
        self.fourier_k = k;
        self.fourier_period = period;
        self
    }

    pub fn with_boxcox(mut self, lambda: Option<f64>) -> Self {
        self.boxcox_lambda = lambda;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.season == 0 && (self.seasonal_p | self.seasonal_d | self.seasonal_q) != 0 {
            return Err(Error::InvalidConfig(
                "seasonal orders require a seasonal period".into(),
            ));
        }
        if self.fourier_k > 0 && !(self.fourier_period > 0.0 && self.fourier_period.is_finite()) {
            return Err(Error::InvalidConfig(
                "fourier terms require a positive period".into(),
            ));
        }
        if let Some(l) = self.boxcox_lambda {
            if !l.is_finite() {
                return Err(Error::InvalidConfig("box-cox lambda must be finite".into()));
            }
        }
        Ok(())
    }

    /// Total differencing order `d + s·D`.
    pub fn differencing_order(&self) -> usize {
        self.d + self.season * self.seasonal_d
    }

    /// Whether an intercept column is actually estimated.
    pub fn has_intercept(&self) -> bool {
        self.include_intercept && self.d == 0 && self.seasonal_d == 0
    }

    pub fn n_arma(&self) -> usize {
        self.p + self.q + self.seasonal_p + self.seasonal_q
    }

    pub fn n_regression(&self) -> usize {
        usize::from(self.has_intercept()) + 2 * self.fourier_k
    }

    /// Estimated coefficients, excluding the innovation variance.
    pub fn n_coefficients(&self) -> usize {
        self.n_arma() + self.n_regression()
    }

    /// Key for deterministic tie-breaking.
    pub fn order_key(&self) -> [usize; 8] {
        [
            self.p,
            self.d,
            self.q,
            self.seasonal_p,
            self.seasonal_d,
            self.seasonal_q,
            self.season,
            self.fourier_k,
        ]
    }
}

impl fmt::Display for ArimaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.season > 0 {
            write!(
                f,
                "SARIMA({},{},{})({},{},{})[{}]",
                self.p, self.d, self.q, self.seasonal_p, self.seasonal_d, self.seasonal_q, self.season
            )?;
        } else {
            write!(f, "ARIMA({},{},{})", self.p, self.d, self.q)?;
        }
        if self.has_intercept() {
            f.write_str(" with intercept")?;
        }
        if self.fourier_k > 0 {
            write!(f, " + fourier(K={}, period={})", self.fourier_k, self.fourier_period)?;
        }
        if let Some(l) = self.boxcox_lambda {
            write!(f, " box-cox({})", l)?;
        }
        Ok(())
    }
}

fn parse_triple(s: &str) -> Result<(usize, usize, usize)> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Error::InvalidConfig(format!("expected three orders in {:?}", s)));
    }
    let num = |t: &str| {
        t.parse::<usize>()
            .map_err(|_| Error::InvalidConfig(format!("invalid order {:?}", t)))
    };
    Ok((num(parts[0])?, num(parts[1])?, num(parts[2])?))
}

/// Parses `(p,d,q)` or `(p,d,q)(P,D,Q)[s]`, optionally prefixed with
/// `ARIMA`/`SARIMA`. Regression and transform options are left unset.
impl FromStr for ArimaSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let upper = compact.to_ascii_uppercase();
        let body = upper
            .strip_prefix("SARIMA")
            .or_else(|| upper.strip_prefix("ARIMA"))
            .unwrap_or(&upper);
        let bad = || Error::InvalidConfig(format!("cannot parse model {:?}", s));
        let rest = body.strip_prefix('(').ok_or_else(bad)?;
        let close = rest.find(')').ok_or_else(bad)?;
        let order = parse_triple(&rest[..close])?;
        let rest = &rest[close + 1..];
        if rest.is_empty() {
            return Ok(Self::arima(order.0, order.1, order.2));
        }
        let rest = rest.strip_prefix('(').ok_or_else(bad)?;
        let close = rest.find(')').ok_or_else(bad)?;
        let seasonal = parse_triple(&rest[..close])?;
        let period = rest[close + 1..]
            .trim_start_matches(['[', '_'])
            .trim_end_matches(']');
        let season = period.parse::<usize>().map_err(|_| bad())?;
        let spec = Self::sarima(order, seasonal, season);
        spec.validate()?;
        Ok(spec)
    }
}

/// A fitted model, including everything needed to forecast.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaFit {
    pub spec: ArimaSpec,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub seasonal_ar: Vec<f64>,
    pub seasonal_ma: Vec<f64>,
    pub intercept: Option<f64>,
    /// `(sin, cos)` coefficient per harmonic.
    pub fourier_coeffs: Vec<(f64, f64)>,
    /// Innovation variance `css / n_effective`.
    pub sigma2: f64,
    pub css: f64,
    pub loglik: f64,
    pub n_effective: usize,
    /// Innovations on the differenced scale.
    pub residuals: Vec<f64>,
    /// Largest modulus among the inverse AR roots (< 1 means stationary).
    pub ar_inverse_root_max: f64,
    /// Largest modulus among the inverse MA roots (< 1 means invertible).
    pub ma_inverse_root_max: f64,
    pub iterations: usize,
    /// Best objective value after each optimizer iteration.
    pub optimizer_trace: Vec<f64>,
    regression: Vec<f64>,
    transformed: Vec<f64>,
    arma_input: Vec<f64>,
}

impl ArimaFit {
    pub fn is_stationary(&self) -> bool {
        self.ar_inverse_root_max < 1.0
    }

    pub fn is_invertible(&self) -> bool {
        self.ma_inverse_root_max < 1.0
    }

    pub fn n_observations(&self) -> usize {
        self.transformed.len()
    }

    /// Named coefficient list (`ar1`, `ma1`, `sar1`, `sma1`, `intercept`,
    /// `s1-P`, `c1-P`).
    pub fn named_coefficients(&self) -> Vec<(String, f64)> {
        let mut out = Vec::new();
        let groups: [(&str, &[f64]); 4] = [
            ("ar", &self.ar),
            ("ma", &self.ma),
            ("sar", &self.seasonal_ar),
            ("sma", &self.seasonal_ma),
        ];
        for (prefix, values) in groups {
            for (i, v) in values.iter().enumerate() {
                out.push((format!("{}{}", prefix, i + 1), *v));
            }
        }
        if let Some(c) = self.intercept {
            out.push(("intercept".into(), c));
        }
        for (k, (a, b)) in self.fourier_coeffs.iter().enumerate() {
            out.push((format!("s{}-{}", k + 1, self.spec.fourier_period), *a));
            out.push((format!("c{}-{}", k + 1, self.spec.fourier_period), *b));
        }
        out
    }
}

/// Coefficients `a_k` of `1 - Σ a_k B^k = φ(B)Φ(B^s)`, index 0 unused.
fn expand_ar(phi: &[f64], seasonal_phi: &[f64], s: usize) -> Vec<f64> {
    let mut base = vec![1.0];
    base.extend(phi.iter().map(|c| -c));
    let mut seasonal = vec![0.0; seasonal_phi.len() * s + 1];
    seasonal[0] = 1.0;
    for (j, c) in seasonal_phi.iter().enumerate() {
        seasonal[(j + 1) * s] = -c;
    }
    poly_mul(&base, &seasonal).iter().map(|c| -c).collect()
}

/// Coefficients `b_k` of `1 + Σ b_k B^k = θ(B)Θ(B^s)`, index 0 unused.
fn expand_ma(theta: &[f64], seasonal_theta: &[f64], s: usize) -> Vec<f64> {
    let mut base = vec![1.0];
    base.extend_from_slice(theta);
    let mut seasonal = vec![0.0; seasonal_theta.len() * s + 1];
    seasonal[0] = 1.0;
    for (j, c) in seasonal_theta.iter().enumerate() {
        seasonal[(j + 1) * s] = *c;
    }
    poly_mul(&base, &seasonal)
}

/// Innovations of an ARMA filter with zero pre-sample values.
fn innovations(w: &[f64], a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; w.len()];
    for t in 0..w.len() {
        let mut v = w[t];
        for k in 1..a.len().min(t + 1) {
            v -= a[k] * w[t - k];
        }
        for k in 1..b.len().min(t + 1) {
            v -= b[k] * e[t - k];
        }
        e[t] = v;
    }
    e
}

struct ArmaParams<'a> {
    phi: &'a [f64],
    theta: &'a [f64],
    seasonal_phi: &'a [f64],
    seasonal_theta: &'a [f64],
}

fn split_params<'a>(x: &'a [f64], spec: &ArimaSpec) -> ArmaParams<'a> {
    let (phi, rest) = x.split_at(spec.p);
    let (theta, rest) = rest.split_at(spec.q);
    let (seasonal_phi, seasonal_theta) = rest.split_at(spec.seasonal_p);
    ArmaParams {
        phi,
        theta,
        seasonal_phi,
        seasonal_theta,
    }
}

fn autocovariances(x: &[f64], max_lag: usize) -> Vec<f64> {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    (0..=max_lag)
        .map(|k| {
            if k >= n {
                return 0.0;
            }
            (k..n).map(|t| (x[t] - mean) * (x[t - k] - mean)).sum::<f64>() / n as f64
        })
        .collect()
}

/// Solves the autocorrelation equations at lags `step, 2·step, …`.
fn yule_walker(x: &[f64], order: usize, step: usize) -> Vec<f64> {
    if order == 0 {
        return Vec::new();
    }
    let gamma = autocovariances(x, order * step);
    if !(gamma[0] > 0.0) {
        return vec![0.0; order];
    }
    let r = DMatrix::from_fn(order, order, |i, j| gamma[i.abs_diff(j) * step]);
    let rhs = DVector::from_fn(order, |i, _| gamma[(i + 1) * step]);
    match r.lu().solve(&rhs) {
        Some(sol) if sol.iter().all(|v| v.is_finite()) => {
            sol.iter().map(|v| v.clamp(-0.99, 0.99)).collect()
        }
        _ => vec![0.0; order],
    }
}

/// Largest modulus of the inverse roots of `1 - Σ c_k B^k`.
fn inverse_root_max(coeffs: &[f64]) -> f64 {
    let mut c: Vec<f64> = coeffs.to_vec();
    while c.last().is_some_and(|v| *v == 0.0) {
        c.pop();
    }
    let m = c.len();
    if m == 0 {
        return 0.0;
    }
    let companion = DMatrix::from_fn(m, m, |i, j| {
        if i == 0 {
            c[j]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    // QR iterations can cycle on companions of sparse lag polynomials
    match Schur::try_new(companion, f64::EPSILON, 10_000) {
        Some(schur) => schur.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max),
        None => durand_kerner(&c).iter().map(|z| z.norm()).fold(0.0, f64::max),
    }
}

fn negated(c: &[f64]) -> Vec<f64> {
    c.iter().map(|v| -v).collect()
}

/// Roots of the monic `z^m - c_1 z^(m-1) - ... - c_m`, i.e. the inverse
/// roots of `1 - Σ c_k B^k`.
fn durand_kerner(c: &[f64]) -> Vec<Complex<f64>> {
    let m = c.len();
    let eval = |z: Complex<f64>| {
        let mut v = Complex::new(1.0, 0.0);
        for &ck in c {
            v = v * z - ck;
        }
        v
    };
    let bound = 1.0 + c.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let seed = Complex::new(0.4, 0.9);
    let mut roots: Vec<Complex<f64>> = (0..m).map(|k| seed.powu(k as u32) * bound).collect();
    for _ in 0..2000 {
        let mut moved = 0.0f64;
        for i in 0..m {
            let mut denom = Complex::new(1.0, 0.0);
            for j in 0..m {
                if j != i {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm() == 0.0 {
                denom = Complex::new(f64::EPSILON, 0.0);
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            moved = moved.max(step.norm());
        }
        if moved < 1e-14 {
            break;
        }
    }
    roots
}

/// Inverse-root maximum of `(1 - Σ φ_k B^k)(1 - Σ Φ_k B^(ks))`, from its
/// factors.
fn factored_inverse_root_max(phi: &[f64], seasonal_phi: &[f64], s: usize) -> f64 {
    let seasonal = inverse_root_max(seasonal_phi);
    let seasonal = if s > 0 { seasonal.powf(1.0 / s as f64) } else { seasonal };
    inverse_root_max(phi).max(seasonal)
}

/// Regressor matrix rows (intercept, then Fourier pairs) for `t = 1..=n`.
fn regressors(spec: &ArimaSpec, n: usize) -> Result<Vec<Vec<f64>>> {
    let fourier = if spec.fourier_k > 0 {
        Some(fourier_terms_from(1, n, spec.fourier_period, spec.fourier_k)?)
    } else {
        None
    };
    Ok((0..n)
        .map(|t| {
            let mut row = Vec::with_capacity(spec.n_regression());
            if spec.has_intercept() {
                row.push(1.0);
            }
            if let Some(f) = &fourier {
                row.extend_from_slice(&f[t]);
            }
            row
        })
        .collect())
}

/// Applies the differencing polynomial to every regressor column.
fn difference_rows(rows: &[Vec<f64>], poly: &[f64]) -> Vec<Vec<f64>> {
    let order = poly.len() - 1;
    (order..rows.len())
        .map(|t| {
            let width = rows[t].len();
            (0..width)
                .map(|j| poly.iter().enumerate().map(|(k, c)| c * rows[t - k][j]).sum())
                .collect()
        })
        .collect()
}

fn apply_poly(series: &[f64], poly: &[f64]) -> Vec<f64> {
    let order = poly.len() - 1;
    (order..series.len())
        .map(|t| poly.iter().enumerate().map(|(k, c)| c * series[t - k]).sum())
        .collect()
}

/// Fits `spec` to `series` with the default optimizer settings.
pub fn fit(series: &[f64], spec: &ArimaSpec) -> Result<ArimaFit> {
    fit_with(series, spec, &NelderMeadConfig::default())
}

pub fn fit_with(series: &[f64], spec: &ArimaSpec, optimizer: &NelderMeadConfig) -> Result<ArimaFit> {
    spec.validate()?;
    let failed = |reason: String| Error::FitFailed {
        model: spec.to_string(),
        reason,
    };
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("series contains non-finite values".into()));
    }
    let transformed = match spec.boxcox_lambda {
        Some(l) => box_cox(series, l)?,
        None => series.to_vec(),
    };
    let n = transformed.len();
    let poly = differencing_polynomial(spec.d, spec.seasonal_d, spec.season);
    let order = poly.len() - 1;
    let needed = order + spec.n_coefficients() + 2 + spec.p + spec.season * spec.seasonal_p;
    if n < needed {
        return Err(Error::InsufficientData { needed, got: n });
    }
    let z = apply_poly(&transformed, &poly);

    let (regression, w) = if spec.n_regression() > 0 {
        let rows = difference_rows(&regressors(spec, n)?, &poly);
        let x = DMatrix::from_fn(rows.len(), spec.n_regression(), |i, j| rows[i][j]);
        let y = DVector::from_column_slice(&z);
        let fit = ols(&x, &y).map_err(|e| failed(format!("regression step: {}", e)))?;
        (fit.beta.iter().copied().collect::<Vec<_>>(), fit.residuals.iter().copied().collect())
    } else {
        (Vec::new(), z)
    };

    let s = spec.season;
    let mut start = yule_walker(&w, spec.p, 1);
    start.extend(std::iter::repeat(0.0).take(spec.q));
    start.extend(yule_walker(&w, spec.seasonal_p, s.max(1)));
    start.extend(std::iter::repeat(0.0).take(spec.seasonal_q));

    let objective = |x: &[f64]| {
        let prm = split_params(x, spec);
        let a = expand_ar(prm.phi, prm.seasonal_phi, s);
        let b = expand_ma(prm.theta, prm.seasonal_theta, s);
        innovations(&w, &a, &b).iter().map(|e| e * e).sum::<f64>()
    };
    let result = nelder_mead(objective, &start, optimizer);
    if !result.converged {
        return Err(failed(format!(
            "no convergence after {} iterations (best css {})",
            result.iterations, result.fx
        )));
    }

    let prm = split_params(&result.x, spec);
    let a = expand_ar(prm.phi, prm.seasonal_phi, s);
    let b = expand_ma(prm.theta, prm.seasonal_theta, s);
    let residuals = innovations(&w, &a, &b);
    let css: f64 = residuals.iter().map(|e| e * e).sum();
    let n_eff = w.len();
    let sigma2 = css / n_eff as f64;
    let loglik = -0.5 * n_eff as f64 * ((2.0 * std::f64::consts::PI * sigma2).ln() + 1.0);

    let (intercept, fourier_flat) = if spec.has_intercept() {
        (Some(regression[0]), &regression[1..])
    } else {
        (None, &regression[..])
    };
    let fourier_coeffs = fourier_flat.chunks(2).map(|c| (c[0], c[1])).collect();

    Ok(ArimaFit {
        spec: *spec,
        ar: prm.phi.to_vec(),
        ma: prm.theta.to_vec(),
        seasonal_ar: prm.seasonal_phi.to_vec(),
        seasonal_ma: prm.seasonal_theta.to_vec(),
        intercept,
        fourier_coeffs,
        sigma2,
        css,
        loglik,
        n_effective: n_eff,
        ar_inverse_root_max: factored_inverse_root_max(prm.phi, prm.seasonal_phi, s),
        ma_inverse_root_max: factored_inverse_root_max(&negated(prm.theta), &negated(prm.seasonal_theta), s),
        iterations: result.iterations,
        optimizer_trace: result.trace,
        residuals,
        regression,
        transformed,
        arma_input: w,
    })
}

/// Point forecasts for the next `horizon` steps on the original scale.
pub fn forecast(fit: &ArimaFit, horizon: usize) -> Result<Vec<f64>> {
    if horizon == 0 {
        return Err(Error::Domain("forecast horizon must be >= 1".into()));
    }
    let spec = &fit.spec;
    let s = spec.season;
    let a = expand_ar(&fit.ar, &fit.seasonal_ar, s);
    let b = expand_ma(&fit.ma, &fit.seasonal_ma, s);

    let n_w = fit.arma_input.len();
    let mut w = fit.arma_input.clone();
    let mut e = fit.residuals.clone();
    for _ in 0..horizon {
        let t = w.len();
        let mut v = 0.0;
        for k in 1..a.len().min(t + 1) {
            v += a[k] * w[t - k];
        }
        for k in 1..b.len().min(t + 1) {
            v += b[k] * e[t - k];
        }
        w.push(v);
        e.push(0.0);
    }
    let mut z_future: Vec<f64> = w[n_w..].to_vec();

    let poly = differencing_polynomial(spec.d, spec.seasonal_d, spec.season);
    if spec.n_regression() > 0 {
        let n = fit.transformed.len();
        let rows = difference_rows(&regressors(spec, n + horizon)?, &poly);
        let future = &rows[rows.len() - horizon..];
        for (z, row) in z_future.iter_mut().zip(future) {
            *z += row.iter().zip(&fit.regression).map(|(x, beta)| x * beta).sum::<f64>();
        }
    }

    let level = integrate(&fit.transformed, &z_future, &poly)?;
    Ok(match spec.boxcox_lambda {
        Some(l) => inv_box_cox_clamped(&level, l),
        None => level,
    })
}
