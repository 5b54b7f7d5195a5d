//! Default candidate sets for model selection.

use std::str::FromStr;

use mkd_core::forecast::ArimaSpec;

use crate::config::Settings;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grid {
    /// Seasonal ARIMA for monthly aggregates.
    Monthly,
    /// ARMA errors on harmonic regressors for daily series.
    Daily,
    /// Plain ARMA(p, q) with intercept, p <= 2, q <= 2.
    Arma,
}

impl FromStr for Grid {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "monthly" => Ok(Grid::Monthly),
            "daily" => Ok(Grid::Daily),
            "arma" => Ok(Grid::Arma),
            other => Err(CliError::Usage(format!(
                "unknown grid `{}` (expected monthly, daily or arma)",
                other
            ))),
        }
    }
}

impl Grid {
    pub fn candidates(&self, settings: &Settings) -> Vec<ArimaSpec> {
        match self {
            Grid::Monthly => monthly_grid(settings.season),
            Grid::Daily => daily_grid(settings),
            Grid::Arma => arma_grid(2, 2),
        }
    }
}

/// SARIMA(p,0,q)(P,1,Q)[s] with p <= 2, q, P, Q <= 1.
pub fn monthly_grid(season: usize) -> Vec<ArimaSpec> {
    let mut out = Vec::new();
    for p in 0..=2 {
        for q in 0..=1 {
            for big_p in 0..=1 {
                for big_q in 0..=1 {
                    out.push(ArimaSpec::sarima((p, 0, q), (big_p, 1, big_q), season));
                }
            }
        }
    }
    out
}

pub fn daily_grid(settings: &Settings) -> Vec<ArimaSpec> {
    let mut out = Vec::new();
    for p in 0..=settings.daily_max_p {
        for q in 0..=settings.daily_max_q {
            let mut spec = ArimaSpec::arima(p, 0, q)
                .with_intercept(true)
                .with_boxcox(settings.boxcox);
            if settings.fourier_k > 0 {
                spec = spec.with_fourier(settings.fourier_k, settings.fourier_period);
            }
            out.push(spec);
        }
    }
    out
}

pub fn arma_grid(max_p: usize, max_q: usize) -> Vec<ArimaSpec> {
    (0..=max_p)
        .flat_map(|p| (0..=max_q).map(move |q| ArimaSpec::arima(p, 0, q).with_intercept(true)))
        .collect()
}
