//! Box-Jenkins forecasting toolkit: stationarity testing, transforms,
//! seasonal ARIMA with harmonic regressors, information criteria, residual
//! diagnostics and point forecasts.

pub mod adf;
pub mod arima;
pub mod criteria;
pub mod diagnostics;
pub mod fourier;
mod linalg;
pub mod optim;
pub mod select;
pub mod transform;

pub use adf::{adf_test, adf_test_fixed, adf_test_with, AdfConfig, AdfLags, AdfResult, AdfTrend};
pub use arima::{fit, fit_with, forecast, ArimaFit, ArimaSpec};
pub use criteria::{information_criteria, InformationCriteria};
pub use diagnostics::{acf, chi_square_sf, ljung_box, LjungBox};
pub use fourier::fourier_terms;
pub use select::{select_model, Criterion, RankedModel, Selection};
pub use transform::{box_cox, difference, inv_box_cox, seasonal_difference};

use serde::{Deserialize, Serialize};

/// Stationarity, whiteness and fit-quality summary of a selected model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticReport {
    pub model: String,
    pub adf: Option<AdfResult>,
    pub ljung_box: Option<LjungBox>,
    pub criteria: InformationCriteria,
    pub sigma2: f64,
    pub loglik: f64,
    pub stationary: bool,
    pub invertible: bool,
    pub coefficients: Vec<(String, f64)>,
}
