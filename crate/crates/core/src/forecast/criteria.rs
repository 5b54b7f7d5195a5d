//! AIC, AICc and BIC.

use serde::{Deserialize, Serialize};

use super::arima::ArimaFit;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InformationCriteria {
    pub aic: f64,
    /// `None` when `n <= k + 1`.
    pub aicc: Option<f64>,
    pub bic: f64,
    /// Estimated parameters, including the innovation variance.
    pub k: usize,
    pub n: usize,
}

/// Criteria from a log-likelihood, `k` parameters and `n` observations.
pub fn criteria_from(loglik: f64, k: usize, n: usize) -> InformationCriteria {
    let kf = k as f64;
    let nf = n as f64;
    let aic = -2.0 * loglik + 2.0 * kf;
    let aicc = (n > k + 1).then(|| aic + 2.0 * kf * (kf + 1.0) / (nf - kf - 1.0));
    let bic = -2.0 * loglik + kf * nf.ln();
    InformationCriteria { aic, aicc, bic, k, n }
}

pub fn information_criteria(fit: &ArimaFit) -> InformationCriteria {
    criteria_from(fit.loglik, fit.spec.n_coefficients() + 1, fit.n_effective)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_values() {
        let ic = criteria_from(-100.0, 3, 50);
        assert!((ic.aic - 206.0).abs() < 1e-12);
        assert!((ic.aicc.unwrap() - (206.0 + 24.0 / 46.0)).abs() < 1e-12);
        assert!((ic.aicc.unwrap() - 206.5217).abs() < 1e-4);
        assert!((ic.bic - (200.0 + 3.0 * 50f64.ln())).abs() < 1e-12);
        assert!((ic.bic - 211.737).abs() < 1e-3);
    }

    #[test]
    fn aicc_exceeds_aic() {
        for n in 5..200 {
            let ic = criteria_from(-42.0, 3, n);
            assert!(ic.aicc.unwrap() > ic.aic);
        }
        assert!(criteria_from(-1.0, 3, 4).aicc.is_none());
    }
}
