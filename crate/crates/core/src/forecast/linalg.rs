//! Ordinary least squares on small dense design matrices.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub(crate) struct OlsFit {
    pub beta: DVector<f64>,
    pub residuals: DVector<f64>,
    /// `(X'X)^-1`
    pub xtx_inv: DMatrix<f64>,
}

impl OlsFit {
    /// Residual variance with `n - k` degrees of freedom.
    pub fn sigma2(&self) -> f64 {
        let n = self.residuals.len();
        let k = self.beta.len();
        self.residuals.norm_squared() / (n - k) as f64
    }

    pub fn std_error(&self, i: usize) -> f64 {
        (self.sigma2() * self.xtx_inv[(i, i)]).sqrt()
    }
}

/// Solves `min |y - X b|`; rank-deficient designs are rejected.
pub(crate) fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<OlsFit> {
    let (n, k) = x.shape();
    if n < k || k == 0 {
        return Err(Error::InsufficientData { needed: k.max(1), got: n });
    }
    let sv = x.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if !(max > 0.0) || min / max < 1e-10 {
        return Err(Error::Inapplicable("regressor matrix is rank deficient".into()));
    }
    let xt = x.transpose();
    let xtx = &xt * x;
    let chol = xtx
        .cholesky()
        .ok_or_else(|| Error::Inapplicable("normal equations are not positive definite".into()))?;
    let beta = chol.solve(&(&xt * y));
    let residuals = y - x * &beta;
    Ok(OlsFit {
        beta,
        residuals,
        xtx_inv: chol.inverse(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_line() {
        let x = DMatrix::from_fn(5, 2, |i, j| if j == 0 { 1.0 } else { i as f64 });
        let y = DVector::from_fn(5, |i, _| 2.0 + 3.0 * i as f64);
        let fit = ols(&x, &y).unwrap();
        assert!((fit.beta[0] - 2.0).abs() < 1e-10);
        assert!((fit.beta[1] - 3.0).abs() < 1e-10);
        assert!(fit.residuals.norm() < 1e-9);
    }

    #[test]
    fn collinear_design_rejected() {
        let x = DMatrix::from_fn(6, 2, |_, j| if j == 0 { 1.0 } else { 4.0 });
        let y = DVector::from_element(6, 1.0);
        assert!(matches!(ols(&x, &y), Err(Error::Inapplicable(_))));
    }
}
