//! Grid search over candidate specifications.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::arima::{fit, ArimaFit, ArimaSpec};
use super::criteria::{information_criteria, InformationCriteria};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    #[default]
    Aic,
    Aicc,
    Bic,
}

impl Criterion {
    /// Value used for ranking; undefined AICc sorts last.
    pub fn score(&self, ic: &InformationCriteria) -> f64 {
        let v = match self {
            Criterion::Aic => ic.aic,
            Criterion::Aicc => ic.aicc.unwrap_or(f64::INFINITY),
            Criterion::Bic => ic.bic,
        };
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "aic" => Ok(Criterion::Aic),
            "aicc" => Ok(Criterion::Aicc),
            "bic" => Ok(Criterion::Bic),
            other => Err(Error::InvalidConfig(format!("unknown criterion {:?}", other))),
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Aic => "aic",
            Criterion::Aicc => "aicc",
            Criterion::Bic => "bic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedModel {
    pub rank: usize,
    /// Position in the candidate list.
    pub candidate: usize,
    pub spec: ArimaSpec,
    pub label: String,
    pub loglik: f64,
    pub criteria: InformationCriteria,
}

#[derive(Debug, Clone)]
pub struct Selection {
    pub best: ArimaFit,
    pub table: Vec<RankedModel>,
    /// `(model, reason)` for candidates that could not be fitted.
    pub failures: Vec<(String, String)>,
}

/// Fits every candidate and ranks them by `criterion`. Ties go to fewer
/// coefficients, then to the lexicographically smaller order tuple.
pub fn select_model(series: &[f64], candidates: &[ArimaSpec], criterion: Criterion) -> Result<Selection> {
    if candidates.is_empty() {
        return Err(Error::InvalidConfig("no candidate models".into()));
    }
    let results: Vec<Result<ArimaFit>> = candidates.par_iter().map(|spec| fit(series, spec)).collect();

    let mut fits = Vec::new();
    let mut failures = Vec::new();
    for (i, (spec, res)) in candidates.iter().zip(results).enumerate() {
        match res {
            Ok(f) => fits.push((i, f)),
            Err(e) => failures.push((spec.to_string(), e.to_string())),
        }
    }
    if fits.is_empty() {
        return Err(Error::SelectionFailed(failures));
    }

    let mut scored: Vec<(usize, ArimaFit, InformationCriteria)> = fits
        .into_iter()
        .map(|(i, f)| {
            let ic = information_criteria(&f);
            (i, f, ic)
        })
        .collect();
    scored.sort_by(|a, b| {
        criterion
            .score(&a.2)
            .total_cmp(&criterion.score(&b.2))
            .then_with(|| a.1.spec.n_coefficients().cmp(&b.1.spec.n_coefficients()))
            .then_with(|| a.1.spec.order_key().cmp(&b.1.spec.order_key()))
            .then(a.0.cmp(&b.0))
            .then(Ordering::Equal)
    });

    let table = scored
        .iter()
        .enumerate()
        .map(|(rank, (i, f, ic))| RankedModel {
            rank: rank + 1,
            candidate: *i,
            spec: f.spec,
            label: f.spec.to_string(),
            loglik: f.loglik,
            criteria: *ic,
        })
        .collect();
    let best = scored.swap_remove(0).1;
    Ok(Selection {
        best,
        table,
        failures,
    })
}
