//! Series types shared by every stage of the pipeline.
//!
//! An [`AggregatedSeries`] is the coarse input (one count per period), a
//! [`DailySeries`] is the fine-grained output aligned to those periods, and a
//! [`PriorSeries`] is the flat per-day rate obtained by spreading each
//! aggregate evenly over its unit.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default divisor applied to the prior standard deviation to obtain the
/// daily-scale sigma.
pub const DEFAULT_SIGMA_DIVISOR: f64 = 30.0;

/// One aggregation period: a label, its total count and its length in days.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregateUnit {
    pub label: String,
    pub value: u64,
    pub length: usize,
}

impl AggregateUnit {
    pub fn new(label: impl Into<String>, value: u64, length: usize) -> Self {
        Self {
            label: label.into(),
            value,
            length,
        }
    }
}

/// Ordered aggregation units. Labels must be strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregatedSeries {
    units: Vec<AggregateUnit>,
}

impl AggregatedSeries {
    /// Validates unit lengths and label ordering.
    ///
    /// Labels are compared as strings, which orders ISO-8601 periods
    /// correctly.
    pub fn new(units: Vec<AggregateUnit>) -> Result<Self> {
        if units.is_empty() {
            return Err(Error::EmptySeries);
        }
        for (i, unit) in units.iter().enumerate() {
            if unit.length == 0 {
                return Err(Error::Domain(format!(
                    "unit {} ({}) has zero length",
                    i, unit.label
                )));
            }
        }
        for pair in units.windows(2) {
            if pair[0].label >= pair[1].label {
                return Err(Error::Domain(format!(
                    "unit labels not strictly increasing: {:?} then {:?}",
                    pair[0].label, pair[1].label
                )));
            }
        }
        Ok(Self { units })
    }

    /// Builds a series with generated, zero-padded labels.
    pub fn from_values(values: &[u64], lengths: &[usize]) -> Result<Self> {
        if values.len() != lengths.len() {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: lengths.len(),
            });
        }
        let units = values
            .iter()
            .zip(lengths)
            .enumerate()
            .map(|(i, (&v, &l))| AggregateUnit::new(format!("u{:08}", i), v, l))
            .collect();
        Self::new(units)
    }

    pub fn units(&self) -> &[AggregateUnit] {
        &self.units
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn values(&self) -> Vec<u64> {
        self.units.iter().map(|u| u.value).collect()
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.units.iter().map(|u| u.length).collect()
    }

    pub fn total(&self) -> u64 {
        self.units.iter().map(|u| u.value).sum()
    }

    pub fn num_days(&self) -> usize {
        self.units.iter().map(|u| u.length).sum()
    }

    /// Keeps the first `n` units.
    pub fn head(&self, n: usize) -> Result<Self> {
        Self::new(self.units[..n.min(self.units.len())].to_vec())
    }

    /// Keeps the units from index `start` onwards.
    pub fn tail_from(&self, start: usize) -> Result<Self> {
        Self::new(self.units[start.min(self.units.len())..].to_vec())
    }
}

/// Daily counts together with the unit each day belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DailySeries {
    values: Vec<u64>,
    unit_lengths: Vec<usize>,
}

impl DailySeries {
    pub fn new(values: Vec<u64>, unit_lengths: Vec<usize>) -> Result<Self> {
        if unit_lengths.iter().any(|&l| l == 0) {
            return Err(Error::Domain("unit boundary of zero length".into()));
        }
        let covered: usize = unit_lengths.iter().sum();
        if covered != values.len() {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: covered,
            });
        }
        Ok(Self {
            values,
            unit_lengths,
        })
    }

    /// Daily series whose units are taken from `agg`.
    pub fn aligned_with(values: Vec<u64>, agg: &AggregatedSeries) -> Result<Self> {
        Self::new(values, agg.lengths())
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [u64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<u64> {
        self.values
    }

    pub fn unit_lengths(&self) -> &[usize] {
        &self.unit_lengths
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.values.iter().sum()
    }

    /// Index range of every unit, in order.
    pub fn unit_ranges(&self) -> Vec<Range<usize>> {
        let mut start = 0;
        self.unit_lengths
            .iter()
            .map(|&len| {
                let range = start..start + len;
                start += len;
                range
            })
            .collect()
    }

    /// Per-unit sums.
    pub fn unit_sums(&self) -> Vec<u64> {
        self.unit_ranges()
            .into_iter()
            .map(|r| self.values[r].iter().sum())
            .collect()
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&v| v as f64).collect()
    }

    /// Mean count per day, computed from the exact integer total.
    pub fn mean(&self) -> f64 {
        self.total() as f64 / self.values.len() as f64
    }
}

/// How aggregate values are spread over the days of a unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "policy", content = "divisor")]
pub enum DivisorPolicy {
    /// Divide each unit by its own length in days.
    UnitLength,
    /// Divide every unit by the same constant (30 reproduces the classical
    /// month approximation).
    Fixed(u32),
}

impl Default for DivisorPolicy {
    fn default() -> Self {
        DivisorPolicy::UnitLength
    }
}

/// Piecewise-constant per-day rate derived from the aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSeries {
    values: Vec<f64>,
    policy: DivisorPolicy,
}

impl PriorSeries {
    /// Wraps raw daily rates. Rates must be finite and non-negative.
    pub fn from_rates(values: Vec<f64>, policy: DivisorPolicy) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::Domain(format!("invalid prior rate {}", bad)));
        }
        Ok(Self { values, policy })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn policy(&self) -> DivisorPolicy {
        self.policy
    }
}

/// Spreads every aggregate evenly over its unit using the unit length.
pub fn build_prior(agg: &AggregatedSeries) -> Result<PriorSeries> {
    build_prior_with(agg, DivisorPolicy::UnitLength)
}

pub fn build_prior_with(agg: &AggregatedSeries, policy: DivisorPolicy) -> Result<PriorSeries> {
    if agg.is_empty() {
        return Err(Error::EmptySeries);
    }
    if let DivisorPolicy::Fixed(0) = policy {
        return Err(Error::InvalidConfig("prior divisor must be positive".into()));
    }
    let mut values = Vec::with_capacity(agg.num_days());
    for unit in agg.units() {
        let divisor = match policy {
            DivisorPolicy::UnitLength => unit.length as f64,
            DivisorPolicy::Fixed(d) => d as f64,
        };
        let rate = unit.value as f64 / divisor;
        values.extend(std::iter::repeat(rate).take(unit.length));
    }
    Ok(PriorSeries { values, policy })
}

/// Daily-scale sigma derived from the spread of the prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaEstimate {
    /// Population standard deviation of the prior over the whole timeline.
    pub prior_std: f64,
    pub divisor: f64,
    pub sigma0: f64,
    /// Set when the prior has a single point and the spread is undefined.
    pub degenerate: bool,
}

/// Population standard deviation (divides by N).
pub fn population_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss / n).sqrt()
}

/// Rescales an already computed prior standard deviation.
pub fn sigma0_from_std(prior_std: f64, divisor: f64) -> Result<f64> {
    if !(divisor > 0.0) || !divisor.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "sigma divisor must be positive, got {}",
            divisor
        )));
    }
    if !(prior_std >= 0.0) {
        return Err(Error::Domain(format!("negative standard deviation {}", prior_std)));
    }
    Ok(prior_std / divisor)
}

/// `sigma0 = std(prior) / divisor`, using the population convention.
pub fn sigma0_from_prior(prior: &PriorSeries, divisor: f64) -> Result<SigmaEstimate> {
    let values = prior.values();
    if values.is_empty() {
        return Err(Error::EmptySeries);
    }
    if values.len() == 1 {
        return Ok(SigmaEstimate {
            prior_std: 0.0,
            divisor,
            sigma0: sigma0_from_std(0.0, divisor)?,
            degenerate: true,
        });
    }
    let prior_std = population_std(values);
    Ok(SigmaEstimate {
        prior_std,
        divisor,
        sigma0: sigma0_from_std(prior_std, divisor)?,
        degenerate: false,
    })
}

/// Sums daily counts back into their units. Integer arithmetic only.
pub fn aggregate(daily: &DailySeries) -> AggregatedSeries {
    let units = daily
        .unit_sums()
        .into_iter()
        .zip(daily.unit_lengths())
        .enumerate()
        .map(|(i, (v, &l))| AggregateUnit::new(format!("u{:08}", i), v, l))
        .collect();
    AggregatedSeries { units }
}

/// Like [`aggregate`] but reusing the labels of an existing series.
pub fn aggregate_like(daily: &DailySeries, template: &AggregatedSeries) -> Result<AggregatedSeries> {
    if daily.unit_lengths() != template.lengths().as_slice() {
        return Err(Error::Domain("daily series is not aligned with the template units".into()));
    }
    let units = daily
        .unit_sums()
        .into_iter()
        .zip(template.units())
        .map(|(v, u)| AggregateUnit::new(u.label.clone(), v, u.length))
        .collect();
    Ok(AggregatedSeries { units })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn prior_divides_by_unit_length() {
        let agg = AggregatedSeries::new(vec![AggregateUnit::new("2022-01", 126, 31)]).unwrap();
        let prior = build_prior(&agg).unwrap();
        assert_eq!(prior.values().len(), 31);
        for v in prior.values() {
            assert!((v - 4.064516).abs() < 1e-6);
        }
    }

    #[test]
    fn prior_of_zero_unit_is_zero() {
        let agg = AggregatedSeries::from_values(&[0], &[5]).unwrap();
        assert_eq!(build_prior(&agg).unwrap().values(), &[0.0; 5]);
    }

    #[test]
    fn prior_exact_division() {
        let agg = AggregatedSeries::from_values(&[60, 90], &[30, 30]).unwrap();
        let prior = build_prior(&agg).unwrap();
        assert!(prior.values()[..30].iter().all(|&v| v == 2.0));
        assert!(prior.values()[30..].iter().all(|&v| v == 3.0));
    }

    #[test]
    fn fixed_divisor_policy() {
        let agg = AggregatedSeries::from_values(&[62], &[31]).unwrap();
        let prior = build_prior_with(&agg, DivisorPolicy::Fixed(31)).unwrap();
        assert_eq!(prior.values()[0], 2.0);
        assert!(build_prior_with(&agg, DivisorPolicy::Fixed(0)).is_err());
    }

    #[test]
    fn empty_series_rejected() {
        assert_eq!(AggregatedSeries::new(vec![]), Err(Error::EmptySeries));
    }

    #[test]
    fn labels_must_increase() {
        let units = vec![
            AggregateUnit::new("2022-02", 1, 28),
            AggregateUnit::new("2022-01", 1, 31),
        ];
        assert!(AggregatedSeries::new(units).is_err());
    }

    #[test]
    fn sigma0_reported_values() {
        assert!((sigma0_from_std(556.6431703, 30.0).unwrap() - 18.55477234).abs() < 1e-6);
        assert!((sigma0_from_std(32021.87439, 30.0).unwrap() - 1067.395813).abs() < 1e-6);
    }

    #[test]
    fn sigma0_constant_prior_is_zero() {
        let prior = PriorSeries::from_rates(vec![3.0; 10], DivisorPolicy::UnitLength).unwrap();
        let est = sigma0_from_prior(&prior, 30.0).unwrap();
        assert_eq!(est.sigma0, 0.0);
        assert!(!est.degenerate);
    }

    #[test]
    fn sigma0_single_point_flags() {
        let prior = PriorSeries::from_rates(vec![3.0], DivisorPolicy::UnitLength).unwrap();
        let est = sigma0_from_prior(&prior, 30.0).unwrap();
        assert_eq!(est.sigma0, 0.0);
        assert!(est.degenerate);
    }

    #[test]
    fn aggregate_sums_units() {
        let daily = DailySeries::new(vec![1, 2, 3, 4, 5], vec![3, 2]).unwrap();
        assert_eq!(aggregate(&daily).values(), vec![6, 9]);
        let zeros = DailySeries::new(vec![0; 7], vec![3, 4]).unwrap();
        assert_eq!(aggregate(&zeros).values(), vec![0, 0]);
    }

    #[test]
    fn malformed_boundaries_rejected() {
        assert!(DailySeries::new(vec![1, 2, 3], vec![2, 2]).is_err());
        assert!(DailySeries::new(vec![1, 2], vec![2, 0]).is_err());
    }

    proptest! {
        #[test]
        fn prior_reconstructs_unit_values(
            units in prop::collection::vec((0u64..1_000_000, 1usize..40), 1..20)
        ) {
            let values: Vec<u64> = units.iter().map(|u| u.0).collect();
            let lengths: Vec<usize> = units.iter().map(|u| u.1).collect();
            let agg = AggregatedSeries::from_values(&values, &lengths).unwrap();
            let prior = build_prior(&agg).unwrap();
            let mut start = 0;
            for (v, l) in values.iter().zip(&lengths) {
                let s: f64 = prior.values()[start..start + l].iter().sum();
                prop_assert!((s - *v as f64).abs() <= 1e-9 * (*v as f64).max(1.0));
                start += l;
            }
        }

        #[test]
        fn sigma0_scale_equivariant(
            rates in prop::collection::vec(0.0f64..1e4, 2..50),
            c in 0.0f64..100.0,
        ) {
            let base = PriorSeries::from_rates(rates.clone(), DivisorPolicy::UnitLength).unwrap();
            let scaled = PriorSeries::from_rates(
                rates.iter().map(|r| r * c).collect(),
                DivisorPolicy::UnitLength,
            ).unwrap();
            let a = sigma0_from_prior(&base, 30.0).unwrap().sigma0;
            let b = sigma0_from_prior(&scaled, 30.0).unwrap().sigma0;
            prop_assert!((b - c * a).abs() <= 1e-9 * (1.0 + c * a));
        }
    }
}
