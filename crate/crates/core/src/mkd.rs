//! The three-stage downscaling pipeline.
//!
//! 1. **Initial distribution**: every unit is filled independently with
//!    [`generate_unit`], so unit sums are exact but neighbouring units can
//!    form a staircase.
//! 2. **Overthrow correction**: points that exceed a neighbour by more than
//!    the tolerance are smoothed by regenerating a small window around them.
//!    Window sums are preserved, unit sums are not.
//! 3. **Volume correction**: single counts are added or removed inside each
//!    unit until every unit sum matches its aggregate again.
//!
//! All randomness comes from one ChaCha stream seeded by [`MkdConfig::seed`],
//! consumed in unit order, so a seed fully determines the output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distgen::{balance_to_sum, generate_unit, Family};
use crate::error::{Error, Result};
use crate::series::{
    build_prior_with, sigma0_from_prior, AggregatedSeries, DailySeries, DivisorPolicy,
    SigmaEstimate, DEFAULT_SIGMA_DIVISOR,
};

/// Overthrow tolerance, either absolute or relative to the series range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "value")]
pub enum Tolerance {
    Absolute(f64),
    /// Fraction in (0, 1] of `max - min` of the series being corrected.
    RangeFraction(f64),
}

impl Tolerance {
    /// Absolute threshold for `values`.
    pub fn resolve(&self, values: &[u64]) -> f64 {
        match *self {
            Tolerance::Absolute(d) => d,
            Tolerance::RangeFraction(f) => {
                let max = values.iter().copied().max().unwrap_or(0);
                let min = values.iter().copied().min().unwrap_or(0);
                f * (max - min) as f64
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MkdConfig {
    /// Daily-scale standard deviation. Derived from the prior when `None`.
    pub sigma0: Option<f64>,
    pub sigma_divisor: f64,
    /// How the prior used for the sigma derivation is built.
    pub prior_policy: DivisorPolicy,
    pub tolerance: Tolerance,
    pub iterations: usize,
    pub radius: usize,
    pub family: Family,
    pub seed: u64,
    /// Re-resolve a range-based tolerance at every sweep instead of once
    /// against the initial distribution.
    pub reresolve_tolerance: bool,
}

impl Default for MkdConfig {
    fn default() -> Self {
        Self {
            sigma0: None,
            sigma_divisor: DEFAULT_SIGMA_DIVISOR,
            prior_policy: DivisorPolicy::UnitLength,
            tolerance: Tolerance::RangeFraction(0.6),
            iterations: 100,
            radius: 3,
            family: Family::Normal,
            seed: 0,
            reresolve_tolerance: false,
        }
    }
}

impl MkdConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(s) = self.sigma0 {
            if !(s >= 0.0) || !s.is_finite() {
                return Err(Error::InvalidConfig(format!("sigma0 must be >= 0, got {}", s)));
            }
        }
        if !(self.sigma_divisor > 0.0) || !self.sigma_divisor.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "sigma_divisor must be positive, got {}",
                self.sigma_divisor
            )));
        }
        match self.tolerance {
            Tolerance::Absolute(d) if !(d >= 0.0) || !d.is_finite() => {
                return Err(Error::InvalidConfig(format!("absolute delta must be >= 0, got {}", d)));
            }
            Tolerance::RangeFraction(f) if !(f > 0.0 && f <= 1.0) => {
                return Err(Error::InvalidConfig(format!("delta fraction must be in (0, 1], got {}", f)));
            }
            _ => {}
        }
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("iterations must be >= 1".into()));
        }
        if self.radius == 0 {
            return Err(Error::InvalidConfig("radius must be >= 1".into()));
        }
        Ok(())
    }

    /// Sigma actually used for `agg`: the configured value, or the prior
    /// standard deviation divided by `sigma_divisor`.
    pub fn resolve_sigma(&self, agg: &AggregatedSeries) -> Result<SigmaEstimate> {
        match self.sigma0 {
            Some(sigma0) => Ok(SigmaEstimate {
                prior_std: f64::NAN,
                divisor: self.sigma_divisor,
                sigma0,
                degenerate: false,
            }),
            None => {
                let prior = build_prior_with(agg, self.prior_policy)?;
                sigma0_from_prior(&prior, self.sigma_divisor)
            }
        }
    }
}

/// Output of [`run_mkd`], keeping every intermediate stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DownscaleResult {
    pub initial: DailySeries,
    pub after_overthrow: DailySeries,
    pub downscaled: DailySeries,
    /// Overthrows found at the start of each sweep that was executed.
    pub overthrow_counts: Vec<usize>,
    /// Overthrows left after the last sweep, measured against the tolerance
    /// in force at that point.
    pub remaining_overthrows: usize,
    /// True when a sweep found nothing to correct and the rest were skipped.
    pub stopped_early: bool,
    pub tolerance_abs: f64,
    pub sigma: SigmaEstimate,
    pub config: MkdConfig,
}

/// Result of the overthrow correction stage.
#[derive(Debug, Clone, PartialEq)]
pub struct OverthrowCorrection {
    pub series: DailySeries,
    pub counts: Vec<usize>,
    pub remaining: usize,
    pub stopped_early: bool,
    pub tolerance_abs: f64,
}

/// Fills every unit independently, in order.
pub fn initial_distribution<R: Rng + ?Sized>(
    agg: &AggregatedSeries,
    sigma0: f64,
    family: Family,
    rng: &mut R,
) -> Result<DailySeries> {
    let mut values = Vec::with_capacity(agg.num_days());
    for unit in agg.units() {
        let draw = generate_unit(unit.value, unit.length, sigma0, family, rng)?;
        values.extend(draw.values);
    }
    DailySeries::aligned_with(values, agg)
}

/// Indices `i` with `y[i] - y[i-1] > delta` or `y[i] - y[i+1] > delta`.
pub fn detect_overthrows(values: &[u64], delta: f64) -> Vec<usize> {
    let n = values.len();
    (0..n)
        .filter(|&i| {
            let y = values[i] as f64;
            let left = i > 0 && y - values[i - 1] as f64 > delta;
            let right = i + 1 < n && y - values[i + 1] as f64 > delta;
            left || right
        })
        .collect()
}

/// Repeatedly regenerates windows of radius `cfg.radius` around overthrows.
///
/// The window around `i` is the open interval `(i - r, i + r)` clipped to the
/// series, i.e. `2r - 1` points away from the edges. Windows are processed
/// left to right on the live series.
pub fn correct_overthrows<R: Rng + ?Sized>(
    daily: &DailySeries,
    sigma0: f64,
    cfg: &MkdConfig,
    rng: &mut R,
) -> Result<OverthrowCorrection> {
    cfg.validate()?;
    let mut series = daily.clone();
    let n = series.len();
    let reach = cfg.radius - 1;
    let mut delta = cfg.tolerance.resolve(series.values());
    let mut counts = Vec::new();
    let mut stopped_early = false;

    for _ in 0..cfg.iterations {
        if cfg.reresolve_tolerance {
            delta = cfg.tolerance.resolve(series.values());
        }
        let overthrows = detect_overthrows(series.values(), delta);
        counts.push(overthrows.len());
        if overthrows.is_empty() {
            stopped_early = true;
            break;
        }
        for i in overthrows {
            let lo = i.saturating_sub(reach);
            let hi = (i + reach).min(n - 1);
            let window = &mut series.values_mut()[lo..=hi];
            let sum: u64 = window.iter().sum();
            let draw = generate_unit(sum, window.len(), sigma0, cfg.family, rng)?;
            window.copy_from_slice(&draw.values);
        }
    }

    if cfg.reresolve_tolerance {
        delta = cfg.tolerance.resolve(series.values());
    }
    let remaining = detect_overthrows(series.values(), delta).len();
    Ok(OverthrowCorrection {
        series,
        counts,
        remaining,
        stopped_early,
        tolerance_abs: delta,
    })
}

/// Restores every unit sum by single-count adjustments at random in-unit
/// positions.
pub fn volume_correction<R: Rng + ?Sized>(
    daily: &DailySeries,
    agg: &AggregatedSeries,
    rng: &mut R,
) -> Result<DailySeries> {
    if daily.unit_lengths() != agg.lengths().as_slice() {
        return Err(Error::Domain("daily series is not aligned with the aggregates".into()));
    }
    let mut out = daily.clone();
    for (range, unit) in daily.unit_ranges().into_iter().zip(agg.units()) {
        balance_to_sum(&mut out.values_mut()[range], unit.value, rng);
    }
    Ok(out)
}

/// Runs the whole pipeline with a stream seeded from `cfg.seed`.
pub fn run_mkd(agg: &AggregatedSeries, cfg: &MkdConfig) -> Result<DownscaleResult> {
    cfg.validate()?;
    if agg.is_empty() {
        return Err(Error::EmptySeries);
    }
    let sigma = cfg.resolve_sigma(agg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let initial = initial_distribution(agg, sigma.sigma0, cfg.family, &mut rng)?;
    let corrected = correct_overthrows(&initial, sigma.sigma0, cfg, &mut rng)?;
    let downscaled = volume_correction(&corrected.series, agg, &mut rng)?;

    Ok(DownscaleResult {
        initial,
        after_overthrow: corrected.series,
        downscaled,
        overthrow_counts: corrected.counts,
        remaining_overthrows: corrected.remaining,
        stopped_early: corrected.stopped_early,
        tolerance_abs: corrected.tolerance_abs,
        sigma,
        config: cfg.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn dengue_2022() -> AggregatedSeries {
        AggregatedSeries::from_values(
            &[126, 20, 20, 23, 163, 737, 1491],
            // observations run through 30 July
            &[31, 28, 31, 30, 31, 30, 30],
        )
        .unwrap()
    }

    #[test]
    fn detect_examples() {
        assert_eq!(detect_overthrows(&[0, 10, 0], 5.0), vec![1]);
        assert!(detect_overthrows(&[1, 2, 3], 5.0).is_empty());
        assert_eq!(detect_overthrows(&[9, 0], 5.0), vec![0]);
        assert_eq!(detect_overthrows(&[0, 9], 5.0), vec![1]);
        assert!(detect_overthrows(&[], 1.0).is_empty());
    }

    #[test]
    fn detect_matches_brute_force() {
        let mut r = rng(11);
        for _ in 0..1000 {
            let n = r.random_range(1..40);
            let values: Vec<u64> = (0..n).map(|_| r.random_range(0..50)).collect();
            let delta = r.random_range(0.0..30.0);
            let mut expected = Vec::new();
            for i in 0..n {
                let y = values[i] as i64;
                let mut hit = false;
                if i >= 1 && (y - values[i - 1] as i64) as f64 > delta {
                    hit = true;
                }
                if i + 1 < n && (y - values[i + 1] as i64) as f64 > delta {
                    hit = true;
                }
                if hit {
                    expected.push(i);
                }
            }
            assert_eq!(detect_overthrows(&values, delta), expected);
        }
    }

    #[test]
    fn initial_distribution_keeps_unit_sums() {
        let agg = dengue_2022();
        let daily = initial_distribution(&agg, 18.55477234, Family::Normal, &mut rng(1)).unwrap();
        assert_eq!(daily.unit_sums(), agg.values());
        let single = AggregatedSeries::from_values(&[100], &[30]).unwrap();
        assert_eq!(initial_distribution(&single, 3.0, Family::Normal, &mut rng(2)).unwrap().total(), 100);
        let zeros = AggregatedSeries::from_values(&[0, 0, 0], &[31, 28, 31]).unwrap();
        let daily = initial_distribution(&zeros, 5.0, Family::Normal, &mut rng(3)).unwrap();
        assert!(daily.values().iter().all(|&v| v == 0));
    }

    #[test]
    fn huge_tolerance_is_fixpoint() {
        let daily = DailySeries::new(vec![0, 50, 3, 80, 1], vec![5]).unwrap();
        let cfg = MkdConfig {
            tolerance: Tolerance::Absolute(1e9),
            ..MkdConfig::default()
        };
        let out = correct_overthrows(&daily, 4.0, &cfg, &mut rng(0)).unwrap();
        assert_eq!(out.series, daily);
        assert_eq!(out.counts, vec![0]);
        assert!(out.stopped_early);
    }

    #[test]
    fn correction_conserves_global_sum() {
        let agg = dengue_2022();
        let daily = initial_distribution(&agg, 18.55, Family::Normal, &mut rng(4)).unwrap();
        let out = correct_overthrows(&daily, 18.55, &MkdConfig::default(), &mut rng(5)).unwrap();
        assert_eq!(out.series.total(), 2580);
    }

    #[test]
    fn radius_one_window_is_identity() {
        let daily = DailySeries::new(vec![0, 40, 0, 0, 35, 0], vec![6]).unwrap();
        let cfg = MkdConfig {
            radius: 1,
            iterations: 5,
            tolerance: Tolerance::Absolute(10.0),
            ..MkdConfig::default()
        };
        let out = correct_overthrows(&daily, 2.0, &cfg, &mut rng(0)).unwrap();
        assert_eq!(out.series, daily);
        assert_eq!(out.counts, vec![2; 5]);
    }

    #[test]
    fn volume_correction_restores_units() {
        let agg = AggregatedSeries::from_values(&[10, 20], &[3, 3]).unwrap();
        let drifted = DailySeries::new(vec![5, 5, 5, 5, 5, 5], vec![3, 3]).unwrap();
        let fixed = volume_correction(&drifted, &agg, &mut rng(0)).unwrap();
        assert_eq!(fixed.unit_sums(), vec![10, 20]);

        let balanced = DailySeries::new(vec![3, 3, 4, 6, 7, 7], vec![3, 3]).unwrap();
        assert_eq!(volume_correction(&balanced, &agg, &mut rng(0)).unwrap(), balanced);
    }

    #[test]
    fn volume_correction_fuzz() {
        let mut r = rng(99);
        for seed in 0..1000 {
            let units = r.random_range(1..6);
            let lengths: Vec<usize> = (0..units).map(|_| r.random_range(1..8)).collect();
            let targets: Vec<u64> = (0..units).map(|_| r.random_range(0..60)).collect();
            let total_days: usize = lengths.iter().sum();
            let values: Vec<u64> = (0..total_days).map(|_| r.random_range(0..20)).collect();
            let agg = AggregatedSeries::from_values(&targets, &lengths).unwrap();
            let daily = DailySeries::new(values, lengths.clone()).unwrap();
            let fixed = volume_correction(&daily, &agg, &mut rng(seed)).unwrap();
            assert_eq!(fixed.unit_sums(), targets);
        }
    }

    #[test]
    fn misaligned_volume_correction_errors() {
        let agg = AggregatedSeries::from_values(&[10], &[4]).unwrap();
        let daily = DailySeries::new(vec![1, 2, 3], vec![3]).unwrap();
        assert!(volume_correction(&daily, &agg, &mut rng(0)).is_err());
    }

    #[test]
    fn run_is_deterministic_and_conserving() {
        let agg = dengue_2022();
        let cfg = MkdConfig {
            seed: 42,
            ..MkdConfig::default()
        };
        let a = run_mkd(&agg, &cfg).unwrap();
        let b = run_mkd(&agg, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.downscaled.unit_sums(), agg.values());
        assert_eq!(a.initial.total(), 2580);
        assert_eq!(a.after_overthrow.total(), 2580);
        assert!((a.downscaled.mean() - 2580.0 / 211.0).abs() < 1e-12);

        let c = run_mkd(&agg, &MkdConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(a.downscaled, c.downscaled);
    }

    #[test]
    fn config_validation() {
        let bad = [
            MkdConfig { radius: 0, ..MkdConfig::default() },
            MkdConfig { iterations: 0, ..MkdConfig::default() },
            MkdConfig { tolerance: Tolerance::RangeFraction(0.0), ..MkdConfig::default() },
            MkdConfig { tolerance: Tolerance::RangeFraction(1.5), ..MkdConfig::default() },
            MkdConfig { tolerance: Tolerance::Absolute(-1.0), ..MkdConfig::default() },
            MkdConfig { sigma0: Some(-2.0), ..MkdConfig::default() },
            MkdConfig { sigma_divisor: 0.0, ..MkdConfig::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{:?}", cfg);
        }
        assert!(MkdConfig::default().validate().is_ok());
    }

    #[test]
    fn sigma_from_fixed_30_prior() {
        let agg = AggregatedSeries::from_values(&[30, 90], &[31, 30]).unwrap();
        let cfg = MkdConfig {
            prior_policy: DivisorPolicy::Fixed(30),
            ..MkdConfig::default()
        };
        let sigma = cfg.resolve_sigma(&agg).unwrap();
        // prior rates 1 (31 days) and 3 (30 days)
        let mean = (31.0 + 90.0) / 61.0;
        let var = (31.0 * (1.0f64 - mean).powi(2) + 30.0 * (3.0f64 - mean).powi(2)) / 61.0;
        assert!((sigma.sigma0 - var.sqrt() / 30.0).abs() < 1e-12);
    }
}
