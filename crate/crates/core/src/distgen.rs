//! Fixed-sum generator for a single aggregation unit.
//!
//! A unit is filled by drawing real values around its daily mean, shifting
//! them so the smallest is non-negative, rounding, and finally nudging random
//! entries by one until the exact target sum is met.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distribution family used to draw raw daily values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    #[default]
    Normal,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "normal" | "gaussian" => Ok(Family::Normal),
            other => Err(Error::InvalidConfig(format!("unknown distribution family {:?}", other))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Normal => f.write_str("normal"),
        }
    }
}

/// Integer draw for one unit; `values` always sums to `target_sum`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitDraw {
    pub values: Vec<u64>,
    pub target_sum: u64,
}

impl UnitDraw {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Draws `length` independent values with mean `target_sum / length` and
/// standard deviation `sigma`.
pub fn sample_raw<R: Rng + ?Sized>(
    target_sum: u64,
    length: usize,
    sigma: f64,
    family: Family,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if length == 0 {
        return Err(Error::Domain("unit length must be at least 1".into()));
    }
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidConfig(format!("sigma must be finite and >= 0, got {}", sigma)));
    }
    let mean = target_sum as f64 / length as f64;
    match family {
        Family::Normal => {
            let normal = Normal::new(mean, sigma)
                .map_err(|e| Error::InvalidConfig(format!("normal distribution: {}", e)))?;
            Ok((0..length).map(|_| normal.sample(rng)).collect())
        }
    }
}

/// Shifts the whole vector up by `|min|` when its minimum is negative.
pub fn nonneg_shift(values: &[f64]) -> Vec<f64> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min < 0.0 {
        let shift = min.abs();
        values.iter().map(|v| v + shift).collect()
    } else {
        values.to_vec()
    }
}

/// Adds or removes single counts at uniformly random positions until
/// `values` sums to `target`. Removal only ever touches positive entries.
pub fn balance_to_sum<R: Rng + ?Sized>(values: &mut [u64], target: u64, rng: &mut R) {
    let current: u64 = values.iter().sum();
    if current < target {
        let len = values.len();
        for _ in 0..target - current {
            values[rng.random_range(0..len)] += 1;
        }
    } else if current > target {
        let mut positive: Vec<usize> = (0..values.len()).filter(|&i| values[i] > 0).collect();
        for _ in 0..current - target {
            let k = rng.random_range(0..positive.len());
            let idx = positive[k];
            values[idx] -= 1;
            if values[idx] == 0 {
                positive.swap_remove(k);
            }
        }
    }
}

/// Rounds half away from zero and then balances to `target_sum`.
pub fn integerize_and_balance<R: Rng + ?Sized>(
    values: &[f64],
    target_sum: u64,
    rng: &mut R,
) -> Result<UnitDraw> {
    if values.is_empty() {
        return Err(Error::Domain("cannot balance an empty vector".into()));
    }
    let mut ints = Vec::with_capacity(values.len());
    for &v in values {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::Domain(format!("value {} is not a finite non-negative number", v)));
        }
        ints.push(v.round() as u64);
    }
    balance_to_sum(&mut ints, target_sum, rng);
    Ok(UnitDraw {
        values: ints,
        target_sum,
    })
}

/// Full generator: sample, shift, integerize, balance.
pub fn generate_unit<R: Rng + ?Sized>(
    target_sum: u64,
    length: usize,
    sigma: f64,
    family: Family,
    rng: &mut R,
) -> Result<UnitDraw> {
    let raw = sample_raw(target_sum, length, sigma, family, rng)?;
    let shifted = nonneg_shift(&raw);
    integerize_and_balance(&shifted, target_sum, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn zero_sum_zero_sigma_is_all_zero() {
        let raw = sample_raw(0, 5, 0.0, Family::Normal, &mut rng(1)).unwrap();
        assert_eq!(raw, vec![0.0; 5]);
    }

    #[test]
    fn zero_sigma_pins_mean() {
        let raw = sample_raw(30, 30, 0.0, Family::Normal, &mut rng(1)).unwrap();
        assert_eq!(raw, vec![1.0; 30]);
    }

    #[test]
    fn sample_mean_matches_target() {
        let mut r = rng(7);
        let reps = 100_000;
        let mut total = 0.0;
        for _ in 0..reps {
            total += sample_raw(100, 30, 5.0, Family::Normal, &mut r).unwrap()[0];
        }
        let mean = total / reps as f64;
        assert!((mean - 100.0 / 30.0).abs() < 0.05, "mean {}", mean);
    }

    #[test]
    fn unknown_family_is_config_error() {
        assert!(matches!("poisson".parse::<Family>(), Err(Error::InvalidConfig(_))));
        assert_eq!("Normal".parse::<Family>().unwrap(), Family::Normal);
    }

    #[test]
    fn shift_examples() {
        assert_eq!(nonneg_shift(&[-2.0, 0.0, 3.0]), vec![0.0, 2.0, 5.0]);
        assert_eq!(nonneg_shift(&[1.0, 2.0, 3.0]), vec![1.0, 2.0, 3.0]);
        assert_eq!(nonneg_shift(&[-1.5, -0.5]), vec![0.0, 1.0]);
    }

    #[test]
    fn rounding_already_balanced() {
        let draw = integerize_and_balance(&[1.4, 2.6], 4, &mut rng(0)).unwrap();
        assert_eq!(draw.values, vec![1, 3]);
    }

    #[test]
    fn surplus_removed_without_negatives() {
        for seed in 0..1000 {
            let draw = integerize_and_balance(&[1.5, 1.5, 1.5], 4, &mut rng(seed)).unwrap();
            assert_eq!(draw.values.iter().sum::<u64>(), 4);
            // every entry started at 2; two decrements land on distinct or equal slots
            assert!(draw.values.iter().all(|&v| v <= 2));
        }
    }

    #[test]
    fn deficit_adds_single_count() {
        for seed in 0..1000 {
            let draw = integerize_and_balance(&[0.2; 5], 1, &mut rng(seed)).unwrap();
            assert_eq!(draw.values.iter().filter(|&&v| v == 1).count(), 1);
            assert_eq!(draw.values.iter().sum::<u64>(), 1);
        }
    }

    #[test]
    fn negative_input_is_domain_error() {
        assert!(integerize_and_balance(&[-1.0, 2.0], 1, &mut rng(0)).is_err());
    }

    #[test]
    fn unit_examples() {
        let draw = generate_unit(51, 31, 1067.395813, Family::Normal, &mut rng(3)).unwrap();
        assert_eq!(draw.len(), 31);
        assert_eq!(draw.values.iter().sum::<u64>(), 51);

        for k in 1..20 {
            let draw = generate_unit(0, k, 12.0, Family::Normal, &mut rng(k as u64)).unwrap();
            assert_eq!(draw.values, vec![0; k]);
        }
        assert_eq!(generate_unit(7, 1, 3.0, Family::Normal, &mut rng(9)).unwrap().values, vec![7]);
    }

    #[test]
    fn zero_sigma_concentrates() {
        let draw = generate_unit(90, 30, 0.0, Family::Normal, &mut rng(5)).unwrap();
        assert_eq!(draw.values, vec![3; 30]);
    }

    proptest! {
        #[test]
        fn exact_sum_and_determinism(
            sum in 0u64..100_000,
            len in 1usize..40,
            sigma in 0.0f64..500.0,
            seed in any::<u64>(),
        ) {
            let a = generate_unit(sum, len, sigma, Family::Normal, &mut rng(seed)).unwrap();
            let b = generate_unit(sum, len, sigma, Family::Normal, &mut rng(seed)).unwrap();
            prop_assert_eq!(a.values.iter().sum::<u64>(), sum);
            prop_assert_eq!(a.len(), len);
            prop_assert_eq!(a, b);
        }
    }
}
