//! Fixtures shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::PathBuf;

use chrono::{Datelike, Duration, NaiveDate};
use mkd_cli::ingest::{read_aggregated, AggregatedFile};
use mkd_core::AggregatedSeries;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn load(name: &str) -> AggregatedFile {
    read_aggregated(&fixture(name)).expect("fixture parses")
}

pub const DENGUE_2022: [u64; 7] = [126, 20, 20, 23, 163, 737, 1491];
pub const COVID_2020: [u64; 10] = [51, 7616, 39486, 98330, 92178, 75335, 50483, 44205, 57248, 48578];

/// Each unit flat at `value / length`: the worst case for boundary jumps.
pub fn staircase() -> AggregatedSeries {
    let rates = [2u64, 2, 40, 3, 3, 50, 2, 45, 1, 1];
    let values: Vec<u64> = rates.iter().map(|r| r * 30).collect();
    AggregatedSeries::from_values(&values, &[30; 10]).unwrap()
}

/// Daily ground truth with its calendar.
pub struct Epidemic {
    pub start: NaiveDate,
    pub values: Vec<u64>,
    /// Poisson mean behind each day.
    pub rates: Vec<f64>,
}

impl Epidemic {
    pub fn dates(&self) -> Vec<NaiveDate> {
        (0..self.values.len())
            .map(|i| self.start + Duration::days(i as i64))
            .collect()
    }

    /// Calendar-month totals labelled `YYYY-MM`.
    pub fn monthly(&self) -> AggregatedSeries {
        let mut values = Vec::new();
        let mut lengths = Vec::new();
        let mut labels: Vec<String> = Vec::new();
        for (d, v) in self.dates().iter().zip(&self.values) {
            let label = format!("{:04}-{:02}", d.year(), d.month());
            if labels.last() != Some(&label) {
                labels.push(label);
                values.push(0);
                lengths.push(0);
            }
            *values.last_mut().unwrap() += v;
            *lengths.last_mut().unwrap() += 1;
        }
        let units = labels
            .into_iter()
            .zip(values.into_iter().zip(lengths))
            .map(|(l, (v, n))| mkd_core::AggregateUnit::new(l, v, n))
            .collect();
        AggregatedSeries::new(units).unwrap()
    }
}

/// Poisson counts around a log-linear trend with an annual wave and a weekly
/// cycle, five calendar years from 2015.
pub fn epidemic(seed: u64) -> Epidemic {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = NaiveDate::from_ymd_opt(2015, 1, 1).unwrap();
    let end = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
    let n = (end - start).num_days() as usize;
    let phase = 2.0 * PI * (seed % 7) as f64 / 7.0;
    let rates: Vec<f64> = (0..n)
        .map(|t| {
            let t = t as f64;
            let annual = 1.2 * (2.0 * PI * t / 365.25 - 2.0).cos();
            let weekly = 0.1 * (2.0 * PI * t / 7.0 + phase).sin();
            (3.0 + 0.15 * t / 365.25 + annual + weekly).exp()
        })
        .collect();
    let values = rates
        .iter()
        .map(|&r| Poisson::new(r).unwrap().sample(&mut rng) as u64)
        .collect();
    Epidemic { start, values, rates }
}
