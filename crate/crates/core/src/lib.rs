//! Temporal downscaling of aggregated count series.
//!
//! Monthly (or otherwise aggregated) non-negative counts are turned into
//! daily integer series whose per-unit sums match the input exactly. The
//! crate also carries the tools used to judge the result: error metrics,
//! additive decomposition and a Box-Jenkins forecasting pipeline.
//!
//! ```
//! use mkd_core::{run_mkd, AggregatedSeries, MkdConfig};
//!
//! let agg = AggregatedSeries::from_values(&[126, 20, 20], &[31, 28, 31]).unwrap();
//! let out = run_mkd(&agg, &MkdConfig { seed: 7, ..MkdConfig::default() }).unwrap();
//! assert_eq!(out.downscaled.unit_sums(), vec![126, 20, 20]);
//! ```

pub mod decompose;
pub mod distgen;
pub mod error;
pub mod forecast;
pub mod metrics;
pub mod mkd;
pub mod series;

pub use decompose::{decompose_additive, DecompositionResult};
pub use distgen::{generate_unit, Family, UnitDraw};
pub use error::{Error, Result};
pub use metrics::{mae, mase, rmse, ErrorReport};
pub use mkd::{
    correct_overthrows, detect_overthrows, initial_distribution, run_mkd, volume_correction,
    DownscaleResult, MkdConfig, Tolerance,
};
pub use series::{
    aggregate, build_prior, sigma0_from_prior, AggregateUnit, AggregatedSeries, DailySeries,
    DivisorPolicy, PriorSeries,
};
