//! Flat `key = value` configuration with command-line overrides.
//!
//! Blank lines and lines starting with `#` are ignored. Later assignments
//! win, so flags applied after the file override it.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use mkd_core::forecast::Criterion;
use mkd_core::{DivisorPolicy, Family, MkdConfig, Tolerance};

use crate::error::{CliError, CliResult};
use crate::output::fmt_f64;

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub mkd: MkdConfig,
    /// First day of the daily output when period labels are not dates.
    pub start_date: Option<NaiveDate>,
    pub criterion: Criterion,
    /// Box-Cox λ applied to daily models.
    pub boxcox: Option<f64>,
    pub fourier_k: usize,
    pub fourier_period: f64,
    /// Season of the monthly SARIMA grid.
    pub season: usize,
    pub daily_max_p: usize,
    pub daily_max_q: usize,
    /// Lag of the naive forecast in the MASE denominator.
    pub mase_lag: usize,
    /// Period of the additive decomposition in `evaluate`.
    pub period: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            mkd: MkdConfig::default(),
            start_date: None,
            criterion: Criterion::Aic,
            boxcox: None,
            fourier_k: 1,
            fourier_period: 365.25,
            season: 12,
            daily_max_p: 3,
            daily_max_q: 2,
            mase_lag: 1,
            period: 7,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse::<T>()
        .map_err(|_| format!("invalid value `{}` for {}", value, key))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, String> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(format!("invalid boolean `{}` for {}", value, key)),
    }
}

impl Settings {
    pub const KEYS: &'static [&'static str] = &[
        "seed",
        "sigma0",
        "sigma_divisor",
        "prior_policy",
        "delta",
        "delta_abs",
        "iterations",
        "radius",
        "family",
        "reresolve_tolerance",
        "start_date",
        "criterion",
        "boxcox_lambda",
        "fourier_k",
        "fourier_period",
        "season",
        "daily_max_p",
        "daily_max_q",
        "mase_lag",
        "period",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        match key.trim() {
            "seed" => self.mkd.seed = parse_num(key, v)?,
            "sigma0" => {
                self.mkd.sigma0 = match v {
                    "auto" | "" => None,
                    _ => Some(parse_num(key, v)?),
                }
            }
            "sigma_divisor" => self.mkd.sigma_divisor = parse_num(key, v)?,
            "prior_policy" => {
                self.mkd.prior_policy = match v {
                    "unit_length" => DivisorPolicy::UnitLength,
                    _ => DivisorPolicy::Fixed(parse_num(key, v)?),
                }
            }
            "delta" => self.mkd.tolerance = Tolerance::RangeFraction(parse_num(key, v)?),
            "delta_abs" => self.mkd.tolerance = Tolerance::Absolute(parse_num(key, v)?),
            "iterations" | "n" => self.mkd.iterations = parse_num(key, v)?,
            "radius" | "r" => self.mkd.radius = parse_num(key, v)?,
            "family" => self.mkd.family = v.parse::<Family>().map_err(|e| e.to_string())?,
            "reresolve_tolerance" => self.mkd.reresolve_tolerance = parse_bool(key, v)?,
            "start_date" => {
                self.start_date = Some(
                    NaiveDate::parse_from_str(v, "%Y-%m-%d")
                        .map_err(|_| format!("invalid date `{}` for start_date", v))?,
                )
            }
            "criterion" => self.criterion = v.parse().map_err(|e: mkd_core::Error| e.to_string())?,
            "boxcox_lambda" => {
                self.boxcox = match v {
                    "none" | "" => None,
                    _ => Some(parse_num(key, v)?),
                }
            }
            "fourier_k" => self.fourier_k = parse_num(key, v)?,
            "fourier_period" => self.fourier_period = parse_num(key, v)?,
            "season" => self.season = parse_num(key, v)?,
            "daily_max_p" => self.daily_max_p = parse_num(key, v)?,
            "daily_max_q" => self.daily_max_q = parse_num(key, v)?,
            "mase_lag" => self.mase_lag = parse_num(key, v)?,
            "period" => self.period = parse_num(key, v)?,
            other => return Err(format!("unknown key `{}`", other)),
        }
        Ok(())
    }

    /// Applies `key=value` assignments from `text` on top of `self`.
    pub fn apply_text(&mut self, text: &str, name: &str) -> CliResult<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("{}: line {}: expected key=value", name, i + 1))
            })?;
            self.set(k, v)
                .map_err(|m| CliError::Usage(format!("{}: line {}: {}", name, i + 1, m)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> CliResult<()> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        self.apply_text(&text, &path.display().to_string())
    }

    /// Applies one `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> CliResult<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("expected key=value, got `{}`", assignment)))?;
        self.set(k, v).map_err(CliError::Usage)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.mkd.validate()?;
        if self.fourier_k > 0 && !(self.fourier_period > 0.0) {
            return Err(CliError::Usage("fourier_period must be positive".into()));
        }
        if self.mase_lag == 0 || self.period == 0 {
            return Err(CliError::Usage("mase_lag and period must be >= 1".into()));
        }
        Ok(())
    }

    /// Every setting as text, keyed by name, for manifests.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let m = &self.mkd;
        let mut out = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            out.insert(k.to_string(), v);
        };
        put("seed", m.seed.to_string());
        put("sigma0", m.sigma0.map(fmt_f64).unwrap_or_else(|| "auto".into()));
        put("sigma_divisor", fmt_f64(m.sigma_divisor));
        put(
            "prior_policy",
            match m.prior_policy {
                DivisorPolicy::UnitLength => "unit_length".into(),
                DivisorPolicy::Fixed(d) => d.to_string(),
            },
        );
        match m.tolerance {
            Tolerance::RangeFraction(f) => put("delta", fmt_f64(f)),
            Tolerance::Absolute(d) => put("delta_abs", fmt_f64(d)),
        }
        put("iterations", m.iterations.to_string());
        put("radius", m.radius.to_string());
        put("family", m.family.to_string());
        put("reresolve_tolerance", m.reresolve_tolerance.to_string());
        if let Some(d) = self.start_date {
            put("start_date", d.format("%Y-%m-%d").to_string());
        }
        put("criterion", self.criterion.to_string());
        put("boxcox_lambda", self.boxcox.map(fmt_f64).unwrap_or_else(|| "none".into()));
        put("fourier_k", self.fourier_k.to_string());
        put("fourier_period", fmt_f64(self.fourier_period));
        put("season", self.season.to_string());
        put("daily_max_p", self.daily_max_p.to_string());
        put("daily_max_q", self.daily_max_q.to_string());
        put("mase_lag", self.mase_lag.to_string());
        put("period", self.period.to_string());
        out
    }
}
