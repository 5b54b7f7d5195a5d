//! The subcommands, as library functions that write files under a prefix.

use std::path::{Path, PathBuf};

use chrono::{Datelike, Duration, Months, NaiveDate};
use mkd_core::forecast::diagnostics::default_lags;
use mkd_core::forecast::{
    acf, adf_test, forecast as point_forecast, information_criteria, ljung_box, select_model, AdfResult,
    ArimaSpec, Criterion, DiagnosticReport, LjungBox, Selection,
};
use mkd_core::series::SigmaEstimate;
use mkd_core::{decompose_additive, run_mkd, AggregatedSeries, DecompositionResult, ErrorReport};
use serde::Serialize;

use crate::config::Settings;
use crate::error::{CliError, CliResult};
use crate::grids::{daily_grid, monthly_grid, Grid};
use crate::ingest::{detect_schema, period_start, read_aggregated, read_daily, AggregatedFile, DailyFile, Schema};
use crate::manifest::{Clock, RunManifest, TOOL_VERSION};
use crate::output::{daily_table, fmt_f64, fmt_opt, CsvTable, OutputSet};

/// Where outputs go and how manifests are stamped.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub out_prefix: PathBuf,
    pub clock: Clock,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub manifest: RunManifest,
    pub manifest_path: PathBuf,
    /// Every file written, manifest last.
    pub files: Vec<PathBuf>,
}

fn finish(
    command: &str,
    inputs: &[&Path],
    settings: &Settings,
    started_at: String,
    ctx: &RunContext,
    mut out: OutputSet,
) -> CliResult<RunSummary> {
    let manifest = RunManifest {
        command: command.to_string(),
        tool_version: TOOL_VERSION.to_string(),
        seed: settings.mkd.seed,
        inputs: RunManifest::digest_inputs(inputs)?,
        config: settings.echo(),
        started_at,
        finished_at: ctx.clock.now(),
        outputs: out.written().to_vec(),
    };
    let manifest_path = out.write_json("manifest.json", &manifest)?;
    Ok(RunSummary {
        manifest,
        manifest_path,
        files: out.paths(),
    })
}

fn day_dates(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    (0..n).map(|i| start + Duration::days(i as i64)).collect()
}

fn unit_labels(agg: &AggregatedSeries) -> Vec<String> {
    agg.units()
        .iter()
        .flat_map(|u| std::iter::repeat(u.label.clone()).take(u.length))
        .collect()
}

fn start_date(file: &AggregatedFile, settings: &Settings) -> CliResult<NaiveDate> {
    settings.start_date.or(file.start).ok_or_else(|| {
        CliError::Validation("period labels are not dates; set start_date to place the daily output".into())
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DownscaleReport {
    pub sigma: SigmaEstimate,
    pub tolerance_abs: f64,
    pub overthrows_initial: usize,
    pub overthrow_counts: Vec<usize>,
    pub remaining_overthrows: usize,
    pub stopped_early: bool,
    pub total: u64,
    pub num_days: usize,
    pub daily_mean: f64,
}

/// Downscales an aggregated file and writes the per-stage series, the
/// per-unit stage comparison and a run report.
pub fn downscale(input: &Path, settings: &Settings, ctx: &RunContext) -> CliResult<RunSummary> {
    let started = ctx.clock.now();
    settings.validate()?;
    let file = read_aggregated(input)?;
    let start = start_date(&file, settings)?;
    let agg = &file.series;
    let res = run_mkd(agg, &settings.mkd)?;

    let dates = day_dates(start, agg.num_days());
    let labels = unit_labels(agg);
    let mut out = OutputSet::new(&ctx.out_prefix)?;
    out.write_csv("initial.csv", &daily_table(&dates, res.initial.values(), &labels))?;
    out.write_csv("overthrow.csv", &daily_table(&dates, res.after_overthrow.values(), &labels))?;
    out.write_csv("daily.csv", &daily_table(&dates, res.downscaled.values(), &labels))?;

    let mut stages = CsvTable::new(&["period", "days", "actual", "initial", "overthrow", "downscaled"]);
    let sums = [
        res.initial.unit_sums(),
        res.after_overthrow.unit_sums(),
        res.downscaled.unit_sums(),
    ];
    for (i, u) in agg.units().iter().enumerate() {
        stages.push(vec![
            u.label.clone(),
            u.length.to_string(),
            u.value.to_string(),
            sums[0][i].to_string(),
            sums[1][i].to_string(),
            sums[2][i].to_string(),
        ]);
    }
    stages.push(vec![
        "Total".into(),
        agg.num_days().to_string(),
        agg.total().to_string(),
        res.initial.total().to_string(),
        res.after_overthrow.total().to_string(),
        res.downscaled.total().to_string(),
    ]);
    out.write_csv("stages.csv", &stages)?;

    let mut sweeps = CsvTable::new(&["sweep", "overthrows"]);
    for (i, c) in res.overthrow_counts.iter().enumerate() {
        sweeps.push(vec![(i + 1).to_string(), c.to_string()]);
    }
    out.write_csv("sweeps.csv", &sweeps)?;

    let report = DownscaleReport {
        sigma: res.sigma,
        tolerance_abs: res.tolerance_abs,
        overthrows_initial: res.overthrow_counts.first().copied().unwrap_or(0),
        overthrow_counts: res.overthrow_counts.clone(),
        remaining_overthrows: res.remaining_overthrows,
        stopped_early: res.stopped_early,
        total: res.downscaled.total(),
        num_days: res.downscaled.len(),
        daily_mean: res.downscaled.mean(),
    };
    out.write_json("report.json", &report)?;
    finish("downscale", &[input], settings, started, ctx, out)
}

/// Sums a daily file over its units (or calendar months).
pub fn aggregate(input: &Path, settings: &Settings, ctx: &RunContext) -> CliResult<RunSummary> {
    let started = ctx.clock.now();
    let file = read_daily(input)?;
    let series = file.series();
    let mut t = CsvTable::new(&["period", "value", "days"]);
    let mut offset = 0;
    for (len, sum) in series.unit_lengths().iter().zip(series.unit_sums()) {
        t.push(vec![file.units[offset].clone(), sum.to_string(), len.to_string()]);
        offset += len;
    }
    let mut out = OutputSet::new(&ctx.out_prefix)?;
    out.write_csv("aggregated.csv", &t)?;
    finish("aggregate", &[input], settings, started, ctx, out)
}

/// Count, mean, sample standard deviation, min, quartiles and max.
pub fn describe(values: &[f64]) -> [(&'static str, f64); 8] {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        f64::NAN
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let h = (n - 1) as f64 * p;
        let lo = h.floor() as usize;
        let hi = h.ceil() as usize;
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    };
    [
        ("count", n as f64),
        ("mean", mean),
        ("std", std),
        ("min", sorted[0]),
        ("25%", q(0.25)),
        ("50%", q(0.5)),
        ("75%", q(0.75)),
        ("max", sorted[n - 1]),
    ]
}

fn check_aligned(a: &DailyFile, b: &DailyFile) -> CliResult<()> {
    if a.dates != b.dates {
        return Err(CliError::Validation(format!(
            "series are not aligned: {} days from {} vs {} days from {}",
            a.dates.len(),
            a.dates[0],
            b.dates.len(),
            b.dates[0]
        )));
    }
    Ok(())
}

/// Compares a synthetic daily series with the actual one: errors, summary
/// statistics and additive decompositions of both.
pub fn evaluate(actual: &Path, synthetic: &Path, settings: &Settings, ctx: &RunContext) -> CliResult<RunSummary> {
    let started = ctx.clock.now();
    settings.validate()?;
    let a = read_daily(actual)?;
    let s = read_daily(synthetic)?;
    check_aligned(&a, &s)?;
    let (av, sv) = (a.as_f64(), s.as_f64());

    let mut out = OutputSet::new(&ctx.out_prefix)?;
    let report = ErrorReport::compute(&av, &sv, None, settings.mase_lag)?;
    out.write_json("errors.json", &report)?;

    let mut summary = CsvTable::new(&["statistic", "actual", "synthetic"]);
    for ((name, x), (_, y)) in describe(&av).iter().zip(describe(&sv).iter()) {
        summary.push(vec![name.to_string(), fmt_f64(*x), fmt_f64(*y)]);
    }
    out.write_csv("summary.csv", &summary)?;

    let da = decompose_additive(&av, settings.period)?;
    let ds = decompose_additive(&sv, settings.period)?;
    out.write_csv("components.csv", &components_table(&a, &av, &sv, &da, &ds))?;
    finish("evaluate", &[actual, synthetic], settings, started, ctx, out)
}

fn components_table(
    a: &DailyFile,
    av: &[f64],
    sv: &[f64],
    da: &DecompositionResult,
    ds: &DecompositionResult,
) -> CsvTable {
    let mut t = CsvTable::new(&[
        "date",
        "actual",
        "actual_trend",
        "actual_seasonal",
        "actual_residual",
        "synthetic",
        "synthetic_trend",
        "synthetic_seasonal",
        "synthetic_residual",
        "trend_diff",
        "seasonal_diff",
        "residual_diff",
    ]);
    let diff = |x: Option<f64>, y: Option<f64>| x.zip(y).map(|(x, y)| y - x);
    for i in 0..av.len() {
        t.push(vec![
            a.dates[i].format("%Y-%m-%d").to_string(),
            fmt_f64(av[i]),
            fmt_opt(da.trend[i]),
            fmt_f64(da.seasonal[i]),
            fmt_opt(da.residual[i]),
            fmt_f64(sv[i]),
            fmt_opt(ds.trend[i]),
            fmt_f64(ds.seasonal[i]),
            fmt_opt(ds.residual[i]),
            fmt_opt(diff(da.trend[i], ds.trend[i])),
            fmt_f64(ds.seasonal[i] - da.seasonal[i]),
            fmt_opt(diff(da.residual[i], ds.residual[i])),
        ]);
    }
    t
}

/// A loaded series of either schema with labels for future steps.
struct LoadedSeries {
    values: Vec<f64>,
    schema: Schema,
    next_labels: Box<dyn Fn(usize) -> Vec<String>>,
}

fn load_series(input: &Path) -> CliResult<LoadedSeries> {
    match detect_schema(input)? {
        Schema::Daily => {
            let f = read_daily(input)?;
            let last = *f.dates.last().expect("non-empty");
            Ok(LoadedSeries {
                values: f.as_f64(),
                schema: Schema::Daily,
                next_labels: Box::new(move |h| {
                    (1..=h)
                        .map(|k| (last + Duration::days(k as i64)).format("%Y-%m-%d").to_string())
                        .collect()
                }),
            })
        }
        Schema::Aggregated => {
            let f = read_aggregated(input)?;
            let last = f.series.units().last().expect("non-empty").label.clone();
            let month = period_start(&last).map(|(d, _)| d.with_day0(0).expect("day 1 exists"));
            Ok(LoadedSeries {
                values: f.series.values().iter().map(|&v| v as f64).collect(),
                schema: Schema::Aggregated,
                next_labels: Box::new(move |h| {
                    (1..=h)
                        .map(|k| match month {
                            Some(m) => (m + Months::new(k as u32)).format("%Y-%m").to_string(),
                            None => format!("+{}", k),
                        })
                        .collect()
                }),
            })
        }
        Schema::Table => Err(CliError::Validation(format!(
            "{}: expected a `date,value[,unit]` or `period,value[,days]` header",
            input.display()
        ))),
    }
}


#[derive(Debug, Clone, Serialize)]
pub struct ForecastReport {
    pub criterion: String,
    pub candidates: usize,
    pub horizon: usize,
    pub diagnostics: DiagnosticReport,
    pub failures: Vec<(String, String)>,
}

/// Which models `forecast` considers.
#[derive(Debug, Clone)]
pub enum ModelChoice {
    /// The grid matching the input schema.
    Auto,
    Grid(Grid),
    Specs(Vec<ArimaSpec>),
}

/// Output of the selection and diagnostics stages, independent of files.
#[derive(Debug, Clone)]
pub struct ForecastRun {
    pub selection: Selection,
    pub adf: Option<AdfResult>,
    pub ljung_box: Option<LjungBox>,
    pub forecast: Vec<f64>,
    pub report: DiagnosticReport,
}

pub fn run_forecast(series: &[f64], candidates: &[ArimaSpec], criterion: Criterion, horizon: usize) -> CliResult<ForecastRun> {
    if horizon == 0 {
        return Err(CliError::Usage("horizon must be >= 1".into()));
    }
    let adf = adf_test(series, None).ok();
    let selection = select_model(series, candidates, criterion)?;
    let best = &selection.best;
    let fitted = best.spec.n_arma();
    let lags = default_lags(best.residuals.len(), best.spec.season, fitted);
    let lb = ljung_box(&best.residuals, lags, fitted).ok();
    let forecast = point_forecast(best, horizon)?;
    let report = DiagnosticReport {
        model: best.spec.to_string(),
        adf: adf.clone(),
        ljung_box: lb.clone(),
        criteria: information_criteria(best),
        sigma2: best.sigma2,
        loglik: best.loglik,
        stationary: best.is_stationary(),
        invertible: best.is_invertible(),
        coefficients: best.named_coefficients(),
    };
    Ok(ForecastRun {
        selection,
        adf,
        ljung_box: lb,
        forecast,
        report,
    })
}

/// Runs the Box-Jenkins pipeline on a daily or aggregated file.
pub fn forecast(
    input: &Path,
    models: &ModelChoice,
    horizon: usize,
    settings: &Settings,
    ctx: &RunContext,
) -> CliResult<RunSummary> {
    let started = ctx.clock.now();
    settings.validate()?;
    let loaded = load_series(input)?;
    let candidates = match models {
        ModelChoice::Specs(s) => s.clone(),
        ModelChoice::Grid(g) => g.candidates(settings),
        ModelChoice::Auto => match loaded.schema {
            Schema::Daily => daily_grid(settings),
            _ => monthly_grid(settings.season),
        },
    };
    let run = run_forecast(&loaded.values, &candidates, settings.criterion, horizon)?;

    let mut out = OutputSet::new(&ctx.out_prefix)?;
    let mut models_t = CsvTable::new(&["rank", "model", "k", "loglik", "aic", "aicc", "bic"]);
    for m in &run.selection.table {
        models_t.push(vec![
            m.rank.to_string(),
            m.label.clone(),
            m.criteria.k.to_string(),
            fmt_f64(m.loglik),
            fmt_f64(m.criteria.aic),
            fmt_opt(m.criteria.aicc),
            fmt_f64(m.criteria.bic),
        ]);
    }
    out.write_csv("models.csv", &models_t)?;

    let mut fc = CsvTable::new(&["step", "label", "value"]);
    for (k, (label, v)) in (loaded.next_labels)(horizon).into_iter().zip(&run.forecast).enumerate() {
        fc.push(vec![(k + 1).to_string(), label, fmt_f64(*v)]);
    }
    out.write_csv("forecast.csv", &fc)?;

    let report = ForecastReport {
        criterion: settings.criterion.to_string(),
        candidates: candidates.len(),
        horizon,
        diagnostics: run.report.clone(),
        failures: run.selection.failures.clone(),
    };
    out.write_json("diagnostics.json", &report)?;

    let residuals = &run.selection.best.residuals;
    let mut res_t = CsvTable::new(&["index", "residual"]);
    for (i, r) in residuals.iter().enumerate() {
        res_t.push(vec![(i + 1).to_string(), fmt_f64(*r)]);
    }
    out.write_csv("residuals.csv", &res_t)?;

    let max_lag = (2 * run.selection.best.spec.season).max(30).min(residuals.len().saturating_sub(1));
    let mut acf_t = CsvTable::new(&["lag", "acf"]);
    if let Ok(r) = acf(residuals, max_lag) {
        for (k, v) in r.iter().enumerate() {
            acf_t.push(vec![k.to_string(), fmt_f64(*v)]);
        }
    }
    out.write_csv("acf.csv", &acf_t)?;
    finish("forecast", &[input], settings, started, ctx, out)
}

/// Scores of one arm of the comparison.
#[derive(Debug, Clone, Serialize)]
pub struct CompareArm {
    pub granularity: String,
    pub model: String,
    pub train_points: usize,
    pub horizon: usize,
    pub errors: ErrorReport,
    pub actual: Vec<f64>,
    pub forecast: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareOutcome {
    pub monthly: CompareArm,
    pub daily: CompareArm,
    /// Whether the daily holdout was observed or itself downscaled.
    pub daily_truth: String,
}

/// Forecasts the last `holdout` units directly and through a downscaled
/// daily series, scoring each against the holdout at its own granularity.
///
/// `actual_daily`, when given, must cover every day of `agg` and is used as
/// the daily truth; otherwise the downscaled full series stands in for it.
pub fn compare_series(
    agg: &AggregatedSeries,
    actual_daily: Option<&[u64]>,
    holdout: usize,
    settings: &Settings,
) -> CliResult<CompareOutcome> {
    settings.validate()?;
    if holdout == 0 {
        return Err(CliError::Usage("holdout must be >= 1".into()));
    }
    if holdout >= agg.len() {
        return Err(CliError::Validation(format!(
            "holdout of {} units leaves no training data in a series of {}",
            holdout,
            agg.len()
        )));
    }
    let split = agg.len() - holdout;
    let train = agg.head(split)?;
    let test = agg.tail_from(split)?;
    let train_days = train.num_days();
    let test_days = test.num_days();

    let train_m: Vec<f64> = train.values().iter().map(|&v| v as f64).collect();
    let test_m: Vec<f64> = test.values().iter().map(|&v| v as f64).collect();
    let monthly = run_forecast(&train_m, &monthly_grid(settings.season), settings.criterion, holdout)?;
    let monthly_errors = ErrorReport::compute(&test_m, &monthly.forecast, Some(&train_m), settings.mase_lag)?;

    let train_d = run_mkd(&train, &settings.mkd)?.downscaled.as_f64();
    let (truth, source) = match actual_daily {
        Some(a) => {
            if a.len() != agg.num_days() {
                return Err(CliError::Validation(format!(
                    "actual daily series has {} days, the aggregates cover {}",
                    a.len(),
                    agg.num_days()
                )));
            }
            (a[train_days..].iter().map(|&v| v as f64).collect::<Vec<_>>(), "observed")
        }
        None => (run_mkd(agg, &settings.mkd)?.downscaled.as_f64()[train_days..].to_vec(), "downscaled"),
    };
    let daily = run_forecast(&train_d, &daily_grid(settings), settings.criterion, test_days)?;
    let daily_errors = ErrorReport::compute(&truth, &daily.forecast, Some(&train_d), settings.mase_lag)?;

    Ok(CompareOutcome {
        monthly: CompareArm {
            granularity: "monthly".into(),
            model: monthly.report.model,
            train_points: train_m.len(),
            horizon: holdout,
            errors: monthly_errors,
            actual: test_m,
            forecast: monthly.forecast,
        },
        daily: CompareArm {
            granularity: "daily".into(),
            model: daily.report.model,
            train_points: train_d.len(),
            horizon: test_days,
            errors: daily_errors,
            actual: truth,
            forecast: daily.forecast,
        },
        daily_truth: source.into(),
    })
}

pub fn compare(
    input: &Path,
    holdout: usize,
    actual_daily: Option<&Path>,
    settings: &Settings,
    ctx: &RunContext,
) -> CliResult<RunSummary> {
    let started = ctx.clock.now();
    let file = read_aggregated(input)?;
    let truth = match actual_daily {
        Some(p) => Some(read_daily(p)?.values),
        None => None,
    };
    let outcome = compare_series(&file.series, truth.as_deref(), holdout, settings)?;

    let mut out = OutputSet::new(&ctx.out_prefix)?;
    let mut t = CsvTable::new(&["granularity", "model", "train_points", "horizon", "rmse", "mae", "mase"]);
    for arm in [&outcome.monthly, &outcome.daily] {
        t.push(vec![
            arm.granularity.clone(),
            arm.model.clone(),
            arm.train_points.to_string(),
            arm.horizon.to_string(),
            fmt_f64(arm.errors.rmse),
            fmt_f64(arm.errors.mae),
            fmt_opt(arm.errors.mase),
        ]);
    }
    out.write_csv("comparison.csv", &t)?;

    let split = file.series.len() - holdout;
    let mut mt = CsvTable::new(&["period", "actual", "forecast"]);
    for (i, u) in file.series.units()[split..].iter().enumerate() {
        mt.push(vec![
            u.label.clone(),
            fmt_f64(outcome.monthly.actual[i]),
            fmt_f64(outcome.monthly.forecast[i]),
        ]);
    }
    out.write_csv("monthly_forecast.csv", &mt)?;

    let first_test_day = file.series.head(split)?.num_days();
    let dates = match start_date(&file, settings) {
        Ok(s) => day_dates(s, file.series.num_days())[first_test_day..]
            .iter()
            .map(|d| d.format("%Y-%m-%d").to_string())
            .collect(),
        Err(_) => (1..=outcome.daily.horizon).map(|k| format!("+{}", k)).collect::<Vec<_>>(),
    };
    let mut dt = CsvTable::new(&["day", "actual", "forecast"]);
    for (i, d) in dates.into_iter().enumerate() {
        dt.push(vec![d, fmt_f64(outcome.daily.actual[i]), fmt_f64(outcome.daily.forecast[i])]);
    }
    out.write_csv("daily_forecast.csv", &dt)?;

    let mut inputs: Vec<&Path> = vec![input];
    inputs.extend(actual_daily);
    finish("compare", &inputs, settings, started, ctx, out)
}
