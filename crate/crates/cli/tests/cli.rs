mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mkd_cli::commands::run_forecast;
use mkd_cli::grids::arma_grid;
use mkd_cli::ingest::{read_daily, read_table};
use mkd_cli::{compare_series, Settings};
use mkd_core::forecast::{ArimaSpec, Criterion};
use mkd_core::AggregatedSeries;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use tempfile::TempDir;

fn mkd(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mkd"))
        .args(args)
        .current_dir(dir)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn copy_fixture(name: &str, dir: &Path) -> PathBuf {
    let dst = dir.join(name);
    fs::copy(common::fixture(name), &dst).unwrap();
    dst
}

fn total_row(path: &Path) -> Vec<String> {
    let t = read_table(path).unwrap();
    assert_eq!(t.header, ["period", "days", "actual", "initial", "overthrow", "downscaled"]);
    t.rows.last().unwrap().clone()
}

#[test]
fn downscale_dengue_conserves_every_stage() {
    let dir = TempDir::new().unwrap();
    copy_fixture("dengue_2022.csv", dir.path());
    let o = mkd(&["downscale", "dengue_2022.csv", "--seed", "3"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(total_row(&dir.path().join("dengue_2022.stages.csv")), ["Total", "211", "2580", "2580", "2580", "2580"]);

    let daily = read_daily(&dir.path().join("dengue_2022.daily.csv")).unwrap();
    assert_eq!(daily.values.len(), 211);
    assert_eq!(daily.dates[0].to_string(), "2022-01-01");
    assert_eq!(daily.dates[210].to_string(), "2022-07-30");
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("dengue_2022.report.json")).unwrap()).unwrap();
    assert_eq!(report["total"], 2580);
    // population spread of the per-day prior, over 30
    let lengths = [31u32, 28, 31, 30, 31, 30, 30];
    let prior: Vec<f64> = common::DENGUE_2022
        .iter()
        .zip(lengths)
        .flat_map(|(&v, n)| std::iter::repeat_n(v as f64 / n as f64, n as usize))
        .collect();
    let m = prior.iter().sum::<f64>() / 211.0;
    let sd = (prior.iter().map(|p| (p - m).powi(2)).sum::<f64>() / 211.0).sqrt();
    assert!((report["sigma"]["sigma0"].as_f64().unwrap() - sd / 30.0).abs() < 1e-12);
}

#[test]
fn downscale_covid_with_tight_tolerance() {
    let dir = TempDir::new().unwrap();
    copy_fixture("covid_2020.csv", dir.path());
    let o = mkd(
        &["downscale", "covid_2020.csv", "--delta", "0.2", "--out-prefix", "out/covid"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let row = total_row(&dir.path().join("out/covid.stages.csv"));
    assert_eq!(row[1], "299");
    assert!(row[2..].iter().all(|v| v == "513510"), "{:?}", row);
    let daily = read_daily(&dir.path().join("out/covid.daily.csv")).unwrap();
    assert_eq!(daily.dates[0].to_string(), "2020-03-08");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    copy_fixture("dengue_2022.csv", dir.path());
    let suffixes = ["initial.csv", "overthrow.csv", "daily.csv", "stages.csv", "sweeps.csv", "report.json", "manifest.json"];
    let run = |prefix: &str, seed: &str| {
        let o = mkd(&["downscale", "dengue_2022.csv", "--seed", seed, "--out-prefix", prefix], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
        suffixes
            .iter()
            .map(|s| fs::read(dir.path().join(format!("{}.{}", prefix, s))).unwrap())
            .collect::<Vec<_>>()
    };
    let a = run("a/run", "11");
    let b = run("b/run", "11");
    assert_eq!(a, b);
    let c = run("c/run", "12");
    assert_ne!(a[2], c[2]);
}

#[test]
fn verify_detects_tampering() {
    let dir = TempDir::new().unwrap();
    let input = copy_fixture("dengue_2022.csv", dir.path());
    assert!(mkd(&["downscale", "dengue_2022.csv"], dir.path()).status.success());

    let ok = mkd(&["verify", "dengue_2022.manifest.json"], dir.path());
    assert!(ok.status.success(), "{}", stderr(&ok));

    let text = fs::read_to_string(&input).unwrap().replace("2022-03,20", "2022-03,21");
    fs::write(&input, text).unwrap();
    let bad = mkd(&["verify", "dengue_2022.manifest.json"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("dengue_2022.csv changed"), "{}", stderr(&bad));

    fs::write(&input, fs::read(common::fixture("dengue_2022.csv")).unwrap()).unwrap();
    fs::write(dir.path().join("dengue_2022.daily.csv"), "date,value\n").unwrap();
    let bad = mkd(&["verify", "dengue_2022.manifest.json"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("dengue_2022.daily.csv"));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    copy_fixture("dengue_2022.csv", dir.path());
    fs::write(dir.path().join("neg.csv"), "period,value\n2022-01,5\n2022-02,-3\n").unwrap();
    fs::write(dir.path().join("bad.conf"), "radius = 3\nflavour = sweet\n").unwrap();

    assert_eq!(mkd(&["downscale"], dir.path()).status.code(), Some(1));
    assert_eq!(mkd(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(mkd(&["--help"], dir.path()).status.code(), Some(0));

    let o = mkd(&["downscale", "dengue_2022.csv", "--config", "bad.conf"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
    let o = mkd(&["downscale", "dengue_2022.csv", "--set", "iterations=many"], dir.path());
    assert_eq!(o.status.code(), Some(1));

    let o = mkd(&["downscale", "neg.csv"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
    assert_eq!(mkd(&["downscale", "missing.csv"], dir.path()).status.code(), Some(2));
    assert_eq!(
        mkd(&["compare", "dengue_2022.csv", "--holdout", "9"], dir.path()).status.code(),
        Some(2)
    );
}

#[test]
fn aggregate_inverts_downscale() {
    let dir = TempDir::new().unwrap();
    copy_fixture("dengue_2022.csv", dir.path());
    assert!(mkd(&["downscale", "dengue_2022.csv"], dir.path()).status.success());
    let o = mkd(&["aggregate", "dengue_2022.daily.csv", "--out-prefix", "back"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("back.aggregated.csv")).unwrap();
    assert_eq!(text, fs::read_to_string(common::fixture("dengue_2022.csv")).unwrap());
}

#[test]
fn evaluate_identical_inputs() {
    let dir = TempDir::new().unwrap();
    copy_fixture("dengue_2022.csv", dir.path());
    assert!(mkd(&["downscale", "dengue_2022.csv"], dir.path()).status.success());
    let o = mkd(
        &["evaluate", "dengue_2022.daily.csv", "dengue_2022.daily.csv", "--out-prefix", "same"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let errors: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("same.errors.json")).unwrap()).unwrap();
    assert_eq!(errors["rmse"], 0.0);
    assert_eq!(errors["mae"], 0.0);

    let summary = read_table(&dir.path().join("same.summary.csv")).unwrap();
    let mean = summary.rows.iter().find(|r| r[0] == "mean").unwrap();
    assert_eq!(mean[1], mean[2]);
    assert!((mean[1].parse::<f64>().unwrap() - 12.22748815).abs() < 5e-9);

    let comps = read_table(&dir.path().join("same.components.csv")).unwrap();
    for row in &comps.rows {
        let h = &comps.header;
        for (name, v) in h.iter().zip(row) {
            if name.ends_with("_diff") && !v.is_empty() {
                assert_eq!(v.parse::<f64>().unwrap(), 0.0, "{}", name);
            }
        }
    }
}

#[test]
fn forecast_command_writes_ranked_models() {
    let dir = TempDir::new().unwrap();
    copy_fixture("dengue_2010_2022.csv", dir.path());
    let o = mkd(
        &["forecast", "dengue_2010_2022.csv", "--horizon", "5", "--criterion", "aicc"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let models = read_table(&dir.path().join("dengue_2010_2022.models.csv")).unwrap();
    assert_eq!(models.rows.len(), 24);
    let aicc: Vec<f64> = models.rows.iter().map(|r| r[5].parse().unwrap()).collect();
    assert!(aicc.windows(2).all(|w| w[0] <= w[1]));

    let fc = read_table(&dir.path().join("dengue_2010_2022.forecast.csv")).unwrap();
    let labels: Vec<&str> = fc.rows.iter().map(|r| r[1].as_str()).collect();
    assert_eq!(labels, ["2022-08", "2022-09", "2022-10", "2022-11", "2022-12"]);

    let diag: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("dengue_2010_2022.diagnostics.json")).unwrap()).unwrap();
    assert_eq!(diag["criterion"], "aicc");
    assert!(diag["diagnostics"]["ljung_box"]["p_value"].as_f64().unwrap() > 0.05);
}

#[test]
fn white_noise_mean_model_forecast_is_flat() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let x: Vec<f64> = (0..300).map(|_| { let z: f64 = StandardNormal.sample(&mut rng); 10.0 + z }).collect();
    let spec = ArimaSpec::arima(0, 0, 0).with_intercept(true);
    let run = run_forecast(&x, &[spec], Criterion::Aic, 5).unwrap();
    let mu = run.selection.best.intercept.unwrap();
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    assert!((mu - mean).abs() < 1e-9);
    assert_eq!(run.forecast.len(), 5);
    assert!(run.forecast.iter().all(|&f| f == mu));
}

#[test]
fn bic_prefers_mean_model_on_white_noise() {
    let grid = arma_grid(2, 2);
    let mut wins = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let x: Vec<f64> = (0..200).map(|_| StandardNormal.sample(&mut rng)).collect();
        let run = run_forecast(&x, &grid, Criterion::Bic, 1).unwrap();
        let s = &run.selection.best.spec;
        if (s.p, s.q) == (0, 0) {
            wins += 1;
        }
    }
    assert!(wins >= 80, "ARMA(0,0) won {} of 100", wins);
}

#[test]
fn constant_aggregate_has_undefined_mase() {
    let agg = AggregatedSeries::from_values(&[300; 30], &[30; 30]).unwrap();
    let out = compare_series(&agg, None, 6, &Settings::default()).unwrap();
    assert_eq!(out.monthly.errors.mase, None);
    assert_eq!(out.daily.errors.mase, None);

    let dir = TempDir::new().unwrap();
    let mut text = String::from("period,value,days\n");
    for i in 0..30 {
        text.push_str(&format!("u{:02},300,30\n", i));
    }
    fs::write(dir.path().join("flat.csv"), text).unwrap();
    let o = mkd(&["compare", "flat.csv", "--holdout", "6"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let t = read_table(&dir.path().join("flat.comparison.csv")).unwrap();
    assert_eq!(t.header.last().unwrap(), "mase");
    assert!(t.rows.iter().all(|r| r.last().unwrap().is_empty()));
}
