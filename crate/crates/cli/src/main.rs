use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mkd_cli::commands::{self, ModelChoice, RunContext, RunSummary};
use mkd_cli::grids::Grid;
use mkd_cli::{verify_manifest, CliError, CliResult, Clock, Settings};
use mkd_core::forecast::ArimaSpec;

#[derive(Parser, Debug)]
#[command(name = "mkd", version, about = "Downscale aggregated count series and forecast them")]
struct Cli {
    /// Seed for every random draw; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Flat key=value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output path prefix; files are written as <prefix>.<name>.
    #[arg(long, global = true)]
    out_prefix: Option<PathBuf>,
    /// Extra key=value overrides, applied after the config file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Downscale an aggregated `period,value[,days]` file to daily counts.
    Downscale {
        input: PathBuf,
        #[arg(long)]
        sigma0: Option<f64>,
        /// Overthrow tolerance as a fraction of the series range.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        radius: Option<usize>,
    },
    /// Sum a daily `date,value[,unit]` file over units or calendar months.
    Aggregate { input: PathBuf },
    /// Compare a synthetic daily series with the actual one.
    Evaluate {
        actual: PathBuf,
        synthetic: PathBuf,
        /// Decomposition period.
        #[arg(long)]
        period: Option<usize>,
    },
    /// Select a model, check it and forecast.
    Forecast {
        input: PathBuf,
        /// Candidate model such as `SARIMA(1,0,0)(0,1,1)[12]`; repeatable.
        #[arg(long = "model")]
        models: Vec<String>,
        /// Named candidate set: monthly, daily or arma.
        #[arg(long, conflicts_with = "models")]
        grid: Option<String>,
        #[arg(long, default_value_t = 5)]
        horizon: usize,
        /// aic, aicc or bic.
        #[arg(long)]
        criterion: Option<String>,
        /// Box-Cox λ for the daily grid.
        #[arg(long)]
        boxcox: Option<f64>,
    },
    /// Forecast held-out units directly and through downscaled daily data.
    Compare {
        input: PathBuf,
        /// Number of trailing units held out for scoring.
        #[arg(long)]
        holdout: usize,
        /// Observed daily series covering every aggregated day.
        #[arg(long)]
        actual_daily: Option<PathBuf>,
        #[arg(long)]
        criterion: Option<String>,
        #[arg(long)]
        boxcox: Option<f64>,
    },
    /// Re-hash the inputs and outputs recorded in a manifest.
    Verify { manifest: PathBuf },
}

fn default_prefix(input: &Path) -> PathBuf {
    PathBuf::from(input.file_stem().unwrap_or_default())
}

fn settings(cli: &Cli, extra: &[(&str, Option<String>)]) -> CliResult<Settings> {
    let mut s = Settings::default();
    if let Some(path) = &cli.config {
        s.apply_file(path)?;
    }
    for o in &cli.overrides {
        s.apply_override(o)?;
    }
    for (k, v) in extra {
        if let Some(v) = v {
            s.set(k, v).map_err(CliError::Usage)?;
        }
    }
    if let Some(seed) = cli.seed {
        s.mkd.seed = seed;
    }
    Ok(s)
}

fn text<T: ToString>(v: &Option<T>) -> Option<String> {
    v.as_ref().map(|x| x.to_string())
}

fn run(cli: &Cli) -> CliResult<Option<RunSummary>> {
    let ctx = |input: &Path| RunContext {
        out_prefix: cli.out_prefix.clone().unwrap_or_else(|| default_prefix(input)),
        clock: Clock::from_env(),
    };
    let summary = match &cli.command {
        Command::Downscale {
            input,
            sigma0,
            delta,
            iterations,
            radius,
        } => {
            let s = settings(
                cli,
                &[
                    ("sigma0", text(sigma0)),
                    ("delta", text(delta)),
                    ("iterations", text(iterations)),
                    ("radius", text(radius)),
                ],
            )?;
            commands::downscale(input, &s, &ctx(input))?
        }
        Command::Aggregate { input } => commands::aggregate(input, &settings(cli, &[])?, &ctx(input))?,
        Command::Evaluate {
            actual,
            synthetic,
            period,
        } => {
            let s = settings(cli, &[("period", text(period))])?;
            commands::evaluate(actual, synthetic, &s, &ctx(synthetic))?
        }
        Command::Forecast {
            input,
            models,
            grid,
            horizon,
            criterion,
            boxcox,
        } => {
            let s = settings(cli, &[("criterion", criterion.clone()), ("boxcox_lambda", text(boxcox))])?;
            let choice = if !models.is_empty() {
                let specs = models
                    .iter()
                    .map(|m| m.parse::<ArimaSpec>().map_err(CliError::from))
                    .collect::<CliResult<Vec<_>>>()?;
                ModelChoice::Specs(specs)
            } else if let Some(g) = grid {
                ModelChoice::Grid(g.parse::<Grid>()?)
            } else {
                ModelChoice::Auto
            };
            commands::forecast(input, &choice, *horizon, &s, &ctx(input))?
        }
        Command::Compare {
            input,
            holdout,
            actual_daily,
            criterion,
            boxcox,
        } => {
            let s = settings(cli, &[("criterion", criterion.clone()), ("boxcox_lambda", text(boxcox))])?;
            commands::compare(input, *holdout, actual_daily.as_deref(), &s, &ctx(input))?
        }
        Command::Verify { manifest } => {
            let problems = verify_manifest(manifest)?;
            if !problems.is_empty() {
                return Err(CliError::Validation(problems.join("\n")));
            }
            println!("{}: all files match", manifest.display());
            return Ok(None);
        }
    };
    Ok(Some(summary))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(Some(summary)) => {
            for f in &summary.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
