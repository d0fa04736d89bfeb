//! `prizebalance` — how prize-money allocation moves a league's competitive
//! balance.
//!
//! Reads a budget file (CSV `club,budget` or a JSON array), then:
//!
//! - `index`       concentration report (HHI, band, optional CR)
//! - `apply`       award an endowment under a sharing rule and compare HHI
//! - `thresholds`  per-k improvement regimes, break-even endowments, HHI
//!                 minima, and the smallest improving k
//! - `sweep`       post-award HHI over an endowment grid (plot-ready CSV)
//! - `verify`      randomized brute-force check of every closed form
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use prizebalance::analysis::{sweep_endowments, threshold_report, AnalysisError};
use prizebalance::index::{ConcentrationReport, IndexError};
use prizebalance::model::{Endowment, ModelError, SharingRule};
use prizebalance::oracle::{run_verification, RandomInstanceSpec};
use prizebalance::index::POINTS_SCALE;
use prizebalance::rules::{apply, classify_delta};

mod input;
mod render;

#[derive(Parser)]
#[command(
    name = "prizebalance",
    version,
    about = "Competitive-balance analysis of prize-sharing rules via the Herfindahl-Hirschman index"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    #[default]
    Table,
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Concentration report for a budget file
    Index(IndexArgs),
    /// Award an endowment under a sharing rule and report the HHI change
    Apply(ApplyArgs),
    /// Improvement regime, break-even endowment, and HHI-minimizing endowment per k
    Thresholds(ThresholdsArgs),
    /// Post-award HHI across an endowment grid
    Sweep(SweepArgs),
    /// Randomized brute-force verification of the closed forms
    Verify(VerifyArgs),
}

#[derive(Args)]
struct IndexArgs {
    /// Budget file (CSV `club,budget` or JSON array)
    #[arg(long)]
    input: PathBuf,
    /// Output format
    #[arg(long, value_enum, default_value_t)]
    format: OutputFormat,
    /// Also report the concentration ratio of the m largest budgets
    #[arg(long, value_name = "M")]
    cr: Option<usize>,
}

#[derive(Args)]
struct ApplyArgs {
    #[arg(long)]
    input: PathBuf,
    /// Even top-k rule: split the endowment equally among the k largest budgets
    #[arg(long)]
    k: Option<usize>,
    /// Weighted top-k rule: comma-separated nonincreasing weights summing to 1
    #[arg(long, value_name = "W1,W2,...")]
    weights: Option<String>,
    /// General rule: file of per-club amounts (canonical order) summing to the endowment
    #[arg(long, value_name = "FILE")]
    amounts: Option<PathBuf>,
    /// Endowment to award, in the budgets' unit
    #[arg(long, value_name = "E")]
    endowment: f64,
    #[arg(long, value_enum, default_value_t)]
    format: OutputFormat,
    /// Report the HHI delta on the 10000-point scale
    #[arg(long)]
    points: bool,
}

#[derive(Args)]
struct ThresholdsArgs {
    #[arg(long)]
    input: PathBuf,
    /// Endowment for the smallest-improving-k line
    #[arg(long, value_name = "E")]
    endowment: f64,
    #[arg(long, value_enum, default_value_t)]
    format: OutputFormat,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    input: PathBuf,
    /// Even top-k rule to sweep
    #[arg(long)]
    k: usize,
    /// Endowment grid `min:max:steps` (steps intervals, steps+1 points)
    #[arg(long, value_name = "MIN:MAX:STEPS")]
    grid: String,
    /// Write output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format (the CSV schema is `E,hhi_points,band,delta`)
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
    /// Report HHI deltas on the 10000-point scale (table output only)
    #[arg(long)]
    points: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Seed for the deterministic instance stream
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Number of random instances
    #[arg(long, default_value_t = 10_000)]
    instances: usize,
    /// Smallest league size to sample
    #[arg(long, default_value_t = 2)]
    n_min: usize,
    /// Largest league size to sample
    #[arg(long, default_value_t = 30)]
    n_max: usize,
    #[arg(long, value_enum, default_value_t)]
    format: OutputFormat,
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Input(#[from] input::InputError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("{0}")]
    BadFlag(String),
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("verification failed: {0} of 6 properties had failures")]
    Verification(usize),
}

impl CliError {
    /// 0 success, 1 verification failure, 2 input error.
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            // a broken single-crossing pattern means the implementation
            // disagrees with itself, which is a verification failure
            CliError::Analysis(AnalysisError::SingleCrossingViolation { .. }) => 1,
            _ => 2,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Index(args) => cmd_index(args),
        Command::Apply(args) => cmd_apply(args),
        Command::Thresholds(args) => cmd_thresholds(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Verify(args) => cmd_verify(args),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    text
}

fn cmd_index(args: IndexArgs) -> Result<(), CliError> {
    let dist = input::load_distribution(&args.input)?;
    let report = ConcentrationReport::new(&dist, args.cr)?;
    let text = match args.format {
        OutputFormat::Table => render::index_table(&dist, &report),
        OutputFormat::Csv => render::index_csv(&report),
        OutputFormat::Json => to_json(&report),
    };
    print!("{text}");
    Ok(())
}

fn parse_weights(raw: &str) -> Result<Vec<f64>, CliError> {
    raw.split(',')
        .map(|field| {
            field
                .trim()
                .parse::<f64>()
                .map_err(|_| CliError::BadFlag(format!("weight `{field}` is not a number")))
        })
        .collect()
}

fn build_rule(args: &ApplyArgs) -> Result<SharingRule, CliError> {
    match (&args.k, &args.weights, &args.amounts) {
        (Some(k), None, None) => Ok(SharingRule::EvenTopK { k: *k }),
        (k, Some(raw), None) => {
            let weights = parse_weights(raw)?;
            if let Some(k) = k {
                if *k != weights.len() {
                    return Err(CliError::BadFlag(format!(
                        "--k {} does not match {} weights",
                        k,
                        weights.len()
                    )));
                }
            }
            Ok(SharingRule::WeightedTopK {
                k: weights.len(),
                weights,
            })
        }
        (None, None, Some(path)) => Ok(SharingRule::General {
            amounts: input::load_amounts(path)?,
        }),
        _ => Err(CliError::BadFlag(
            "pass exactly one rule: --k, --weights (optionally with --k), or --amounts".into(),
        )),
    }
}

fn cmd_apply(args: ApplyArgs) -> Result<(), CliError> {
    let dist = input::load_distribution(&args.input)?;
    let rule = build_rule(&args)?;
    let endowment = Endowment::new(args.endowment)?;
    let post = apply(&dist, rule, endowment)?;
    let baseline = ConcentrationReport::new(&dist, None)?;
    let after = ConcentrationReport::new(post.awarded(), None)?;
    let delta = after.hhi_raw - baseline.hhi_raw;
    let effect = classify_delta(delta, baseline.hhi_raw);
    let text = match args.format {
        OutputFormat::Table => {
            render::apply_table(&post, &baseline, &after, delta, effect, args.points)
        }
        OutputFormat::Csv => render::apply_csv(&post),
        OutputFormat::Json => to_json(&serde_json::json!({
            "rule": post.rule(),
            "endowment": post.endowment().value(),
            "baseline": baseline,
            "post": after,
            "delta_raw": delta,
            "delta_points": delta * POINTS_SCALE,
            "effect": effect,
            "awarded": post.awarded().clubs(),
        })),
    };
    print!("{text}");
    Ok(())
}

fn cmd_thresholds(args: ThresholdsArgs) -> Result<(), CliError> {
    let dist = input::load_distribution(&args.input)?;
    let endowment = Endowment::new(args.endowment)?;
    let report = threshold_report(&dist, endowment)?;
    let text = match args.format {
        OutputFormat::Table => render::thresholds_table(&report),
        OutputFormat::Csv => render::thresholds_csv(&report),
        OutputFormat::Json => to_json(&report),
    };
    print!("{text}");
    Ok(())
}

/// Parses `min:max:steps` into an inclusive uniform grid of `steps + 1`
/// endowments.
fn parse_grid(raw: &str) -> Result<Vec<f64>, CliError> {
    let bad = |message: &str| CliError::BadFlag(format!("--grid `{raw}`: {message}"));
    let parts: Vec<&str> = raw.split(':').collect();
    let [min, max, steps] = parts.as_slice() else {
        return Err(bad("expected min:max:steps"));
    };
    let min: f64 = min.trim().parse().map_err(|_| bad("min is not a number"))?;
    let max: f64 = max.trim().parse().map_err(|_| bad("max is not a number"))?;
    let steps: usize = steps
        .trim()
        .parse()
        .map_err(|_| bad("steps is not a positive integer"))?;
    if steps < 1 {
        return Err(bad("steps must be at least 1"));
    }
    if !min.is_finite() || !max.is_finite() || min < 0.0 || max <= min {
        return Err(bad("need 0 <= min < max"));
    }
    Ok((0..=steps)
        .map(|i| min + (max - min) * i as f64 / steps as f64)
        .collect())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let dist = input::load_distribution(&args.input)?;
    let grid = parse_grid(&args.grid)?;
    let sweep = sweep_endowments(&dist, args.k, &grid)?;
    let text = match args.format {
        OutputFormat::Table => render::sweep_table(&sweep, args.points),
        OutputFormat::Csv => render::sweep_csv(&sweep),
        OutputFormat::Json => to_json(&sweep),
    };
    match &args.out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Write {
            path: path.display().to_string(),
            source,
        })?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    if args.n_min < 2 || args.n_min > args.n_max {
        return Err(CliError::BadFlag(
            "league size range needs 2 <= n-min <= n-max".into(),
        ));
    }
    let spec = RandomInstanceSpec {
        n_clubs: (args.n_min, args.n_max),
        seed: args.seed,
        ..RandomInstanceSpec::default()
    };
    let summary = run_verification(&spec, args.instances);
    let text = match args.format {
        OutputFormat::Json => to_json(&summary),
        _ => render::verify_table(&summary),
    };
    print!("{text}");
    if summary.passed() {
        Ok(())
    } else {
        let failing = summary.properties.iter().filter(|p| !p.passed()).count();
        Err(CliError::Verification(failing))
    }
}
