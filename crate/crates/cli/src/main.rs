//! `couplab`: command-line front end for the coupon collector laboratory.

mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use couplab_core::harness::{self, Format};
use couplab_core::Error;

use config::{FileConfig, Overrides};

#[derive(Parser, Debug)]
#[command(name = "couplab", version, about = "Simulate and verify coupon collector learning processes")]
struct Cli {
    #[command(subcommand)]
    group: Group,
}

#[derive(Subcommand, Debug)]
enum Group {
    /// Quantum coupon collector learner.
    #[command(subcommand)]
    Qcc(QccCmd),
    /// Classical collection, set estimation and random guessing.
    #[command(subcommand)]
    Classical(ClassicalCmd),
    /// Padded ensemble verification.
    #[command(subcommand)]
    Padded(PaddedCmd),
    /// Analytic bounds.
    #[command(subcommand)]
    Bounds(BoundsCmd),
}

#[derive(Subcommand, Debug)]
enum QccCmd {
    /// Run seeded trials and print one aggregated row.
    Run(Common),
    /// Success probability over a range of sample counts (`--samples start:end[:step]`).
    Sweep(Common),
}

#[derive(Subcommand, Debug)]
enum ClassicalCmd {
    /// Collect coupons; success means at least k - l distinct.
    Run(Common),
    /// Collect-then-guess set estimation.
    T3(Common),
    /// Exact random-guess success for l in [10m, 20m] (m from --grid-k, default 1,2).
    Guess(Common),
}

#[derive(Subcommand, Debug)]
enum PaddedCmd {
    /// Check every padded-ensemble invariant over a grid.
    Verify(Common),
    /// Block table for S = {0..k-1}.
    Weights(Common),
}

#[derive(Subcommand, Debug)]
enum BoundsCmd {
    /// Sample budget, distance envelope and lower-bound reference.
    Eval(Common),
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub t: Option<usize>,
    #[arg(long)]
    pub p: Option<u32>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sample count, or `start:end[:step]` for `qcc sweep`.
    #[arg(long)]
    pub samples: Option<String>,
    /// `categorical` or `statevec`.
    #[arg(long)]
    pub engine: Option<String>,
    /// Also write per-trial (J, L) trajectories as CSV to this path.
    #[arg(long)]
    pub trajectories: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `csv` or `json`.
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long, value_parser = parse_list::<usize>)]
    pub grid_n: Option<List<usize>>,
    #[arg(long, value_parser = parse_list::<usize>)]
    pub grid_k: Option<List<usize>>,
    #[arg(long, value_parser = parse_list::<usize>)]
    pub grid_t: Option<List<usize>>,
    #[arg(long, value_parser = parse_list::<u32>)]
    pub grid_p: Option<List<u32>>,
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

/// Comma-separated values; an empty string is an empty list.
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<List<T>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse::<T>().map_err(|_| format!("cannot parse `{v}`")))
        .collect::<Result<Vec<T>, String>>()
        .map(List)
}

const EXIT_VIOLATION: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.group) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            let violation = matches!(err.downcast_ref::<Error>(), Some(Error::InvariantViolation(_)));
            ExitCode::from(if violation { EXIT_VIOLATION } else { EXIT_CONFIG })
        }
    }
}

fn output(settings: &Overrides) -> anyhow::Result<Box<dyn Write>> {
    Ok(match &settings.out {
        Some(path) => {
            Box::new(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
        }
        None => Box::new(io::stdout().lock()),
    })
}

fn resolve(common: &Common) -> anyhow::Result<Overrides> {
    let file = match &common.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    Ok(file.merge(common)?)
}

fn dispatch(group: Group) -> anyhow::Result<u8> {
    let start = Instant::now();
    let code = match group {
        Group::Qcc(QccCmd::Run(c)) => {
            let s = resolve(&c)?;
            let cfg = s.experiment(s.samples_count()?)?;
            let run = harness::run_qcc(&cfg)?;
            if let Some(path) = &c.trajectories {
                let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
                harness::write_csv(&run.trajectories(), BufWriter::new(file))?;
            }
            harness::write_rows(&[run.row], s.format, output(&s)?)?;
            0
        }
        Group::Qcc(QccCmd::Sweep(c)) => {
            let s = resolve(&c)?;
            let range = s.samples.as_deref().ok_or_else(|| Error::Config("--samples range is required".into()))?;
            let points = harness::parse_range(range)?;
            let rows = harness::sweep(&s.experiment(None)?, &points)?;
            harness::write_rows(&rows, s.format, output(&s)?)?;
            0
        }
        Group::Classical(ClassicalCmd::Run(c)) => {
            let s = resolve(&c)?;
            let row = harness::run_classical(&s.experiment(s.samples_count()?)?)?;
            harness::write_rows(&[row], s.format, output(&s)?)?;
            0
        }
        Group::Classical(ClassicalCmd::T3(c)) => {
            let s = resolve(&c)?;
            let row = harness::run_t3(&s.experiment(s.samples_count()?)?)?;
            harness::write_rows(&[row], s.format, output(&s)?)?;
            0
        }
        Group::Classical(ClassicalCmd::Guess(c)) => {
            let s = resolve(&c)?;
            let ms = s.grid.as_ref().map(|g| g.ks.clone()).unwrap_or_else(|| vec![1, 2]);
            let rows = harness::run_guess(&ms)?;
            let violated = rows.iter().any(|r| !r.at_most_half);
            harness::write_rows(&rows, s.format, output(&s)?)?;
            if violated {
                EXIT_VIOLATION
            } else {
                0
            }
        }
        Group::Padded(PaddedCmd::Verify(c)) => {
            let s = resolve(&c)?;
            let grid = s.grid.clone().unwrap_or_default();
            let report = harness::verify_padded(&grid, c.inject_fault)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            for v in &report.violations {
                eprintln!("violation: {v}");
            }
            eprintln!("{} checks, {} violations", report.checks, report.violations.len());
            let mut out = output(&s)?;
            match s.format {
                Format::Csv => harness::write_csv(&report.degenerate, &mut out)?,
                Format::Json => harness::write_json(&report, &mut out)?,
            }
            out.flush()?;
            report.exit_code() as u8
        }
        Group::Padded(PaddedCmd::Weights(c)) => {
            let s = resolve(&c)?;
            let rows = harness::padded_weights(&s.experiment(None)?)?;
            harness::write_rows(&rows, s.format, output(&s)?)?;
            0
        }
        Group::Bounds(BoundsCmd::Eval(c)) => {
            let s = resolve(&c)?;
            let row = harness::bounds_eval(&s.experiment(s.samples_count()?)?)?;
            harness::write_rows(&[row], s.format, output(&s)?)?;
            0
        }
    };
    eprintln!("elapsed: {:.3}s", start.elapsed().as_secs_f64());
    Ok(code)
}
