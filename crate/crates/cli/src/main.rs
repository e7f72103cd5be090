//! `convexinfo` command-line front end.
//!
//! Exit status: 0 on success with all verdicts passing, 1 when a verdict
//! fails (or a numerical routine does not converge), 2 on invalid input.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use convexinfo::config::{Command, OutputFormat, RunConfig};
use convexinfo::report::run;

/// Environment variable naming the default output directory.
const OUT_DIR_ENV: &str = "CONVEXINFO_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "convexinfo",
    version,
    about = "Concentration bounds for the information content of convex measures"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Deviation profile, varentropy, entropy and small-ball bounds, tail exponents.
    Bounds(RunArgs),
    /// Upper and lower tail exponents over a t grid.
    Dual(RunArgs),
    /// Certify log-concavity of a moment curve.
    VerifyMoments(RunArgs),
    /// Sample a family and check the bounds empirically.
    Simulate(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Settings as key=value, e.g. n=2 beta=6 t=0.5,1,2
    #[arg(value_name = "KEY=VALUE")]
    pairs: Vec<String>,
    /// Config file of key=value pairs; its values win over the command line.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Output format (same as format=...).
    #[arg(long, value_enum)]
    format: Option<Format>,
}

enum Failure {
    Input(anyhow::Error),
    Runtime(anyhow::Error),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Bounds(a) => (Command::Bounds, a),
        Cmd::Dual(a) => (Command::Dual, a),
        Cmd::VerifyMoments(a) => (Command::VerifyMoments, a),
        Cmd::Simulate(a) => (Command::Simulate, a),
    };
    match execute(command, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn split_arg(arg: &str) -> Result<(String, String)> {
    let (k, v) = arg
        .split_once('=')
        .with_context(|| format!("expected key=value, got '{arg}'"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

fn execute(command: Command, args: RunArgs) -> std::result::Result<bool, Failure> {
    let input = |e: anyhow::Error| Failure::Input(e);
    let mut pairs = args
        .pairs
        .iter()
        .map(|a| split_arg(a))
        .collect::<Result<Vec<_>>>()
        .map_err(input)?;
    if let Some(f) = args.format {
        let v = match f {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        pairs.push(("format".into(), v.into()));
    }
    let file_text = args
        .config
        .as_ref()
        .map(|p| std::fs::read_to_string(p).with_context(|| format!("cannot read config file {}", p.display())))
        .transpose()
        .map_err(input)?;
    let (cfg, warnings) = RunConfig::merge(command, &pairs, file_text.as_deref()).map_err(|e| input(e.into()))?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    if cfg.command != command {
        return Err(input(anyhow::anyhow!(
            "config file sets command={} but the subcommand is {}",
            cfg.command,
            command
        )));
    }

    let workers = args
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let report = run(&cfg, workers).map_err(|e| {
        if e.is_input_error() {
            Failure::Input(e.into())
        } else {
            Failure::Runtime(e.into())
        }
    })?;

    let format = cfg.format_or_default();
    let text = match format {
        OutputFormat::Json => report.to_json(),
        OutputFormat::Csv => report.to_csv(),
    };
    match output_path(&cfg, format) {
        Some(path) => {
            write_output(&path, &text).map_err(input)?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    let pass = report.pass();
    if !pass {
        eprintln!("verdict: FAIL");
    }
    Ok(pass)
}

fn output_path(cfg: &RunConfig, format: OutputFormat) -> Option<PathBuf> {
    if let Some(out) = &cfg.out {
        return Some(PathBuf::from(out));
    }
    std::env::var_os(OUT_DIR_ENV)
        .filter(|d| !d.is_empty())
        .map(|d| Path::new(&d).join(format!("{}.{}", cfg.command, format.extension())))
}

fn write_output(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}
