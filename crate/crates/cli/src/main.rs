//! `gdsa`: run, verify, sweep and certify GDSA experiments from JSON configs.
//!
//! Exit codes: 0 success, 1 verification or run failure, 2 malformed or
//! invalid configuration.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use gdsa::harness::{ConfigSource, Experiment};
use rayon::prelude::*;
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "gdsa", version, about = "Dynamic string-averaging projection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Output directory for traces and summaries.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `stop.max_iters`.
    #[arg(long, global = true)]
    max_iters: Option<usize>,
    /// Overrides the convergence tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Execute the experiment; write the trace CSV and summary JSON.
    Run { config: PathBuf },
    /// Operator property suite, admissibility and monitors; exit 1 on failure.
    Verify { config: PathBuf },
    /// Run one config per value of a single field and print a summary table.
    Sweep {
        config: PathBuf,
        /// Dotted path of the field, e.g. `relax.constant`.
        #[arg(long)]
        param: String,
        /// Comma-separated JSON values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
    /// Print oracle witnesses of the target set and constrained minimizers.
    Oracle { config: PathBuf },
}

/// Failure classes mapped to exit codes.
enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
    Verification,
}

impl From<gdsa::Error> for Failure {
    fn from(e: gdsa::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    let g = &cli.global;
    match &cli.command {
        Command::Run { config } => {
            let exp = load(config, g, None)?;
            let outcome = exp.execute()?;
            let (csv, json) = exp.write_outputs(&outcome, g.out.as_deref())?;
            if !g.quiet {
                let s = &outcome.summary;
                println!(
                    "{}: {} iterations, converged {}, final point {:?}",
                    s.name, s.iters, s.converged, s.final_point
                );
                println!("wrote {} and {}", csv.display(), json.display());
            }
            Ok(())
        }
        Command::Verify { config } => {
            let exp = load(config, g, None)?;
            let report = exp.verify()?;
            for c in &report.checks {
                if !g.quiet || !c.pass {
                    println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
                }
            }
            if report.pass() {
                Ok(())
            } else {
                Err(Failure::Verification)
            }
        }
        Command::Sweep { config, param, values } => sweep(config, g, param, values),
        Command::Oracle { config } => {
            let exp = load(config, g, None)?;
            let report = exp.oracle()?;
            let text = serde_json::to_string_pretty(&report).map_err(|e| Failure::Runtime(e.into()))?;
            println!("{text}");
            Ok(())
        }
    }
}

/// Loads a config, applies CLI overrides and an optional sweep assignment.
fn load(path: &Path, g: &Global, assign: Option<(&str, Value)>) -> Result<Experiment, Failure> {
    let mut src = ConfigSource::load(path)
        .with_context(|| format!("loading {}", path.display()))
        .map_err(Failure::Config)?;
    if let Some(seed) = g.seed {
        src.set("seed", json!(seed)).map_err(|e| Failure::Config(e.into()))?;
    }
    if let Some(n) = g.max_iters {
        src.set("stop.max_iters", json!(n)).map_err(|e| Failure::Config(e.into()))?;
    }
    if let Some((param, value)) = assign {
        src.set(param, value).map_err(|e| Failure::Config(e.into()))?;
    }
    let mut cfg = src.config().map_err(|e| Failure::Config(e.into()))?;
    if let Some(t) = g.tol {
        cfg.stop.conv_tol = t;
        cfg.tolerances = cfg.tolerances.with_conv_tol(t);
    }
    Experiment::new(cfg).map_err(|e| Failure::Config(e.into()))
}

fn sweep(config: &Path, g: &Global, param: &str, values: &[String]) -> Result<(), Failure> {
    let parsed: Vec<Value> = values
        .iter()
        .map(|v| serde_json::from_str(v.trim()).with_context(|| format!("sweep value {v:?} is not JSON")))
        .collect::<anyhow::Result<_>>()
        .map_err(Failure::Config)?;
    let experiments = parsed
        .iter()
        .map(|v| load(config, g, Some((param, v.clone()))))
        .collect::<Result<Vec<_>, _>>()?;

    let dir = g.out.clone();
    let rows: Vec<Result<String, Failure>> = experiments
        .par_iter()
        .zip(&parsed)
        .enumerate()
        .map(|(i, (exp, value))| {
            let outcome = exp.execute()?;
            let mut exp = exp.clone();
            let stem = exp.config.output.stem.clone().unwrap_or_else(|| exp.name());
            exp.config.output.stem = Some(format!("{stem}.sweep{i}"));
            exp.write_outputs(&outcome, dir.as_deref())?;
            let s = &outcome.summary;
            let worst = s.final_residuals.iter().copied().fold(0.0, f64::max);
            Ok(format!(
                "{:<16} {:>8} {:>9} {:>12.3e} {:>12} {:>12}",
                value.to_string(),
                s.iters,
                s.converged,
                worst,
                s.fejer_min_slack.map_or("-".into(), |v| format!("{v:.3e}")),
                s.phi_final.map_or("-".into(), |v| format!("{v:.6}")),
            ))
        })
        .collect();
    if !g.quiet {
        println!(
            "{:<16} {:>8} {:>9} {:>12} {:>12} {:>12}",
            param, "iters", "converged", "max_resid", "fejer_min", "phi_final"
        );
    }
    let mut first_err = None;
    for row in rows {
        match row {
            Ok(line) if !g.quiet => println!("{line}"),
            Ok(_) => {}
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    first_err.map_or(Ok(()), Err)
}
