//! Config-driven experiment runner.
//!
//! Subcommands: `simulate`, `ch-sweep`, `reliability`, `approximant`,
//! `verify`. Each reads a TOML config, runs deterministically for a fixed
//! seed, and writes `results.csv` plus `summary.json` into the output
//! directory. Exit codes: 0 success, 1 check or numerical failure,
//! 2 usage/config error.

mod config;
mod output;
mod runner;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use config::ExperimentConfig;
use runner::RunOutcome;

#[derive(Parser)]
#[command(name = "qmeasure", version, about = "Finite quantum measurement laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Diagnostics of a random coupled model over a time grid.
    Simulate(RunArgs),
    /// Spin-chain measurement-error sweep over chain lengths.
    #[command(name = "ch-sweep")]
    ChSweep(RunArgs),
    /// Misread probabilities over a (sites, bands) grid.
    Reliability(RunArgs),
    /// Spectral approximant and rational readouts of a random proxy.
    Approximant(RunArgs),
    /// Structural checks of the coefficient tensor.
    Verify(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the TOML experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for results.csv and summary.json.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for independent sweep points.
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Simulate(a) => ("simulate", a),
        Command::ChSweep(a) => ("ch-sweep", a),
        Command::Reliability(a) => ("reliability", a),
        Command::Approximant(a) => ("approximant", a),
        Command::Verify(a) => ("verify", a),
    };

    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    let config = match ExperimentConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: cannot parse {}:\n{e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    if let Err(e) = config.validate(kind) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let seed = args.seed.unwrap_or(config.seed);
    if args.threads == 0 {
        eprintln!("error: --threads must be at least 1");
        return ExitCode::from(2);
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build()
        .expect("thread pool");

    let start = Instant::now();
    let mut check_failures = 0usize;
    let mut checks_json = None;
    let outcome = pool.install(|| match kind {
        "simulate" => runner::run_simulate(config.simulate.as_ref().unwrap(), seed),
        "ch-sweep" => runner::run_ch_sweep(config.ch_sweep.as_ref().unwrap()),
        "reliability" => runner::run_reliability(config.reliability.as_ref().unwrap()),
        "approximant" => runner::run_approximant(config.approximant.as_ref().unwrap(), seed),
        "verify" => match verify::run_checks(config.verify.as_ref().unwrap(), seed) {
            Ok(checks) => {
                for c in &checks {
                    let verdict = if c.passed { "PASS" } else { "FAIL" };
                    println!(
                        "[{verdict}] {} (worst {:.3e}, tolerance {:.1e})",
                        c.name, c.worst, c.tolerance
                    );
                }
                check_failures = checks.iter().filter(|c| !c.passed).count();
                checks_json = Some(serde_json::to_value(&checks).expect("checks"));
                RunOutcome {
                    table: None,
                    summary_extra: serde_json::json!({}),
                    error: None,
                }
            }
            Err(e) => RunOutcome {
                table: None,
                summary_extra: serde_json::json!({}),
                error: Some(e.to_string()),
            },
        },
        _ => unreachable!("validated kind"),
    });
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;

    let mut summary = serde_json::json!({
        "schema": config::SCHEMA,
        "kind": kind,
        "seed": seed,
        "threads": args.threads,
        "config_hash": config.stable_hash(),
        "version": env!("CARGO_PKG_VERSION"),
        "wall_time_ms": wall_time_ms,
    });
    let map = summary.as_object_mut().unwrap();
    if let serde_json::Value::Object(extra) = outcome.summary_extra {
        for (k, v) in extra {
            map.insert(k, v);
        }
    }
    if let Some(checks) = checks_json {
        map.insert("checks".to_string(), checks);
        map.insert(
            "passed".to_string(),
            serde_json::Value::Bool(check_failures == 0),
        );
    }
    if let Some(error) = &outcome.error {
        map.insert(
            "error".to_string(),
            serde_json::Value::String(error.clone()),
        );
        eprintln!("error: {error} (partial results flushed)");
    }

    if let Err(e) = output::write_outputs(&args.out, outcome.table.as_ref(), &summary) {
        eprintln!("error: cannot write outputs to {}: {e}", args.out.display());
        return ExitCode::from(2);
    }

    if outcome.error.is_some() || check_failures > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
