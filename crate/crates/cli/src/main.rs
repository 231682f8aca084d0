//! `qskew`: seeded, reproducible batch runs of the laboratory.

mod commands;
mod config;
mod output;
mod suites;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use config::{CommandName, Format, RunConfig};
use output::{report_failures, write_cells, write_json, write_text, Sidecar};

/// Invalid invocation or configuration; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser, Debug)]
#[command(name = "qskew", version, about = "Skew information and quantum Sobolev inequality laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Replaces the configured seed list with a single seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Slack tolerance applied to every hard and soft check.
    #[arg(long = "slack-tol", global = true)]
    slack_tol: Option<f64>,
    /// Report format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every proved-inequality suite; exit 1 on any hard failure.
    Verify,
    /// Information batches, one-dimensional Schatten ratio tables and conjecture statistics.
    Sweep,
    /// Search for a skew-information uncertainty violation.
    Search {
        #[arg(long)]
        objective: Option<String>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        restarts: Option<usize>,
    },
    /// Re-evaluate a stored search result.
    Replay {
        /// Path to a `result.json` written by `search`.
        path: PathBuf,
    },
    /// Print the inequality constants.
    Constants {
        /// Phase-space dimension for the Sobolev constants.
        #[arg(long, default_value_t = 2)]
        d: usize,
    },
}

impl Command {
    fn name(&self) -> CommandName {
        match self {
            Command::Verify => CommandName::Verify,
            Command::Sweep => CommandName::Sweep,
            Command::Search { .. } => CommandName::Search,
            Command::Replay { .. } => CommandName::Replay,
            Command::Constants { .. } => CommandName::Constants,
        }
    }
}

fn resolve(cli: &Cli) -> Result<RunConfig, UsageError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seeds = vec![s];
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    if cli.workers.is_some() {
        cfg.workers = cli.workers;
    }
    if cli.slack_tol.is_some() {
        cfg.tolerances.slack_tol = cli.slack_tol;
    }
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    if let Command::Search { objective, dim, budget, restarts } = &cli.command {
        if let Some(o) = objective {
            cfg.search.objective = o.clone();
        }
        if let Some(d) = dim {
            cfg.search.dim = *d;
        }
        if let Some(b) = budget {
            cfg.search.budget = *b;
        }
        if let Some(r) = restarts {
            cfg.search.restarts = *r;
        }
    }
    cfg.validate(cli.command.name())?;
    Ok(cfg)
}

/// Whether every assertion passed.
fn run(cli: &Cli, cfg: &RunConfig) -> Result<bool> {
    match &cli.command {
        Command::Verify => {
            let cells = suites::verify(cfg)?;
            let summary = write_cells(&cfg.out, "verify", &cells, cfg.format)?;
            report_failures(&cells);
            for (suite, s) in &summary.suites {
                let min = s.min_ratio.map_or("-".to_string(), |m| format!("{m:e}"));
                println!("{suite:<18} reports={:<5} hard_failures={:<3} min_ratio={min}", s.reports, s.hard_failures);
            }
            println!("{}", if summary.pass { "PASS" } else { "FAIL" });
            Ok(summary.pass)
        }
        Command::Sweep => {
            let out = suites::sweep(cfg)?;
            let summary = write_cells(&cfg.out, "sweep", &out.cells, cfg.format)?;
            for b in &out.batches {
                write_text(&output::cell_dir(&cfg.out, "info-batch", &b.label).join("batch.csv"), &b.csv())?;
            }
            for e in &out.estimates {
                let dir = output::cell_dir(&cfg.out, "conjecture", &e.constant.name.replace('_', "-"));
                write_text(&dir.join("breakdown.csv"), &e.constant.breakdown_csv())?;
                write_json(&dir.join("summary.json"), e)?;
                let q = e.constant.quantiles;
                println!(
                    "{:<16} samples={:<4} skipped={:<3} max={:.6e} q50={:.6e} q90={:.6e} q99={:.6e}",
                    e.constant.name, e.constant.sample_count, e.constant.skipped, e.constant.max_ratio, q.q50, q.q90, q.q99
                );
            }
            report_failures(&out.cells);
            println!("{}", if summary.pass { "PASS" } else { "FAIL" });
            Ok(summary.pass)
        }
        Command::Search { .. } => {
            let r = commands::search(cfg)?;
            println!(
                "objective={} dim={} seed={} evaluations={} best_ratio={:e} converged={}",
                cfg.search.objective, r.dim, r.seed, r.iterations, r.best_ratio, r.converged
            );
            Ok(true)
        }
        Command::Replay { path } => {
            let o = commands::replay(path)?;
            println!("{}", serde_json::to_string_pretty(&o)?);
            Ok(o.bit_identical && o.path_gap <= commands::REPLAY_PATH_TOL)
        }
        Command::Constants { d } => {
            print!("{}", commands::constants(cfg, *d)?);
            Ok(true)
        }
    }
}

fn is_usage(e: &anyhow::Error) -> bool {
    if e.downcast_ref::<UsageError>().is_some() {
        return true;
    }
    matches!(
        e.downcast_ref::<qskew_core::Error>(),
        Some(
            qskew_core::Error::InvalidArgument(_)
                | qskew_core::Error::ExponentMismatch { .. }
                | qskew_core::Error::MemoryCap { .. }
                | qskew_core::Error::InvalidRank { .. }
        )
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match resolve(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("qskew: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(w) = cfg.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("qskew: {e}");
            return ExitCode::from(2);
        }
    }
    let sidecar = Sidecar::start();
    let outcome = run(&cli, &cfg);
    let writes_outputs = outcome.is_ok() && !matches!(cli.command, Command::Replay { .. });
    if writes_outputs {
        if let Err(e) = sidecar.finish(&cfg.out, &format!("{:?}", cli.command.name()).to_lowercase()) {
            eprintln!("qskew: {e:#}");
        }
    }
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("qskew: {e:#}");
            ExitCode::from(if is_usage(&e) { 2 } else { 1 })
        }
    }
}
