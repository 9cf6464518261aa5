//! `qusense`: batch runner for the measurement-sequence simulator.

mod commands;
mod config;
mod csvio;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use clap::{Parser, Subcommand};
use qusense_core::checks::Fault;
use qusense_core::Error as CoreError;
use serde_json::json;

use config::{ConfigError, RunConfig};

#[derive(Parser)]
#[command(name = "qusense", version, about = "Correlation spectroscopy of a target spin by sequential weak measurement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of shard workers (overrides the config).
    #[arg(long, global = true)]
    shards: Option<usize>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, env = "QUSENSE_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the invariant suite and print a JSON report.
    Validate {
        /// Perturb the M_z channel by this amount (for testing the suite itself).
        #[arg(long, hide = true)]
        inject_fault: Option<f64>,
    },
    /// Monte Carlo shot records and estimated correlations.
    Simulate,
    /// Exact or closed-form correlations.
    Exact,
    /// Fourier transforms of correlation series.
    Spectrum,
    /// Acquisition-time plan over a grid of noise levels.
    Plan,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Simulate => "simulate",
            Command::Exact => "exact",
            Command::Spectrum => "spectrum",
            Command::Plan => "plan",
        }
    }
}

/// Exit codes: 0 ok, 1 invariant failure, 2 configuration error.
fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<CoreError>() {
        Some(CoreError::InvalidParameter { .. })
        | Some(CoreError::SeriesTooShort { .. })
        | Some(CoreError::ScheduleTooShort { .. })
        | Some(CoreError::EstimateOnly) => 2,
        _ => 1,
    }
}

fn effective_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => config::load(path)?,
        None => RunConfig {
            shards: 1,
            ..RunConfig::default()
        },
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(shards) = cli.shards {
        cfg.shards = shards;
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig) -> Result<&Path> {
    let dir = cfg
        .out
        .as_deref()
        .ok_or_else(|| config::bad("out: no output directory (use --out)"))?;
    std::fs::create_dir_all(dir)?;
    Ok(dir)
}

fn run(cli: &Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(config::bad("threads: must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let start = Instant::now();
    if let Command::Validate { inject_fault } = &cli.command {
        let out = match &cli.out {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                Some(dir.as_path())
            }
            None => None,
        };
        let fault = Fault {
            mz_coupling: inject_fault.unwrap_or(0.0),
        };
        let (report, _) = commands::validate(fault, out)?;
        println!("{}", serde_json::to_string_pretty(&report)?);
        for c in report.checks.iter().filter(|c| !c.passed) {
            eprintln!("FAILED {}: {}", c.name, c.detail);
        }
        return Ok(report.passed);
    }

    let cfg = effective_config(cli)?;
    let out = out_dir(&cfg)?;
    let outcome = match cli.command {
        Command::Simulate => commands::simulate(&cfg, out)?,
        Command::Exact => commands::exact(&cfg, out)?,
        Command::Spectrum => commands::spectrum(&cfg, out)?,
        Command::Plan => commands::plan(&cfg, out)?,
        Command::Validate { .. } => unreachable!(),
    };
    let summary = json!({
        "command": cli.command.name(),
        "config": cfg,
        "threads": rayon::current_num_threads(),
        "wall_time_s": start.elapsed().as_secs_f64(),
        "outputs": outcome.outputs,
        "details": outcome.details,
    });
    std::fs::write(out.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    eprintln!("wrote {} ({:.2} s)", out.display(), start.elapsed().as_secs_f64());
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
