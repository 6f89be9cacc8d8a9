//! `gmsens`: synthesise, score, sweep and report.
//!
//! Errors are printed to stderr as a JSON object and exit with status 1.
//! A sweep in which some runs failed exits with status 2.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gmsens_core::commands::{cmd_gof, cmd_report, cmd_sweep, cmd_synth};
use gmsens_core::config::Config;
use gmsens_core::signal::Component;
use gmsens_core::Error;
use serde_json::json;

#[derive(Debug, Parser)]
#[command(name = "gmsens", version, about = "Ground-motion synthesis, goodness of fit and focal-mechanism sweeps")]
struct Cli {
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides GMSENS_OUT and the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps (overrides GMSENS_WORKERS and the config).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Restrict outputs to one component.
    #[arg(long, global = true, value_enum, default_value_t = Which::All)]
    component: Which,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Which {
    Ew,
    Ns,
    Ud,
    All,
}

impl Which {
    fn component(self) -> Option<Component> {
        match self {
            Which::Ew => Some(Component::Ew),
            Which::Ns => Some(Component::Ns),
            Which::Ud => Some(Component::Ud),
            Which::All => None,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesise the scenario mechanism.
    Synth,
    /// Score a synthetic trace against a recorded one.
    Gof { record: PathBuf, synthetic: PathBuf },
    /// Run the focal-mechanism sweep.
    Sweep {
        /// Read per-run waveforms from this directory instead of synthesising.
        #[arg(long)]
        external_runs: Option<PathBuf>,
    },
    /// Render figures and the manifest for a sweep directory.
    Report { run_dir: PathBuf },
}

fn load_config(cli: &Cli) -> Result<Config, Error> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    cfg.apply_env()?;
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(serde_json::Value, bool), Error> {
    let only = cli.component.component();
    match &cli.command {
        Command::Synth => {
            let cfg = load_config(cli)?;
            let path = cmd_synth(&cfg, &cfg.out_dir)?;
            Ok((json!({ "trace": path }), true))
        }
        Command::Gof { record, synthetic } => {
            let cfg = load_config(cli)?;
            let rep = cmd_gof(record, synthetic, &cfg, &cfg.out_dir, only)?;
            let tf: serde_json::Map<String, serde_json::Value> = rep
                .components
                .iter()
                .map(|&c| {
                    let s = rep.scores.tf.get(c);
                    (c.name().to_string(), json!({ "eg": s.eg, "pg": s.pg }))
                })
                .collect();
            Ok((
                json!({
                    "out_dir": cfg.out_dir,
                    "worst_quality": rep.worst_quality,
                    "tf": tf,
                }),
                true,
            ))
        }
        Command::Sweep { external_runs } => {
            let cfg = load_config(cli)?;
            let s = cmd_sweep(&cfg, &cfg.out_dir, external_runs.as_deref(), only)?;
            Ok((
                json!({
                    "out_dir": cfg.out_dir,
                    "runs": s.runs,
                    "completed": s.completed,
                    "failures": s.failures,
                }),
                !s.is_partial(),
            ))
        }
        Command::Report { run_dir } => {
            let out = cli.out.clone().unwrap_or_else(|| run_dir.clone());
            let m = cmd_report(run_dir, &out)?;
            Ok((json!({ "out_dir": out, "files": m.files }), true))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok((summary, complete)) => {
            println!("{summary}");
            if complete {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!(
                "{}",
                json!({ "error": { "kind": e.kind(), "message": e.to_string() } })
            );
            ExitCode::from(1)
        }
    }
}
