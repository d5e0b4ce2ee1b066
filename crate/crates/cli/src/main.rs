//! `spinchaos <analysis> --config <file> [--out <dir>] [--seed <u64>]`
//!
//! Exit status: 0 ok, 1 output failure, 2 config error, 3 numeric or
//! contract error, 4 resource cap. `RAYON_NUM_THREADS` sets the thread count.

mod config;
mod error;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::json;

use config::{parse_config, Analysis, Overrides};
use error::CliError;
use output::{sha256_hex, OutputDir};

#[derive(Debug, Parser)]
#[command(name = "spinchaos", version, about = "Exact diagonalization and quantum-chaos diagnostics for dipolar spin systems")]
struct Cli {
    /// Analysis to run.
    analysis: Analysis,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let started = Instant::now();
    let text = std::fs::read_to_string(&cli.config).map_err(|e| {
        CliError::Config(format!("cannot read {}: {e}", cli.config.display()))
    })?;
    let overrides = Overrides {
        analysis: Some(cli.analysis),
        out: cli.out.clone(),
        seed: cli.seed,
    };
    let cfg = parse_config(&text, &overrides)?;
    let mut out = OutputDir::create(&cfg.out)?;
    let summary = run::run(&cfg, &mut out)?;
    let files = out
        .files()
        .iter()
        .map(|name| Ok(json!({"name": name, "sha256": out.sha256(name)?})))
        .collect::<Result<Vec<_>, CliError>>()?;
    let manifest = json!({
        "analysis": cfg.analysis,
        "config_sha256": sha256_hex(text.as_bytes()),
        "config": cfg,
        "seed": cfg.seed,
        "spinchaos_version": env!("CARGO_PKG_VERSION"),
        "threads": std::env::var("RAYON_NUM_THREADS").ok(),
        "files": files,
        "wall_time_seconds": started.elapsed().as_secs_f64(),
    });
    out.json("manifest.json", &manifest)?;
    if let Some(eta) = summary.get("lsi").and_then(|v| v.as_f64()) {
        log::info!("LSI {eta:.4}");
    }
    log::info!("wrote {} files to {}", out.files().len(), out.root().display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spinchaos: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
