mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::Config;
use output::{RunManifest, Staging};

#[derive(Parser)]
#[command(name = "cpsim", version = env!("CPSIM_CODE_VERSION"), about = "Two-type contact process with spatial priorities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML config file; every key is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, created atomically.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Master seed, overrides `experiment.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for the replica farm (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Replace an existing output directory.
    #[arg(long, global = true)]
    force: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// One construction and two-type trajectory, with a binary dump.
    Simulate,
    /// First-extinction samples, beta_N, KS and the growth fit.
    Extinction,
    /// Edge speed estimate of the half-line process.
    EdgeSpeed,
    /// Per-site N-barrier probabilities.
    Barrier,
    /// The renormalized field Phi/Psi on a window of boxes.
    Renorm,
    /// Extinction statistics plus regeneration and confinement frequencies.
    Meta,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Extinction => "extinction",
            Command::EdgeSpeed => "edge-speed",
            Command::Barrier => "barrier",
            Command::Renorm => "renorm",
            Command::Meta => "meta",
        }
    }
}

#[derive(Debug)]
struct ConfigError(anyhow::Error);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn run(cli: &Cli) -> Result<()> {
    let started = output::unix_now();
    let clock = Instant::now();
    let mut cfg: Config = config::load(cli.config.as_deref(), std::env::vars()).map_err(ConfigError)?;
    if let Some(seed) = cli.seed {
        cfg.experiment.seed = seed;
    }
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let out = Staging::new(&cli.out, cli.force)?;
    let mut files = match cli.command {
        Command::Simulate => commands::simulate(&cfg, &out)?,
        Command::Extinction => commands::extinction(&cfg, &out)?,
        Command::EdgeSpeed => commands::edge_speed(&cfg, &out)?,
        Command::Barrier => commands::barrier(&cfg, &out)?,
        Command::Renorm => commands::renorm(&cfg, &out)?,
        Command::Meta => commands::meta(&cfg, &out)?,
    };
    files.push("manifest.json".into());
    out.json(
        "manifest.json",
        &RunManifest {
            subcommand: cli.command.name().into(),
            config_path: cli.config.clone(),
            output_dir: cli.out.clone(),
            started_unix: started,
            wall_clock_seconds: clock.elapsed().as_secs_f64(),
            code_version: output::CODE_VERSION,
            files,
        },
    )?;
    out.commit()
}

fn error_kind(e: &anyhow::Error) -> &'static str {
    if e.downcast_ref::<ConfigError>().is_some() {
        return "config";
    }
    match e.downcast_ref::<priority_cp::Error>() {
        Some(priority_cp::Error::Capacity { .. }) => "capacity",
        Some(priority_cp::Error::InvalidParameter { .. }) => "invalid_parameter",
        Some(_) => "simulation",
        None if e.downcast_ref::<std::io::Error>().is_some() => "io",
        None => "runtime",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = serde_json::json!({
                "error": error_kind(&e),
                "message": format!("{e:#}").replace('\n', " "),
            });
            eprintln!("{line}");
            ExitCode::from(if error_kind(&e) == "config" { 2 } else { 1 })
        }
    }
}
