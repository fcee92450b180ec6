//! Experiment runner behind the `hhdr` binary.
//!
//! Every subcommand reads a sectioned config, writes tab-separated tables
//! and a `manifest.json` into the output directory. Exit codes: 0 success,
//! 2 config error, 3 numerical failure, 1 I/O failure.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

use config::{Config, ConfigError, Dim};
use output::OutputDir;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numeric(hhdr::Error),
    #[error("i/o error: {0}")]
    Io(std::io::Error),
}

impl From<hhdr::Error> for CliError {
    fn from(e: hhdr::Error) -> Self {
        use hhdr::Error as E;
        match e {
            E::NonConvergence { .. } | E::BiasFit { .. } | E::NotNormalized(_) | E::EntangledReset | E::SingularPosition(_) => {
                CliError::Numeric(e)
            }
            other => CliError::Config(ConfigError::Other(other.to_string())),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "hhdr", version, about = "Hartmann-Hahn double-resonance experiment runner")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment config (sectioned `key = value` with unit suffixes).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `[bath] seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 or unset uses every core.
    #[arg(long, global = true, env = "HHDR_THREADS")]
    threads: Option<usize>,
    /// Output directory; overrides `[output] dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Scale spin-lock signals by the host-¹⁵N population factor.
    #[arg(long, global = true)]
    contrast_factor: bool,
    /// Rotating-frame relaxation time, e.g. `1 ms`.
    #[arg(long, global = true)]
    t1rho: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Alternating spin-lock map over the (Ω, τ) grid.
    Spectroscopy,
    /// Fourier transform of a map along τ, with coupling overlay curves.
    FourierMap {
        /// Use a previously written `spectroscopy_map.tsv` instead of simulating.
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Hyperfine magnitude and orientation from a measured (Ω_opt, J).
    Invert {
        #[arg(long = "omega-opt")]
        omega_opt: Option<String>,
        #[arg(long)]
        j: Option<String>,
        /// Field magnitude along the NV axis; defaults to `[field] b`.
        #[arg(long)]
        b: Option<String>,
    },
    /// Bath polarization by repeated sweeps, with linewidth snapshots.
    Polarize,
    /// Linewidth versus polarization bias.
    BiasScan,
    /// Smallest resolvable coupling for an interrogation window.
    Sensitivity,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectroscopy => "spectroscopy",
            Command::FourierMap { .. } => "fourier-map",
            Command::Invert { .. } => "invert",
            Command::Polarize => "polarize",
            Command::BiasScan => "bias-scan",
            Command::Sensitivity => "sensitivity",
        }
    }
}

fn load_config(cli: &Cli) -> Result<Config, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError::Other(format!("cannot read {}: {e}", path.display())))?;
            Config::parse(&text)?
        }
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.set("bath", "seed", seed.to_string());
    }
    if cli.contrast_factor {
        cfg.set("drive", "contrast_factor", "true".into());
    }
    if let Some(t) = &cli.t1rho {
        config::parse_quantity_cli(t, Dim::Time)?;
        cfg.set("drive", "t1rho", t.clone());
    }
    Ok(cfg)
}

/// Runs one subcommand and writes its manifest; returns the stdout summary.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let start = Instant::now();
    let cfg = load_config(cli)?;
    let mut extra = format!("command = {}\n", cli.command.name());
    if let Command::Invert { omega_opt, j, b } = &cli.command {
        extra.push_str(&format!("invert = {omega_opt:?} {j:?} {b:?}\n"));
    }
    let digest = cfg.digest(&extra);
    let dir = match (&cli.out, cfg.text("output", "dir")) {
        (Some(p), _) => p.clone(),
        (None, Some(d)) => PathBuf::from(d),
        (None, None) => PathBuf::from("hhdr-out"),
    };
    let mut out = OutputDir::create(&dir).map_err(CliError::Io)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| ConfigError::Other(format!("thread pool: {e}")))?;
    let summary = pool.install(|| {
        let mut ctx = commands::Context { cfg: &cfg, digest: digest.clone(), out: &mut out };
        match &cli.command {
            Command::Spectroscopy => commands::spectroscopy(&mut ctx),
            Command::FourierMap { map } => commands::fourier(&mut ctx, map.as_deref()),
            Command::Invert { omega_opt, j, b } => commands::invert(
                &mut ctx,
                &commands::InvertArgs { omega_opt: omega_opt.as_deref(), j: j.as_deref(), b: b.as_deref() },
            ),
            Command::Polarize => commands::polarize(&mut ctx),
            Command::BiasScan => commands::bias(&mut ctx),
            Command::Sensitivity => commands::sensitivity(&mut ctx),
        }
    })?;

    let outputs: Vec<serde_json::Value> = out
        .files
        .iter()
        .map(|w| serde_json::json!({ "file": w.file, "sha256": w.sha256, "bytes": w.bytes }))
        .collect();
    let manifest = serde_json::json!({
        "artifact": "hhdr",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cli.command.name(),
        "seed": cfg.text("bath", "seed"),
        "config": cfg.echo(),
        "config_sha256": digest,
        "outputs": outputs,
        "wall_time_s": start.elapsed().as_secs_f64(),
    });
    let text = serde_json::to_string_pretty(&manifest).expect("manifest is plain JSON") + "\n";
    std::fs::write(out.path().join("manifest.json"), text).map_err(CliError::Io)?;
    Ok(summary)
}
