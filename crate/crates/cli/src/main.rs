//! `wqc`: verification checks, noise-robustness sweeps and sequence listings.
//!
//! Exit status: 0 on success, 1 when a verification check fails, 2 on usage,
//! configuration or I/O errors.

mod config;
mod svg;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use wqc::analysis::{robustness_sweep, ProtocolSet};
use wqc::sequences::{bch_sequence, select_tau, serial_swap_sequence};
use wqc::verification::run_check;

use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(
    name = "wqc",
    version,
    about = "Cross-node spin coupling channel simulator"
)]
struct Cli {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory, overriding `outputs.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Number of sweep points, overriding `sweep.points`.
    #[arg(long, global = true)]
    points: Option<usize>,

    /// Reserved. All computations are deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the configured self-checks and write `verify_report.txt`.
    Verify,
    /// Sweep T1 = T2 and write `sweep.csv` and `sweep.svg`.
    Sweep,
    /// Print the segments of a pulse sequence.
    DumpSequence {
        #[arg(value_enum)]
        which: Which,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Which {
    Wqc,
    Swap,
}

enum Outcome {
    Ok,
    ChecksFailed,
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(dir) = &cli.out {
        cfg.output_dir = dir.clone();
    }
    if let Some(n) = cli.points {
        anyhow::ensure!(n > 0, "--points must be at least 1");
        cfg.sweep.points = n;
    }
    Ok(cfg)
}

fn write_output(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

fn cmd_verify(cfg: &RunConfig) -> Result<Outcome> {
    let mut report = String::new();
    let mut all = true;
    for &check in &cfg.checks {
        let o = run_check(check, &cfg.system, &cfg.noise);
        info!("{o}");
        all &= o.passed;
        report.push_str(&o.to_string());
        report.push('\n');
    }
    print!("{report}");
    let path = write_output(&cfg.output_dir, "verify_report.txt", &report)?;
    info!("wrote {}", path.display());
    Ok(if all {
        Outcome::Ok
    } else {
        Outcome::ChecksFailed
    })
}

fn cmd_sweep(cfg: &RunConfig) -> Result<Outcome> {
    let grid = cfg.sweep.grid()?;
    let mut protocols = ProtocolSet::standard(&cfg.system)?;
    protocols.fidelity = cfg.sweep.fidelity;
    let result = robustness_sweep(&cfg.system, &grid, &protocols)?;
    for f in &result.failures {
        eprintln!("warning: point t = {:.11e} failed: {}", f.t, f.message);
    }
    let csv = write_output(&cfg.output_dir, "sweep.csv", &result.to_csv())?;
    let plot = write_output(
        &cfg.output_dir,
        "sweep.svg",
        &svg::render(&result, cfg.system.rabi),
    )?;
    println!("{} points", result.points.len());
    println!("csv {}", csv.display());
    println!("svg {}", plot.display());
    Ok(Outcome::Ok)
}

fn cmd_dump_sequence(cfg: &RunConfig, which: Which) -> Result<Outcome> {
    let mut out = std::io::stdout().lock();
    match which {
        Which::Wqc => {
            let tau = select_tau(&cfg.system)?;
            writeln!(out, "{}", bch_sequence(tau)?)?;
            writeln!(out, "# tau_s {tau:.11e}")?;
        }
        Which::Swap => {
            let seq = serial_swap_sequence(&cfg.system)?;
            writeln!(out, "{seq}")?;
            writeln!(out, "# t_hf_s {:.11e}", seq.segments[0].duration)?;
            writeln!(out, "# t_d_s {:.11e}", seq.segments[1].duration)?;
        }
    }
    Ok(Outcome::Ok)
}

fn run(cli: &Cli) -> Result<Outcome> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Verify => cmd_verify(&cfg),
        Command::Sweep => cmd_sweep(&cfg),
        Command::DumpSequence { which } => cmd_dump_sequence(&cfg, *which),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::ChecksFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
