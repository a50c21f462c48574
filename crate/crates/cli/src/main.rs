mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

/// Verification and simulation tools for Hopfield networks, the diagonal
/// Ising model and the twisted tetrahedron equation.
#[derive(Debug, Parser)]
#[command(name = "tetra", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON config file; defaults are used for missing fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (reports, CSV) or directory (simulate).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for stochastic commands; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Sweep grid `a:b:n` (t for verify-tte and z-check, β for verify-equivalence).
    #[arg(long, global = true)]
    grid: Option<String>,
    /// TTE convention name (`written-order` or `argument-order`).
    #[arg(long, global = true)]
    convention: Option<String>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Check both tetrahedron equations and the permuted form over a t, γ grid.
    VerifyTte,
    /// Exhaustive Hopfield / diagonal-Ising comparison over a β grid.
    VerifyEquivalence,
    /// Run stochastic trajectories and write CSV logs.
    Simulate,
    /// Realize Z(t) from cube factors and compare with direct enumeration.
    ZCheck,
    /// Print the edge-choice tables and their exchange symmetry.
    Tables,
}

/// Shared flags after parsing.
#[derive(Debug, Clone, Default)]
pub struct Flags {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub grid: Option<String>,
    pub convention: Option<String>,
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("THREADS") {
        let n: usize = v.trim().parse().with_context(|| format!("THREADS={v:?} is not a positive integer"))?;
        anyhow::ensure!(n > 0, "THREADS must be positive");
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    init_threads()?;
    let flags = Flags { config: cli.config, out: cli.out, seed: cli.seed, grid: cli.grid, convention: cli.convention };
    match cli.command {
        Command::VerifyTte => commands::tte::run(&flags),
        Command::VerifyEquivalence => commands::equivalence::run(&flags),
        Command::Simulate => commands::simulate::run(&flags),
        Command::ZCheck => commands::zcheck::run(&flags),
        Command::Tables => commands::tables::run(&flags),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
