//! Batch experiment driver for the `epsdyadic` toolkit.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::Verdict;
use crate::config::{ExperimentConfig, Overrides};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "epsdyadic", version, about = "Dyadic operator experiments on grid functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON experiment config; built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Bank seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Grid depth below the root.
    #[arg(long, global = true)]
    pub depth: Option<u32>,

    /// Spatial dimension.
    #[arg(long, global = true)]
    pub dim: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Diening, ε-Diening and LH∞ reports for the configured exponent.
    CheckConditions,
    /// Fast operators against brute-force enumeration.
    OracleSuite,
    /// Empirical operator-norm ratios over the bank.
    Opnorm,
    /// Truncation errors of the sparse operator.
    Compactness,
    /// Calderón–Zygmund decomposition of one function.
    Cz,
    /// Haar multiplier and sparse domination ratios.
    Haar,
    /// Stopping-time sparse families of the bank.
    Sparse,
}

pub fn execute(command: Command, cfg: &ExperimentConfig) -> anyhow::Result<Verdict> {
    match command {
        Command::CheckConditions => commands::check_conditions(cfg),
        Command::OracleSuite => commands::oracle_suite(cfg),
        Command::Opnorm => commands::opnorm(cfg),
        Command::Compactness => commands::compactness(cfg),
        Command::Cz => commands::cz(cfg),
        Command::Haar => commands::haar(cfg),
        Command::Sparse => commands::sparse(cfg),
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let overrides = Overrides {
        out: cli.out,
        seed: cli.seed,
        depth: cli.depth,
        dim: cli.dim,
    };
    let cfg = match ExperimentConfig::load(cli.config.as_deref(), &overrides) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return EXIT_CONFIG;
        }
    };
    match execute(cli.command, &cfg) {
        Ok(verdict) => {
            for path in &verdict.outputs {
                println!("wrote {path}");
            }
            if verdict.passed() {
                EXIT_PASS
            } else {
                for failure in &verdict.failures {
                    eprintln!("FAIL: {failure}");
                }
                EXIT_ASSERTION
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_CONFIG
        }
    }
}
