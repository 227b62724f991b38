//! `contactless`: verification, analytics, and simulation as reproducible
//! batch runs.
//!
//! Every subcommand writes its artifacts plus a `manifest.json` into the
//! `--out` directory, atomically, and prints a deterministic summary to
//! stdout. All randomness flows from `--seed`; nothing reads clocks or
//! ambient files. Exit codes: 0 success, 1 validation failure, 2 internal
//! error.

mod commands;
mod manifest;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "contactless",
    version,
    about = "Contactless purchasing workflow toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify net structure and reachability (built-in store net by default).
    Verify {
        /// Net description file; defaults to the built-in store net.
        #[arg(long)]
        net: Option<PathBuf>,
        /// Per-message pool multiplicity clamp during exploration.
        #[arg(long, default_value_t = 4)]
        pool_cap: u32,
        /// Hard cap on explored states; the report is partial beyond it.
        #[arg(long, default_value_t = 100_000)]
        node_cap: usize,
        /// Stop expanding states deeper than this many firings.
        #[arg(long)]
        step_bound: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Enumerate source-to-sink traces.
    Traces {
        /// Net description file; defaults to the built-in store net.
        #[arg(long)]
        net: Option<PathBuf>,
        /// Maximum traversals of any cycle.
        #[arg(long, default_value_t = 0)]
        loop_bound: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Integrate the epidemic model and report the analytic quantities.
    Epi {
        /// Scenario file providing the `[epi]` section.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        s0: Option<f64>,
        #[arg(long)]
        i0: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate one store day and log every close contact.
    Store {
        /// Scenario file; defaults to the built-in demo scenario.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Run with the resilience measures on or off.
        #[arg(long, default_value = "on")]
        resilience: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Full pipeline: store day with and without resilience, effective
    /// contact ratio, outbreak comparison.
    Couple {
        /// Scenario file; defaults to the built-in demo scenario.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Failures that reach the user, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad input: unknown flags, unreadable or invalid files, missing seed.
    Validation(String),
    /// Anything that should not happen with valid input.
    Internal(String),
}

impl CliError {
    fn validation(e: impl std::fmt::Display) -> Self {
        CliError::Validation(e.to_string())
    }

    fn internal(e: impl std::fmt::Display) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

/// Die quietly on a closed pipe (`contactless ... | head`) instead of
/// panicking; artifacts are written before any summary is printed.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() -> ExitCode {
    reset_sigpipe();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version are not failures.
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return ExitCode::from(1);
        }
    };

    let result = match cli.command {
        Command::Verify {
            net,
            pool_cap,
            node_cap,
            step_bound,
            out,
        } => {
            let limits = contactless_core::petri::ReachConfig {
                step_bound,
                node_cap,
                pool_cap,
            };
            commands::verify(net.as_deref(), &limits, &out)
        }
        Command::Traces {
            net,
            loop_bound,
            out,
        } => commands::traces(net.as_deref(), loop_bound, &out),
        Command::Epi {
            config,
            gamma,
            alpha,
            s0,
            i0,
            t_end,
            dt,
            out,
        } => commands::epi(
            config.as_deref(),
            commands::EpiFlags {
                gamma,
                alpha,
                s0,
                i0,
                t_end,
                dt,
            },
            &out,
        ),
        Command::Store {
            config,
            seed,
            resilience,
            out,
        } => commands::store(config.as_deref(), seed, &resilience, &out),
        Command::Couple { config, seed, out } => commands::couple(config.as_deref(), seed, &out),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
    }
}
