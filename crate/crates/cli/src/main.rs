//! `cycleguard`: certify limit-cycle hypotheses, find cycles, apply the
//! Conti-Filippov map and scan sign fields from the command line.

mod commands;
mod error;
mod load;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cycleguard::par::Execution;

use crate::error::CliError;

#[derive(Parser)]
#[command(
    name = "cycleguard",
    version,
    about = "Limit-cycle certification and numerics for y-polynomial second-order systems"
)]
struct Cli {
    /// Run every grid loop on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide the uniqueness, boundedness and existence hypotheses.
    Check(commands::check::Args),
    /// Locate limit cycles on the positive x-axis.
    Cycles(commands::cycles::Args),
    /// Push a structured system through the Conti-Filippov map.
    Transform(commands::transform::Args),
    /// Sample a scalar field on a grid and trace its zero set.
    Scan(commands::scan::Args),
    /// Integrate orbits from given starts.
    Portrait(commands::portrait::Args),
    /// List, show or verify the built-in example systems.
    Gallery(commands::gallery::Args),
}

/// Size the global pool from `CYCLEGUARD_THREADS`; a value of 1 also
/// switches to sequential execution.
fn configure_threads(sequential: bool) -> Result<Execution, CliError> {
    let Ok(raw) = std::env::var("CYCLEGUARD_THREADS") else {
        return Ok(if sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        });
    };
    let n: usize = raw.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        CliError::Parse(format!(
            "CYCLEGUARD_THREADS={raw:?} is not a positive integer"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(if sequential || n == 1 {
        Execution::Sequential
    } else {
        Execution::Parallel
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    let exec = configure_threads(cli.sequential)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Check(a) => commands::check::run(&a, exec, &mut out),
        Command::Cycles(a) => commands::cycles::run(&a, exec, &mut out),
        Command::Transform(a) => commands::transform::run(&a, &mut out),
        Command::Scan(a) => commands::scan::run(&a, exec, &mut out),
        Command::Portrait(a) => commands::portrait::run(&a, &mut out),
        Command::Gallery(a) => commands::gallery::run(&a, exec, &mut out),
    }?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) | Err(CliError::ClosedOutput) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cycleguard: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
