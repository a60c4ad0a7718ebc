//! Command-line front end for `infosep-core`.
//!
//! Subcommands:
//!
//! * `measures`: entropy, MI, the built-in f-informations, the σ spectrum,
//!   Gács–Körner and Wyner common information, and IB Lagrangians, as JSON.
//! * `reduce`: collapse an input to its minimal sufficient statistics.
//! * `verify`: compare measures on an input and on its reduction.
//! * `ib-sweep`: IB solutions over a β grid, as CSV.
//!
//! Exit codes: 0 success, 2 unparseable or invalid input, 3 I/O failure,
//! 4 verification failed.

pub mod cli;
pub mod commands;
mod error;
pub mod io;
pub mod report;

pub use error::CliError;

/// Runs a parsed command line, returning the process exit code.
pub fn run(cli: cli::Cli) -> u8 {
    match commands::dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("infosep: {e}");
            e.exit_code()
        }
    }
}
