use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    ExitCode::from(infosep::run(infosep::cli::Cli::parse()))
}
