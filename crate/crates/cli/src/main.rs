//! `wavesamp` command-line front end.
//!
//! Every command computes all of its results in memory and only then
//! writes them, each file through a temporary sibling that is renamed into
//! place, so a failing run never leaves partial output behind.

mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use commands::Cli;

/// Exit status and machine-readable description of a failed run.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            kind: "config",
            message: message.into(),
        }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            kind: "numeric",
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            kind: "io",
            message: message.into(),
        }
    }
}

impl From<wavesamp::Error> for CliError {
    fn from(e: wavesamp::Error) -> Self {
        use wavesamp::Error as E;
        match e {
            E::InvalidParameter(_) | E::Scenario(_) | E::LatticeMismatch(_) | E::KernelMismatch(_) => {
                CliError::config(e.to_string())
            }
            E::Io(_) | E::Csv(_) => CliError::io(e.to_string()),
            _ => CliError::numeric(e.to_string()),
        }
    }
}

fn report(e: &CliError) {
    let body = json!({ "error": { "code": e.code, "kind": e.kind, "message": e.message } });
    eprintln!("{body}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            report(&CliError::config(e.to_string().trim_end()));
            return ExitCode::from(2);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e);
            ExitCode::from(e.code)
        }
    }
}
