//! Command-line front end of the mirrormodes simulator: configuration,
//! catalogs, data exports and plots.

pub mod catalog;
pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod export;
pub mod plot;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;

pub use error::{CliError, CliResult};

/// Parses `argv`, runs the command and returns the process exit code:
/// 0 on success, 1 on a domain or I/O failure, 2 on a usage error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match cli::Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    match commands::dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
