//! Command-line driver: resolves a config, runs one experiment and writes a
//! JSON report plus CSV series into the output directory.
//!
//! Exit codes: 0 when every verdict passes (or is vacuous), 1 on a verdict
//! failure, 2 on a configuration or runtime error.

pub mod commands;
pub mod config;

use std::process::ExitCode;

use clap::Parser;

pub use commands::{dispatch, Outcome, RunError};
pub use config::{resolve, Cli, Command, ExperimentConfig};

pub const EXIT_PASS: u8 = 0;
pub const EXIT_VERDICT_FAIL: u8 = 1;
pub const EXIT_ERROR: u8 = 2;

pub fn run_cli<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = match resolve(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_ERROR);
        }
    };
    match dispatch(&cfg) {
        Ok(outcome) => {
            println!("{}: {:?} ({})", label(cfg.command), outcome.verdict, outcome.report_path.display());
            ExitCode::from(if outcome.verdict.passed() { EXIT_PASS } else { EXIT_VERDICT_FAIL })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn label(c: Command) -> String {
    serde_json::to_value(c).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}
