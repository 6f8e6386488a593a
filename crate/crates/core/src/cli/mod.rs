//! Command-line harness: `eval` prints one record for a single function
//! value, `verify` runs a suite of checks. Records go to stdout as JSON lines
//! (or CSV with `--csv`), the summary and diagnostics to stderr.
//!
//! Exit codes: 0 pass, 1 check failure, 2 usage or domain error.

pub mod args;
pub mod draws;
pub mod eval;
pub mod report;
pub mod verify;

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;

pub use args::{Cli, Command, EvalTarget, RunConfig, Suite, PRECISION_ENV};
pub use eval::cmd_eval;
pub use report::Record;
pub use verify::cmd_verify;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Domain(#[from] crate::Error),
}

/// Parses `args`, runs the command and returns the exit code.
pub fn run<I, T>(args: I, env_precision: Option<&str>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_PASS
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
            return code;
        }
    };
    match execute(&cli, env_precision, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn execute(cli: &Cli, env_precision: Option<&str>, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let io = |e: std::io::Error| CliError::Usage(format!("cannot write output: {e}"));
    match &cli.command {
        Command::Eval(e) => {
            let cfg = RunConfig::resolve(&cli.global, Some(e), None, env_precision)?;
            let record = cmd_eval(e.target, &cfg)?;
            report::write_records(std::slice::from_ref(&record), cfg.csv, out).map_err(io)?;
            if let Some(d) = &record.detail {
                let _ = writeln!(err, "note: {d}");
            }
            Ok(if record.pass { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Verify(v) => {
            let cfg = RunConfig::resolve(&cli.global, None, v.m.as_deref(), env_precision)?;
            let records = cmd_verify(v.suite, &cfg)?;
            report::write_records(&records, cfg.csv, out).map_err(io)?;
            report::summarize(v.suite.name(), &records, err).map_err(io)?;
            Ok(if records.iter().all(|r| r.pass) { EXIT_PASS } else { EXIT_FAIL })
        }
    }
}
