//! Command-line frontend: parses convex functions given as expressions in `t`,
//! checks them, runs one operation and prints a JSON or CSV report.

pub mod args;
pub mod commands;
pub mod expr;
pub mod output;
pub mod selftest;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;

use clap::Parser;

use crate::args::{Cli, Format};
use crate::output::Report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Why a command produced no report.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Input(_) => EXIT_INPUT,
            Failure::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) => write!(f, "invalid input: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<convex_enclose::Error> for Failure {
    fn from(e: convex_enclose::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

/// Parses `argv`, runs the command, writes the report to `out` and
/// diagnostics to `err`, and returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let outcome = if cli.self_test {
        selftest::seed_from_env().map(selftest::run)
    } else {
        match &cli.command {
            Some(cmd) => commands::dispatch(cmd, cli.oracle),
            None => Err(Failure::Input(
                "no command given; see --help for the list of commands".into(),
            )),
        }
    };
    match outcome {
        Ok(report) => {
            for w in &report.warnings {
                let _ = writeln!(err, "warning: {w}");
            }
            let _ = out.write_all(render(&report, cli.format).as_bytes());
            if cli.self_test && !selftest::passed(&report) {
                let _ = writeln!(err, "self-test failed");
                return EXIT_NUMERICAL;
            }
            EXIT_OK
        }
        Err(f) => {
            let _ = writeln!(err, "error: {f}");
            f.exit_code()
        }
    }
}

fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Json => output::to_json(report) + "\n",
        Format::Csv => output::to_csv(report),
    }
}
