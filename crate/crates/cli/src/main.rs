mod analyze;
mod experiment;
mod factorize;
mod filter;

use std::io::{self, Write};
use std::path::Path;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

/// Degree of separability analysis and factored filtering for discrete
/// dynamic Bayesian networks.
#[derive(Debug, Parser)]
#[command(name = "dbnsep", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Degree of separability of one conditional probability table.
    Analyze(analyze::Args),
    /// Exact and factored filtering along an observation sequence.
    Filter(filter::Args),
    /// Reproducible Monte-Carlo experiments written as CSV.
    Experiment(experiment::Args),
    /// Rank factorizations of a model by the separability of its CPDs.
    Factorize(factorize::Args),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Csv,
}

/// Exit status for unreadable or invalid input.
const INVALID_INPUT: u8 = 2;

pub fn read_input(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read `{}`", path.display()))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<dbnsep::Error>() {
            return match e {
                dbnsep::Error::Internal(_) => 1,
                _ => INVALID_INPUT,
            };
        }
        if cause.downcast_ref::<io::Error>().is_some() {
            return INVALID_INPUT;
        }
    }
    1
}

fn is_broken_pipe(err: &anyhow::Error) -> bool {
    err.chain().any(|c| {
        let io = c
            .downcast_ref::<io::Error>()
            .or_else(|| match c.downcast_ref::<dbnsep::Error>() {
                Some(dbnsep::Error::Io(e)) => Some(e),
                _ => None,
            });
        io.is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = match cli.command {
        Command::Analyze(a) => analyze::run(&a, &mut out),
        Command::Filter(a) => filter::run(&a, &mut out),
        Command::Experiment(a) => experiment::run(&a, &mut out),
        Command::Factorize(a) => factorize::run(&a, &mut out),
    };
    let _ = out.flush();
    match result {
        Ok(code) => code,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
