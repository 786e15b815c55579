//! `qspace`: batch front end for the Q-space and predual toolkit.

mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::Common;
use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "qspace", version, about = "Wavelet Q-space norms, predual scans and Riesz diagnostics")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Wavelet coefficients of a sampled function.
    Analyze(commands::AnalyzeArgs),
    /// Grid samples from a coefficient file.
    Synthesize(commands::SynthesizeArgs),
    /// Norm report for a coefficient file.
    Norms(commands::NormsArgs),
    /// Micro-local block solves.
    Microlocal(commands::MicrolocalArgs),
    /// Riesz transform matrix and its decay check.
    Riesz(commands::RieszArgs),
    /// Partial sums of the unbounded-Riesz example.
    Counterexample(commands::CounterexampleArgs),
    /// Quick built-in consistency checks.
    Selftest,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let c = &cli.common;
    let out = match &cli.command {
        Command::Analyze(a) => commands::analyze(c, a)?,
        Command::Synthesize(a) => commands::synthesize(c, a)?,
        Command::Norms(a) => commands::norms(c, a)?,
        Command::Microlocal(a) => commands::microlocal(c, a)?,
        Command::Riesz(a) => commands::riesz(c, a)?,
        Command::Counterexample(a) => commands::counterexample(c, a)?,
        Command::Selftest => {
            return if commands::selftest(c)? {
                Ok(())
            } else {
                Err(CliError::Numeric("selftest failed".into()))
            };
        }
    };
    for p in out.written() {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qspace: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
