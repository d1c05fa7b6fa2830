use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use morawetz_cli::{CommandKind, Invocation};

/// Certification, constants, and evolution driver for a Morawetz-type
/// multiplier on the Schwarzschild exterior.
#[derive(Parser)]
#[command(name = "morawetz", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration file; omitted means the built-in defaults.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory, overriding the configured one.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads; overrides the MORAWETZ_THREADS environment variable.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Seed for every randomized draw, overriding the configured one.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Certify the multiplier inequalities, scanning the family parameter
    /// when the configuration pins none.
    Verify(Common),
    /// Tabulate certification margins across the family parameter range.
    #[command(name = "scan-alpha")]
    ScanAlpha(Common),
    /// Compute best constants for the two controlled-quantity estimates.
    Constants(Common),
    /// Evolve one pulse and balance bulk integrals against boundary fluxes.
    Evolve(Common),
    /// Bound the integrated estimate empirically over a random ensemble.
    #[command(name = "check-theorem1")]
    CheckTheorem1(Common),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are successes; anything else is a
            // usage error. The default clap exit code of 2 is reserved here
            // for an inadmissible multiplier parameter.
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0u8,
                _ => 1u8,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let (command, common) = match cli.command {
        Command::Verify(c) => (CommandKind::Verify, c),
        Command::ScanAlpha(c) => (CommandKind::ScanAlpha, c),
        Command::Constants(c) => (CommandKind::Constants, c),
        Command::Evolve(c) => (CommandKind::Evolve, c),
        Command::CheckTheorem1(c) => (CommandKind::CheckTheorem1, c),
    };
    let invocation = Invocation {
        command,
        config_path: common.config,
        out: common.out,
        threads: common.threads,
        seed: common.seed,
    };
    match morawetz_cli::run(&invocation) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
