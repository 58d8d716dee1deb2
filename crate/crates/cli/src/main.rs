//! `quatflow`: pseudo-spectral simulation of quaternion-valued
//! incompressible flow on a periodic torus, with Littlewood-Paley band
//! diagnostics, Besov norms and trajectory analysis.

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use quatflow_cli::commands::{analyze, decompose, norms, simulate};
use quatflow_cli::error::{EXIT_BLOW_UP, EXIT_ERROR, EXIT_OK};

#[derive(Parser)]
#[command(
    name = "quatflow",
    version,
    about = "Quaternion-field flow solver and Littlewood-Paley/Besov analysis toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation from a config file or preset.
    Simulate(simulate::SimulateArgs),
    /// Per-band energy table of a field snapshot (CSV).
    Decompose(decompose::DecomposeArgs),
    /// L^p and Besov norms of a field snapshot.
    Norms(norms::NormsArgs),
    /// Scaling-fit and Gronwall reports for a diagnostics stream.
    Analyze(analyze::AnalyzeArgs),
}

fn setup_threads() {
    if let Ok(value) = std::env::var("QUATFLOW_THREADS") {
        match value.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
            _ => eprintln!("ignoring QUATFLOW_THREADS={value}: not a positive integer"),
        }
    }
}

fn main() -> ExitCode {
    setup_threads();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Simulate(args) => simulate::run(args).map(|status| match status {
            simulate::SimulateStatus::Completed => EXIT_OK,
            simulate::SimulateStatus::BlowUp => EXIT_BLOW_UP,
        }),
        Command::Decompose(args) => decompose::run(args).map(|()| EXIT_OK),
        Command::Norms(args) => norms::run(args).map(|()| EXIT_OK),
        Command::Analyze(args) => analyze::run(args).map(|()| EXIT_OK),
    };
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
