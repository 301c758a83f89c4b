use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod config;
mod design;
mod error;
mod output;
mod run;

#[derive(Debug, Parser)]
#[command(
    name = "laguerre",
    version,
    about = "Recursive polynomial smoothing filters and a dim-target enhancement pipeline"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print difference-equation coefficients and design metrics.
    Design(design::DesignArgs),
    /// Write frequency and impulse responses as CSV.
    Response(design::ResponseArgs),
    /// Generate a synthetic scenario.
    Simulate(run::SimulateArgs),
    /// Generate (or load) frames and run the two-stage pipeline.
    Run(run::RunArgs),
    /// Repeat runs over a list of values for one config field.
    Sweep(run::SweepArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Design(a) => design::design(a),
        Command::Response(a) => design::response(a),
        Command::Simulate(a) => run::simulate(a),
        Command::Run(a) => run::run(a),
        Command::Sweep(a) => run::sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
