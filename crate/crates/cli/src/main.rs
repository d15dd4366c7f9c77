//! `gigmix`: simulate GIG mixtures, solve MaxEnt problems, fit mixtures to
//! histograms and compare numbers of components.

/// `println!` that stays quiet when stdout is a closed pipe.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

mod commands;
mod config;
mod error;
mod grid;
mod svg;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{fit, maxent, plotdata, select, simulate};

#[derive(Parser, Debug)]
#[command(name = "gigmix", version, about = "Maximum-entropy GIG mixture modeling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a seeded sample from a mixture spec
    Simulate(simulate::SimulateArgs),
    /// Solve for the MaxEnt density with given arithmetic, geometric and harmonic means
    Maxent(maxent::MaxentArgs),
    /// Fit a k-component mixture to sample data by adaptive MCMC and report the MAP
    Fit(fit::FitArgs),
    /// Estimate the evidence of each candidate k and the posterior over k
    Select(select::SelectArgs),
    /// Emit sub-class density tables or render a fit overlay as SVG
    Plotdata(plotdata::PlotArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate::run(a),
        Command::Maxent(a) => maxent::run(a),
        Command::Fit(a) => fit::run(a),
        Command::Select(a) => select::run(a),
        Command::Plotdata(a) => plotdata::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
