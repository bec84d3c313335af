//! `fracpe`: command-line front end of the simulator and the estimate lab.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fracpe::io::{load_config, run, Mode};

/// Environment variable holding the default output directory.
const OUT_DIR_ENV: &str = "FRACPE_OUT_DIR";

#[derive(Parser)]
#[command(name = "fracpe", version, about = "Stochastic primitive equations: simulation and estimate lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one path or an ensemble.
    Simulate(Common),
    /// Two paths from nearby data driven by the same noise.
    Twin(Common),
    /// Resolution sweeps of the commutator and product inequalities.
    VerifyLemmas(Common),
    /// Closed-form check of the one-dimensional corrector pairing.
    #[command(name = "example-1d")]
    Example1d(Common),
    /// Strong and weak discrepancies across time steps.
    Convergence(Common),
    /// Regularity and smallness conditions of the noise.
    CheckNoise(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set sim.rho=10`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, common) = match cli.command {
        Command::Simulate(c) => (Mode::Simulate, c),
        Command::Twin(c) => (Mode::Twin, c),
        Command::VerifyLemmas(c) => (Mode::VerifyLemmas, c),
        Command::Example1d(c) => (Mode::Example1d, c),
        Command::Convergence(c) => (Mode::Convergence, c),
        Command::CheckNoise(c) => (Mode::CheckNoise, c),
    };
    let default_dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
    let outcome = load_config(common.config.as_deref(), mode, &common.overrides).and_then(|cfg| run(&cfg, &default_dir));
    match outcome {
        Ok(o) => {
            eprintln!("{} records written to {}", o.records, o.output.display());
            if o.success() {
                ExitCode::SUCCESS
            } else {
                for f in &o.failures {
                    eprintln!("check failed: {f}");
                }
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
