use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use omidyn::cli::config::Overrides;
use omidyn::cli::run::execute;
use omidyn::cli::Experiment;

/// Dynamics and spectra of a linear-quadratic optomechanical system under
/// pure-dephasing decoherence.
#[derive(Parser)]
#[command(name = "omidyn", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config and the OMIDYN_OUT variable).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also render SVG plots next to the CSV artifacts.
    #[arg(long)]
    svg: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep dressed level energies over coupling grids.
    Eigen(CommonArgs),
    /// Evolve the phonon number and position quadrature over a time grid.
    Dynamics(CommonArgs),
    /// Evaluate the time-dependent spectrum over (omega, t) grids.
    Spectrum(CommonArgs),
    /// Evaluate the long-time spectral limit over an omega grid.
    Longtime(CommonArgs),
    /// Cross-check every closed form against the matrix oracle.
    Verify(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, args) = match cli.command {
        Command::Eigen(a) => (Experiment::Eigen, a),
        Command::Dynamics(a) => (Experiment::Dynamics, a),
        Command::Spectrum(a) => (Experiment::Spectrum, a),
        Command::Longtime(a) => (Experiment::Longtime, a),
        Command::Verify(a) => (Experiment::Verify, a),
    };
    let overrides = Overrides {
        out_dir: args.out,
        svg: args.svg,
    };
    ExitCode::from(execute(&args.config, experiment, &overrides) as u8)
}
