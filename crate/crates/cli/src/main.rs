use std::path::{Path, PathBuf};
use std::process::ExitCode;

use arm_sim::{execute_with_workers, load, worker_count, Command, RunError};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "arm-sim", version, about = "Anisotropic Rabi model spectra, shifts and decay rates")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(clap::Args)]
struct Io {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// CSV destination; overrides output.csv_path, stdout when neither is set.
    #[arg(long)]
    out: Option<PathBuf>,
    /// SVG destination; overrides output.svg_path.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Sub {
    /// Transmission over a probe grid, optionally against omega_q or theta.
    Spectrum(Io),
    /// Vacuum Rabi splitting per slice of the sweep.
    Splitting(Io),
    /// Dispersive shifts and readout peaks against theta.
    Dispersive(Io),
    /// Mixing angle where the exact dispersive shift vanishes.
    SweetSpot(Io),
    /// JC and AJC Purcell rates at equal dispersive shift.
    Purcell(Io),
    /// Model parameters derived from circuit constants.
    Circuit(Io),
    /// A tracked scalar against the Fock truncation.
    Convergence(Io),
}

fn write(path: &Path, text: &str) -> Result<(), RunError> {
    std::fs::write(path, text).map_err(|e| RunError::Io(format!("cannot write {}: {e}", path.display())))
}

fn run(command: Command, io: Io) -> Result<(), RunError> {
    let cfg = load(&io.config)?;
    let out = io.out.or_else(|| cfg.file.output.csv_path.clone());
    let svg = io.svg.or_else(|| cfg.file.output.svg_path.clone());
    let workers = worker_count(cfg.workers)?;
    let result = execute_with_workers(command, &cfg, svg.is_some(), workers)?;
    match &out {
        Some(p) => write(p, &result.csv)?,
        None => print!("{}", result.csv),
    }
    if let (Some(p), Some(text)) = (&svg, &result.svg) {
        write(p, text)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, io) = match cli.command {
        Sub::Spectrum(io) => (Command::Spectrum, io),
        Sub::Splitting(io) => (Command::Splitting, io),
        Sub::Dispersive(io) => (Command::Dispersive, io),
        Sub::SweetSpot(io) => (Command::SweetSpot, io),
        Sub::Purcell(io) => (Command::Purcell, io),
        Sub::Circuit(io) => (Command::Circuit, io),
        Sub::Convergence(io) => (Command::Convergence, io),
    };
    match run(command, io) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.report());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
