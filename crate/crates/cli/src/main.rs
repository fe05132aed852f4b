//! Command-line front end for the 2D obstacle-scattering laboratory.

mod config;
mod pipeline;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use config::{ConfigDocument, Overrides};
use lsm2d_core::farfield;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "lsm2d",
    version,
    about = "Sound-soft obstacle scattering in 2D: synthetic far-field data and linear-sampling identification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble a far-field matrix and save it to a text file
    Forward {
        /// Configuration document (TOML); flags override its fields
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
        /// Destination matrix file
        #[arg(long)]
        out: PathBuf,
    },
    /// Reciprocity and unitarity report for a saved matrix
    Check {
        /// Matrix file produced by `forward` (or `run`)
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Indicator-field sweep: field CSV, minima report, metadata
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Tikhonov density sweep at the configured sampling points
    Density {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Full pipeline: data, degradations, sweep and density experiments
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn load(config: &Option<PathBuf>, overrides: &Overrides) -> Result<config::Experiment> {
    let doc = match config {
        Some(path) => ConfigDocument::from_path(path)?,
        None => ConfigDocument::default(),
    };
    let doc = overrides.apply(doc)?;
    Ok(config::validate(&doc)?)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Forward { config, overrides, out } => {
            let exp = load(&config, &overrides)?;
            if exp.scatterer.is_none() {
                bail!("config field `scatterer`: forward assembly needs at least one component");
            }
            let matrix = pipeline::obtain_matrix(&exp)?;
            farfield::save_matrix(&matrix, &out)
                .with_context(|| format!("saving {}", out.display()))?;
            println!(
                "wrote {} ({}x{} entries, k = {}, provenance {})",
                out.display(),
                matrix.n(),
                matrix.n(),
                matrix.k(),
                matrix.provenance()
            );
            Ok(())
        }
        Command::Check { matrix } => {
            let m = farfield::load_matrix(&matrix)
                .with_context(|| format!("loading {}", matrix.display()))?;
            println!("matrix: N = {}, k = {}, provenance = {}", m.n(), m.k(), m.provenance());
            match farfield::check_reciprocity(&m) {
                Ok(r) => println!("reciprocity residual: {r:.6e}"),
                Err(e) => println!("reciprocity residual: unavailable ({e})"),
            }
            match farfield::scattering_matrix_unitarity(&m) {
                Ok(r) => println!("unitarity residual:   {r:.6e}"),
                Err(e) => println!("unitarity residual:   unavailable ({e})"),
            }
            Ok(())
        }
        Command::Sweep { config, overrides } => {
            let exp = load(&config, &overrides)?;
            let path = pipeline::execute(&exp, pipeline::Stages { sweep: true, density: false })?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Density { config, overrides } => {
            let exp = load(&config, &overrides)?;
            if exp.density_points.is_empty() {
                bail!("config field `density_points`: at least one sampling point is required (flag --density-point x,y)");
            }
            let path = pipeline::execute(&exp, pipeline::Stages { sweep: false, density: true })?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Run { config, overrides } => {
            let exp = load(&config, &overrides)?;
            let path = pipeline::execute(&exp, pipeline::Stages { sweep: true, density: true })?;
            println!("wrote {}", path.display());
            Ok(())
        }
    }
}
