//! Command-line toolkit for the spin/optical model: level diagrams, polarized
//! line patterns and spectra, photophysics tables, dispersive EPR sweeps and
//! fits, parameter estimation, and transduction figures of merit.

mod commands;
mod ingest;
mod manifest;
mod quantity;

use anyhow::Result;
use clap::{Parser, Subcommand};
use std::path::PathBuf;

use kramers::profile::MaterialProfile;
use manifest::ManifestBuilder;

#[derive(Debug, Parser)]
#[command(
    name = "kramers",
    version,
    about = "Spin and optical physics of Kramers ions in uniaxial crystals"
)]
struct Cli {
    /// Material profile JSON; the bundled reference profile when omitted.
    #[arg(long, global = true)]
    profile: Option<PathBuf>,

    /// Output directory for generated files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Output format for tabular data.
    #[arg(long, global = true, default_value = "csv", value_parser = ["csv", "json"])]
    format: String,

    /// Seed for any synthetic-noise generation.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Zeeman or hyperfine level diagram versus bias field.
    Levels(commands::LevelsArgs),
    /// Optical line patterns and transmission spectra.
    #[command(subcommand)]
    Optical(commands::OpticalCommand),
    /// Oscillator strengths, dipole moments and radiative rates.
    #[command(subcommand)]
    Photo(commands::PhotoCommand),
    /// Dispersive EPR sweeps and fits.
    #[command(subcommand)]
    Epr(commands::EprCommand),
    /// Parameter estimation from measured traces.
    #[command(subcommand)]
    Fit(commands::FitCommand),
    /// Transduction figures of merit.
    #[command(subcommand)]
    Fom(commands::FomCommand),
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let profile = match &cli.profile {
        Some(path) => MaterialProfile::load(path)?,
        None => MaterialProfile::bundled(),
    };
    std::fs::create_dir_all(&cli.out)?;
    let mut manifest = ManifestBuilder::new(
        std::env::args().collect(),
        cli.profile
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| format!("bundled:{}", profile.name)),
        cli.format.clone(),
        cli.seed,
    );

    let ctx = commands::Context {
        profile,
        out: cli.out.clone(),
        json: cli.format == "json",
        seed: cli.seed,
    };
    match cli.command {
        Command::Levels(args) => commands::levels(&ctx, &args, &mut manifest)?,
        Command::Optical(cmd) => commands::optical(&ctx, cmd, &mut manifest)?,
        Command::Photo(cmd) => commands::photo(&ctx, cmd, &mut manifest)?,
        Command::Epr(cmd) => commands::epr(&ctx, cmd, &mut manifest)?,
        Command::Fit(cmd) => commands::fit(&ctx, cmd, &mut manifest)?,
        Command::Fom(cmd) => commands::fom(&ctx, cmd, &mut manifest)?,
    }

    let manifest_path = manifest.write(&cli.out)?;
    println!("manifest: {}", manifest_path.display());
    Ok(())
}
