//! `ringjsa` — simulate, synthesize, reconstruct and report on ring-resonator
//! joint spectral amplitudes.
//!
//! Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.

mod commands;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ringjsa::config::FilterPreset;
use ringjsa::SeedOrder;

#[derive(Debug, Parser)]
#[command(
    name = "ringjsa",
    version,
    about = "Stimulated-emission tomography of ring-resonator photon pairs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate the ring and reference-waveguide truth JSAs.
    Simulate(SimulateArgs),
    /// Synthesize a measurement campaign from a truth directory.
    Synthesize(SynthesizeArgs),
    /// Reconstruct the complex JSA from a measurement directory.
    Reconstruct(ReconstructArgs),
    /// Compute Schmidt numbers and fidelities and render heatmaps.
    Report(ReportArgs),
}

/// Overrides applied on top of the configuration file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Top-level RNG seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write expected values instead of Poisson samples.
    #[arg(long)]
    pub noiseless: bool,
    /// Resonance order of the seed laser: +1 or -1.
    #[arg(long, allow_hyphen_values = true)]
    pub seed_order: Option<SeedOrder>,
    /// Detection filter preset: on-chip, off-chip or ideal.
    #[arg(long)]
    pub filter: Option<FilterPreset>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Run configuration (TOML). Built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory [default: <output_dir>/truth].
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
    /// Pump intensity FWHM in pm.
    #[arg(long)]
    pub pump_bandwidth: Option<f64>,
    /// Pixels per grid point in preview images.
    #[arg(long, default_value_t = 2)]
    pub scale: usize,
}

#[derive(Debug, Args)]
pub struct SynthesizeArgs {
    /// Truth directory written by `simulate`.
    #[arg(long)]
    pub truth: PathBuf,
    /// Run configuration [default: <truth>/run.toml].
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory [default: <output_dir>/measurement].
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// Measurement directory written by `synthesize`.
    #[arg(long)]
    pub measurement: PathBuf,
    /// Output directory [default: sibling `result` of the measurement].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fringe significance (standard errors) required for a valid point.
    #[arg(long)]
    pub snr_threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Result directory written by `reconstruct`.
    #[arg(long)]
    pub result: PathBuf,
    /// Truth directory; fidelities are skipped when absent or unreadable.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Measurement directory, required for Monte-Carlo error bars.
    #[arg(long)]
    pub measurement: Option<PathBuf>,
    /// Monte-Carlo trials (0 disables; otherwise at least 2).
    #[arg(long, default_value_t = 0)]
    pub trials: usize,
    /// Monte-Carlo seed.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Output directory [default: the result directory].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Pixels per grid point in heatmaps.
    #[arg(long, default_value_t = 16)]
    pub scale: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Simulate(a) => commands::simulate(&a),
        Command::Synthesize(a) => commands::synthesize(&a),
        Command::Reconstruct(a) => commands::reconstruct(&a),
        Command::Report(a) => commands::report(&a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 3 })
        }
    }
}
