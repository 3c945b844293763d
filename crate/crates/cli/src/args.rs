use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ngfiber_core::FrequencyUnit;

use crate::validate::Level;

#[derive(Debug, Clone, Parser)]
#[command(name = "ngfiber", version, about = "Entangled non-Gaussian states in a protected optical fiber")]
pub struct Cli {
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,
    /// Seed for the randomized checks.
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    /// Parameter file (required by `sweep`, optional defaults elsewhere).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Also write a gnuplot script next to the CSV output.
    #[arg(long, global = true)]
    pub emit_plot_script: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Negativity against squeezing.
    Fig1(Fig1Args),
    /// Negativity with and without segment fluctuations against ω_c τ_L.
    Fig2(Fig2Args),
    /// Phase-shifter spacing and timing report for a fiber.
    Design(DesignArgs),
    /// Cross-check the numerics against independent oracles.
    Validate(ValidateArgs),
    /// Evaluate observables over a parameter grid from `--config`.
    Sweep,
}

#[derive(Debug, Clone, Args)]
pub struct Fig1Args {
    /// Photons subtracted.
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    /// Smallest squeezing magnitude.
    #[arg(long, default_value_t = 0.05)]
    pub zeta_min: f64,
    /// Largest squeezing magnitude.
    #[arg(long, default_value_t = 0.85)]
    pub zeta_max: f64,
    /// Number of points.
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Fig2Args {
    /// Photons subtracted.
    #[arg(long)]
    pub p: Option<usize>,
    /// Squeezing magnitude.
    #[arg(long)]
    pub zeta: Option<f64>,
    /// Fluctuation strength, s.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Bath cutoff, rad/s.
    #[arg(long)]
    pub omega_c: Option<f64>,
    /// Largest ω_c τ_L on the grid.
    #[arg(long)]
    pub x_max: Option<f64>,
    /// Number of grid intervals (points = steps + 1).
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct DesignArgs {
    /// Fiber length, m.
    #[arg(long)]
    pub length: Option<f64>,
    /// Group index of the fiber core.
    #[arg(long)]
    pub group_index: Option<f64>,
    /// Bath cutoff, in `--unit`.
    #[arg(long)]
    pub omega_c: Option<f64>,
    /// How to read `--omega-c`: rad/s or Hz.
    #[arg(long, value_enum)]
    pub unit: Option<UnitArg>,
    /// Allowed error probability δ.
    #[arg(long)]
    pub error_budget: Option<f64>,
    /// Spacing Δ, m (the finite-length bound when absent).
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitArg {
    Angular,
    Hertz,
}

impl From<UnitArg> for FrequencyUnit {
    fn from(u: UnitArg) -> Self {
        match u {
            UnitArg::Angular => FrequencyUnit::Angular,
            UnitArg::Hertz => FrequencyUnit::Hertz,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum, default_value_t = Level::Fast)]
    pub level: Level,
}
