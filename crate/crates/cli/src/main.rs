//! `piston`: command-line front end for the casimir-piston library.
//!
//! Exit codes: 0 success, 1 computation or acceptance failure (a JSON
//! error object goes to stdout), 2 usage error.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use casimir_piston::PistonError;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use output::Format;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(PistonError),
    Io(String),
    /// The command ran but a reproduction criterion failed; output is
    /// already written.
    Failed,
}

impl From<PistonError> for CliError {
    fn from(e: PistonError) -> Self {
        CliError::Compute(e)
    }
}

#[derive(Debug, Parser)]
#[command(name = "piston", version, about = "Cutoff-regularized Casimir piston energies")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Output format (default json)
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write output here instead of stdout; relative paths resolve against
    /// $PISTON_OUTPUT_DIR when set
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Multiply energy-type results by this value of ħc (e.g. 3.16152677e-26
    /// for J·m with lengths in metres)
    #[arg(long, global = true, value_name = "HBAR_C")]
    pub si: Option<f64>,
    /// Seed for randomized checks
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Also write tidy CSV (one row per a, xi, method) to this path
    #[arg(long, global = true, value_name = "PATH")]
    pub emit_plot_data: Option<PathBuf>,
    /// TOML file with defaults for any flag
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Empty piston
    #[command(subcommand)]
    Ideal(IdealCommand),
    /// Piston filled with a weak dielectric
    #[command(subcommand)]
    Perturb(PerturbCommand),
    /// Laurent coefficients in the cutoff
    #[command(subcommand)]
    Laurent(LaurentCommand),
    /// Run reproduction checks by name, or `all`
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Args, Default, Clone)]
pub struct GeometryArgs {
    /// Chamber length
    #[arg(long = "L", value_name = "LENGTH")]
    pub length: Option<f64>,
    /// Piston position, 0 < a < L
    #[arg(long)]
    pub a: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum IdealCommand {
    /// Regularized energy per plate area
    Energy(IdealEnergyArgs),
    /// Casimir force per plate area
    Force(GeometryArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IdealMethod {
    Numeric,
    Closed,
    Asymptotic,
    All,
}

#[derive(Debug, Args)]
pub struct IdealEnergyArgs {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    /// Cutoff length
    #[arg(long)]
    pub xi: Option<f64>,
    /// Evaluation route (default closed)
    #[arg(long, value_enum)]
    pub method: Option<IdealMethod>,
    /// Cap on summed modes per side for the numeric route
    #[arg(long)]
    pub max_terms: Option<u64>,
    /// Weight of the m = 0 term in the numeric route
    #[arg(long)]
    pub zero_mode_weight: Option<f64>,
}

#[derive(Debug, Args, Default, Clone)]
pub struct ModeArgs {
    /// Side of the piston: left or right (default left)
    #[arg(long)]
    pub side: Option<String>,
    /// Longitudinal mode index
    #[arg(long)]
    pub m: Option<u32>,
    /// Polarization: 1 (TE) or 2 (TM)
    #[arg(long)]
    pub lambda: Option<u8>,
}

#[derive(Debug, Args, Default, Clone)]
pub struct ProfileArgs {
    /// Permittivity perturbation: `sin` for alpha·sin(pi x/L), or
    /// `file:PATH` for a CSV of x,delta_eps samples (default sin)
    #[arg(long)]
    pub profile: Option<String>,
    /// Amplitude of the sinusoidal profile
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum PerturbCommand {
    /// First-order frequency shift of one mode
    Shift(ShiftArgs),
    /// k-integrated first-order shift weighted by the cutoff
    Integral(IntegralArgs),
    /// dE/dalpha for the sinusoidal profile
    Denergy(DenergyArgs),
    /// Check first-order shifts against layered-cavity eigenfrequencies
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShiftMethod {
    Quadrature,
    Closed,
    All,
}

#[derive(Debug, Args)]
pub struct ShiftArgs {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub mode: ModeArgs,
    /// Transverse wavenumber k_par (default 0)
    #[arg(long)]
    pub kpar: Option<f64>,
    #[command(flatten)]
    pub profile: ProfileArgs,
    /// Evaluation route (default all)
    #[arg(long, value_enum)]
    pub method: Option<ShiftMethod>,
}

#[derive(Debug, Args)]
pub struct IntegralArgs {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub mode: ModeArgs,
    /// Cutoff length
    #[arg(long)]
    pub xi: Option<f64>,
    /// Evaluation route (default all)
    #[arg(long, value_enum)]
    pub method: Option<ShiftMethod>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DenergyMethod {
    Sum,
    Closed,
    Asymptotic,
    All,
}

#[derive(Debug, Args)]
pub struct DenergyArgs {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    /// Cutoff length
    #[arg(long)]
    pub xi: Option<f64>,
    /// Evaluation route (default closed)
    #[arg(long, value_enum)]
    pub method: Option<DenergyMethod>,
    /// Cap on summed modes per side for the sum route
    #[arg(long)]
    pub max_terms: Option<u64>,
    /// Also report the m = 0, lambda = 2 term from the literal formula
    /// against the normalized mode
    #[arg(long)]
    pub zero_mode: bool,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub mode: ModeArgs,
    /// Transverse wavenumber k_par (default 0)
    #[arg(long)]
    pub kpar: Option<f64>,
    #[command(flatten)]
    pub profile: ProfileArgs,
    /// Number of homogeneous layers (default 256)
    #[arg(long)]
    pub layers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum LaurentCommand {
    /// Fit one quantity over a cutoff window
    Fit(FitArgs),
    /// Coefficients against piston position for both quantities
    Report(ReportArgs),
}

#[derive(Debug, Args, Default, Clone)]
pub struct WindowArgs {
    /// Smallest cutoff sampled (default 1e-3)
    #[arg(long)]
    pub xi_min: Option<f64>,
    /// Largest cutoff sampled (default 1e-2)
    #[arg(long)]
    pub xi_max: Option<f64>,
    /// Number of log-spaced samples (default 20)
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// ideal-energy or denergy-dalpha
    #[arg(long)]
    pub quantity: Option<String>,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    /// Comma-separated powers plus `log` and `xi^k*log` entries
    /// (default depends on the quantity)
    #[arg(long, allow_hyphen_values = true)]
    pub basis: Option<String>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Chamber length
    #[arg(long = "L", value_name = "LENGTH")]
    pub length: Option<f64>,
    /// Piston positions as start:stop:count (default 0.2L:0.8L:7)
    #[arg(long)]
    pub a_grid: Option<String>,
    #[command(flatten)]
    pub window: WindowArgs,
    /// Basis for dE/dalpha
    #[arg(long, allow_hyphen_values = true)]
    pub basis: Option<String>,
    /// Basis for the empty-piston energy
    #[arg(long, allow_hyphen_values = true)]
    pub ideal_basis: Option<String>,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// Check name, or `all`
    pub name: String,
}

fn error_json(e: &CliError) -> serde_json::Value {
    match e {
        CliError::Compute(err) => {
            let mut details = serde_json::Map::new();
            match err {
                PistonError::Quadrature { trace, .. } => {
                    details.insert("trace".into(), json!(trace));
                }
                PistonError::Bracket { grid, .. } => {
                    details.insert("grid_points".into(), json!(grid.len()));
                }
                PistonError::RankDeficient { columns } => {
                    details.insert("columns".into(), json!(columns));
                }
                PistonError::UnreliableFit { condition, .. } => {
                    details.insert(
                        "condition_estimate".into(),
                        json!({"value": condition, "units": "1", "method": "fit"}),
                    );
                }
                _ => {}
            }
            json!({"error": {"kind": err.kind(), "message": err.to_string(), "details": details}})
        }
        CliError::Io(msg) => json!({"error": {"kind": "io", "message": msg}}),
        CliError::Usage(msg) => json!({"error": {"kind": "usage", "message": msg}}),
        CliError::Failed => json!({"error": {"kind": "failed", "message": "a check failed"}}),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Failed) => ExitCode::from(1),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            let body = serde_json::to_string_pretty(&error_json(&e)).unwrap_or_default();
            println!("{body}");
            ExitCode::from(1)
        }
    }
}
