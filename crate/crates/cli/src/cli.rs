use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use psfmat::{AccessMode, Application, FunctionSpec};

#[derive(Parser, Debug)]
#[command(name = "psfmat", version, about = "Planners, simulators and sweeps for sampled matrix functions")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Choose (a, K) for a spectral profile and report the error bounds.
    Plan(PlanArgs),
    /// Tabulate the time-domain kernel f(x).
    Kernel(KernelArgs),
    /// Assemble the Fourier LCU on a matrix and compare with the exact semigroup.
    SimulateFourier(FourierArgs),
    /// Apply the discrete contour sum and compare with f(A)ψ.
    SimulateContour(ContourArgs),
    /// Run a grid application (heat, biharmonic, levy, matrix_poly).
    App(AppArgs),
    /// Evaluate the unit-constant cost models.
    Cost(CostArgs),
    /// Convergence sweeps emitting CSV.
    Sweep(SweepArgs),
}

fn parse_with<T: FromStr>(s: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(|e| e.to_string())
}

fn mode(s: &str) -> Result<AccessMode, String> {
    parse_with(s)
}

fn function(s: &str) -> Result<FunctionSpec, String> {
    parse_with(s)
}

fn application(s: &str) -> Result<Application, String> {
    parse_with(s)
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output file; data goes to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Add wall-clock columns (breaks byte-identical reruns).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Args, Debug, Clone)]
pub struct ProfileArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long = "T")]
    pub t: f64,
    #[arg(long, value_parser = mode, default_value = "root")]
    pub mode: AccessMode,
}

#[derive(Args, Debug)]
pub struct PlanArgs {
    #[command(flatten)]
    pub profile: ProfileArgs,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 1.0)]
    pub hnorm: f64,
    /// Emit the plan as JSON.
    #[arg(long)]
    pub json: bool,
    /// Include the coefficients c_0..c_K in the JSON.
    #[arg(long)]
    pub coefficients: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct KernelArgs {
    #[command(flatten)]
    pub profile: ProfileArgs,
    #[arg(long = "x-min", default_value_t = 0.0)]
    pub x_min: f64,
    #[arg(long = "x-max", default_value_t = 20.0)]
    pub x_max: f64,
    #[arg(long, default_value_t = 201)]
    pub count: usize,
    /// Logarithmic spacing, for tail plots (needs x-min > 0).
    #[arg(long)]
    pub log: bool,
    /// Also report the L1 norm estimate.
    #[arg(long)]
    pub l1: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct FourierArgs {
    #[command(flatten)]
    pub profile: ProfileArgs,
    #[arg(long)]
    pub eps: f64,
    /// Dimension of the seeded random PSD matrix.
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub hnorm: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Matrix file (JSON or Matrix Market) instead of a random instance.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// State file (JSON vector) instead of a random state.
    #[arg(long)]
    pub state: Option<PathBuf>,
    /// Write the approximate output state as JSON `[[re, im], ...]`.
    #[arg(long = "state-out")]
    pub state_out: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct ContourArgs {
    #[arg(long, value_parser = function, default_value = "exp-neg")]
    pub f: FunctionSpec,
    #[arg(long = "R1")]
    pub r1: Option<f64>,
    #[arg(long = "R2")]
    pub r2: Option<f64>,
    /// Node count; planned from --eps when absent.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long = "quad-n")]
    pub quad_n: Option<usize>,
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    /// Spectral radius of the seeded random normal matrix.
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long = "state-out")]
    pub state_out: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct AppArgs {
    #[arg(long, value_parser = application)]
    pub name: Application,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long = "T", default_value_t = 1.0)]
    pub t: f64,
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long = "R1")]
    pub r1: Option<f64>,
    #[arg(long = "R2")]
    pub r2: Option<f64>,
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum CostPath {
    A,
    B,
    Compare,
}

#[derive(Args, Debug)]
pub struct CostArgs {
    #[arg(long, value_enum)]
    pub path: CostPath,
    /// Decay order for path A or a power-decay target in compare.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_parser = mode, default_value = "root")]
    pub mode: AccessMode,
    #[arg(long = "T", default_value_t = 1.0)]
    pub t: f64,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 1.0)]
    pub anorm: f64,
    /// ‖u0‖/‖u_T‖ (path A) or ‖ψ‖/‖f(A)ψ‖.
    #[arg(long, default_value_t = 1.0)]
    pub ur: f64,
    /// Holomorphic target for compare.
    #[arg(long, value_parser = function)]
    pub f: Option<FunctionSpec>,
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    /// The operator is Hermitian positive semidefinite.
    #[arg(long)]
    pub psd: bool,
    #[arg(long = "R1")]
    pub r1: Option<f64>,
    #[arg(long = "R2")]
    pub r2: Option<f64>,
    #[arg(long = "B1")]
    pub b1: Option<f64>,
    #[arg(long = "B2")]
    pub b2: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub fpsi: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepPath {
    Contour,
    Fourier,
    App,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub path: SweepPath,
    #[arg(long, value_parser = function, default_value = "exp-neg")]
    pub f: FunctionSpec,
    /// Node counts as `start:stop:step` or a comma list.
    #[arg(long, default_value = "4:48:4")]
    pub m: String,
    #[arg(long = "R1", default_value_t = 1.0)]
    pub r1: f64,
    #[arg(long = "R2", default_value_t = 2.0)]
    pub r2: f64,
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long = "T", default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, value_parser = mode, default_value = "root")]
    pub mode: AccessMode,
    /// Comma list of target accuracies.
    #[arg(long, default_value = "1e-2,1e-4,1e-6,1e-8")]
    pub eps: String,
    #[arg(long, value_parser = application)]
    pub name: Option<Application>,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    /// Grid sizes (apps) or matrix dimension (other paths) as a list or range.
    #[arg(long, default_value = "6")]
    pub n: String,
    #[command(flatten)]
    pub output: OutputArgs,
}
