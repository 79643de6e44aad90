//! Command-line surface and the single table of defaults.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lobound::functionals::bound::BoundVariant;
use lobound::functionals::corr::{CorrQuadrature, DEFAULT_CHAIN_ALPHAS};
use lobound::jellium::energy::{DEFAULT_K_VALUES, DEFAULT_SHELL_CUTOFF, TAIL_TOLERANCE};
use lobound::jellium::finite::NEAR_FIELD_RADIUS;
use lobound::jellium::{Carving, LatticeKind};
use lobound::maximal::{K_MIN_BRACKET, K_SUP_SAMPLES, LEMMA_CONSTANT, LEMMA_GRID_SLACK};
use serde::Serialize;

pub const THREADS_ENV: &str = "LOBOUND_THREADS";
pub const TF_Z_VALUES: [f64; 4] = [1.0, 2.0, 4.0, 8.0];
pub const HEAT_CHECK_TIMES: [f64; 3] = [0.1, 0.2762, 1.0];
pub const HEAT_CHECK_SAMPLES: usize = 1000;
pub const K_CURVE_RANGE: (f64, f64) = (1e-2, 5.0);
pub const CURVE_POINTS: usize = 200;
/// Sample points per axis of the periodic constant-density Corr check.
pub const PERIODIC_CELL_POINTS: usize = 12;

#[derive(Debug, Parser)]
#[command(name = "lobound", version, about = "Gradient-corrected Lieb-Oxford bounds and Jellium lattice energies")]
pub struct Cli {
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,

    /// Print every default setting as JSON and exit.
    #[arg(long)]
    pub show_defaults: bool,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Re-derive every constant of the bound and compare with the published values.
    Constants(ConstantsArgs),
    /// Evaluate the functionals and bounds of a density.
    Bound(BoundArgs),
    /// Check the inequality chain and supporting properties on a radial corpus.
    Certify(CertifyArgs),
    /// Maximal-function constants, checks and plot data.
    Maxfn(MaxfnArgs),
    /// Jellium and indirect energies of the cubic lattices.
    Jellium(JelliumArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    #[command(flatten)]
    pub out: OutputArgs,
    /// Print only the per-constant verdicts.
    #[arg(long)]
    pub check: bool,
    /// Override every agreement tolerance.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Include the auxiliary quantities the constants are built from.
    #[arg(long)]
    pub all: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantChoice {
    Published,
    Derived,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub out: OutputArgs,
    /// Density in Gaussian cube format.
    #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
    pub cube: Option<PathBuf>,
    /// Analytic radial density, as JSON (`{"type":"gaussian","width":1,"n":1}`)
    /// or `type:key=value,...` (`gaussian:width=1,n=1`).
    #[arg(long)]
    pub spec: Option<String>,
    /// Single variant; all six when omitted.
    #[arg(long, value_parser = parse_variant)]
    pub variant: Option<BoundVariant>,
    /// Fixed α for the gradient variants; optimized when omitted.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_enum, default_value_t = ConstantChoice::Published)]
    pub constants: ConstantChoice,
    /// Replace negative cube values by zero instead of rejecting the file.
    #[arg(long)]
    pub clamp_negative: bool,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub out: OutputArgs,
    /// Comma-separated α values.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_CHAIN_ALPHAS.to_vec())]
    pub alphas: Vec<f64>,
    /// Add a hard-edged uniform ball to the corpus.
    #[arg(long)]
    pub with_ball: bool,
    /// Skip the maximal-function lemma corpus (the slowest check).
    #[arg(long)]
    pub quick: bool,
    /// Write one CSV line per checked inequality here.
    #[arg(long)]
    pub witness: Option<PathBuf>,
    /// Relative tolerance of the Corr quadrature.
    #[arg(long, default_value_t = CorrQuadrature::default().rel_tol)]
    pub rel_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Curve {
    /// `K(T)` on a log grid.
    K,
    /// The kernel profiles `χ`, `Ψ`, `Ψ₁`, `Ψ₂` on `[0, 1.5]`.
    Chi,
}

#[derive(Debug, Args)]
pub struct MaxfnArgs {
    #[command(flatten)]
    pub out: OutputArgs,
    /// Emit plot data instead of the summary.
    #[arg(long, value_enum)]
    pub curve: Option<Curve>,
    #[arg(long, default_value_t = CURVE_POINTS)]
    pub points: usize,
    /// Also verify the norm inequality on the test-function corpus.
    #[arg(long)]
    pub lemma: bool,
}

#[derive(Debug, Args)]
pub struct JelliumArgs {
    #[command(flatten)]
    pub out: OutputArgs,
    #[arg(long, default_value_t = LatticeKind::Bcc, value_parser = parse_lattice)]
    pub lattice: LatticeKind,
    /// All three cubic lattices.
    #[arg(long)]
    pub table: bool,
    /// Also report the Yukawa-screened shift for this ν.
    #[arg(long)]
    pub yukawa: Option<f64>,
    /// Radius of the summed ball of lattice points.
    #[arg(long, default_value_t = DEFAULT_SHELL_CUTOFF)]
    pub cutoff: u32,
    /// Also report the Fourier-limit value of the shift.
    #[arg(long)]
    pub fourier: bool,
    /// Also evaluate the finite system of this many points.
    #[arg(long)]
    pub finite: Option<usize>,
    #[arg(long, default_value = "cube", value_parser = parse_carving)]
    pub carving: Carving,
}

fn parse_variant(s: &str) -> Result<BoundVariant, String> {
    s.parse().map_err(|e: lobound::Error| e.to_string())
}

fn parse_lattice(s: &str) -> Result<LatticeKind, String> {
    s.parse().map_err(|e: lobound::Error| e.to_string())
}

fn parse_carving(s: &str) -> Result<Carving, String> {
    s.parse().map_err(|e: lobound::Error| e.to_string())
}

/// Every numeric default, as printed by `--show-defaults`.
#[derive(Debug, Serialize)]
pub struct Defaults {
    pub threads_env: &'static str,
    pub format: Format,
    pub bound_constants: ConstantChoice,
    pub chain_alphas: Vec<f64>,
    pub corr_rel_tol: f64,
    pub corr_max_intervals: usize,
    pub tf_z_values: Vec<f64>,
    pub periodic_cell_points: usize,
    pub lemma_constant: f64,
    pub lemma_grid_slack: f64,
    pub k_sup_samples: usize,
    pub k_min_bracket: (f64, f64),
    pub k_curve_range: (f64, f64),
    pub curve_points: usize,
    pub heat_check_times: Vec<f64>,
    pub heat_check_samples: usize,
    pub jellium_lattice: LatticeKind,
    pub shell_cutoff: u32,
    pub tail_tolerance: f64,
    pub fourier_k_values: Vec<f64>,
    pub finite_near_field_radius: f64,
    pub finite_carving: Carving,
}

impl Defaults {
    pub fn current() -> Self {
        let q = CorrQuadrature::default();
        Self {
            threads_env: THREADS_ENV,
            format: Format::Table,
            bound_constants: ConstantChoice::Published,
            chain_alphas: DEFAULT_CHAIN_ALPHAS.to_vec(),
            corr_rel_tol: q.rel_tol,
            corr_max_intervals: q.max_intervals,
            tf_z_values: TF_Z_VALUES.to_vec(),
            periodic_cell_points: PERIODIC_CELL_POINTS,
            lemma_constant: LEMMA_CONSTANT,
            lemma_grid_slack: LEMMA_GRID_SLACK,
            k_sup_samples: K_SUP_SAMPLES,
            k_min_bracket: K_MIN_BRACKET,
            k_curve_range: K_CURVE_RANGE,
            curve_points: CURVE_POINTS,
            heat_check_times: HEAT_CHECK_TIMES.to_vec(),
            heat_check_samples: HEAT_CHECK_SAMPLES,
            jellium_lattice: LatticeKind::Bcc,
            shell_cutoff: DEFAULT_SHELL_CUTOFF,
            tail_tolerance: TAIL_TOLERANCE,
            fourier_k_values: DEFAULT_K_VALUES.to_vec(),
            finite_near_field_radius: NEAR_FIELD_RADIUS,
            finite_carving: Carving::Cube,
        }
    }
}
