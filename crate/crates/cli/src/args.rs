use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use semistab_core::grid::{PolarGridSpec, WindowSpec};
use semistab_core::verification::{VerifyOptions, XiGrid};
use semistab_core::ProfileScan;

#[derive(Debug, Parser)]
#[command(name = "semistab", version, about = "Robustness certificates for semigroup stability under finite-rank perturbations")]
pub struct Cli {
    /// Worker threads for grid scans (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the resolvent profile and compose a perturbation budget.
    Certify(CertifyArgs),
    /// Check a perturbation against a certificate.
    Verify(VerifyArgs),
    /// Fit decay exponents under positive-power budgets.
    VerifyPolynomial(PolyArgs),
    /// Trajectory of the perturbed semigroup.
    Simulate(SimulateArgs),
    /// Rerun a worked example and print expected against measured values.
    Reproduce(ReproduceArgs),
}

#[derive(Clone, Debug, Default, Args)]
pub struct GridArgs {
    /// Half-width of the scanned part of the imaginary axis.
    #[arg(long = "grid-window", default_value_t = 10.0)]
    pub window: f64,
    /// Points on the scanned axis.
    #[arg(long = "grid-axis", default_value_t = 2001)]
    pub axis: usize,
    /// Smallest distance to a resonance.
    #[arg(long = "grid-r-min", default_value_t = 1e-8)]
    pub r_min: f64,
    /// Log-spaced radii per resonance.
    #[arg(long = "grid-radii", default_value_t = 65)]
    pub radii: usize,
    /// Angles per radius in the half-disk grids.
    #[arg(long = "grid-angles", default_value_t = 17)]
    pub angles: usize,
    /// Points per side of the right half-plane window.
    #[arg(long = "grid-plane", default_value_t = 41)]
    pub plane: usize,
    /// Log-spaced abscissae for the half-plane integrals.
    #[arg(long = "grid-xi", default_value_t = 25)]
    pub xi: usize,
    /// Inflation of every grid-estimated constant.
    #[arg(long = "grid-headroom", default_value_t = 1.1)]
    pub headroom: f64,
}

impl GridArgs {
    pub fn profile_scan(&self) -> ProfileScan {
        ProfileScan {
            window: self.window,
            n_window: self.axis,
            r_min: self.r_min,
            n_radii: self.radii,
            headroom: self.headroom,
            ..ProfileScan::default()
        }
    }

    pub fn verify_options(&self) -> VerifyOptions {
        let d = VerifyOptions::default();
        VerifyOptions {
            polar: PolarGridSpec { r_min: self.r_min, n_radii: self.radii.div_ceil(2).max(2), n_angles: self.angles },
            window: WindowSpec { re_max: self.window, im_half: self.window, n_re: self.plane, n_im: 2 * self.plane - 1 },
            xi: XiGrid { n: self.xi, ..XiGrid::default() },
            growth: semistab_core::verification::GrowthOptions { n_radii: self.radii.div_ceil(2).max(2), ..d.growth },
            ..d
        }
    }
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Contraction target for the transfer function.
    #[arg(long, default_value_t = 0.8)]
    pub c: f64,
    /// Weight on B; defaults to alpha/2.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Weight on C; defaults to alpha - beta.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Analytic bound replacing the generic M1.
    #[arg(long)]
    pub m1: Option<f64>,
    /// Use the boundary supremum of the exact resolvent norm for M2.
    #[arg(long)]
    pub direct_m2: bool,
    #[arg(long, default_value = "certificate.json")]
    pub out: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub pert: PathBuf,
    #[arg(long, default_value = "certificate.json")]
    pub cert: PathBuf,
    #[arg(long, default_value = "verification.json")]
    pub out: PathBuf,
    /// Directory for comma-separated plot tables.
    #[arg(long)]
    pub plots: Option<PathBuf>,
    /// Skip the trajectory check.
    #[arg(long)]
    pub no_simulate: bool,
    /// Horizon for the trajectory check; defaults to 5/|Re of the slowest mode|.
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct PolyArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub pert: PathBuf,
    #[arg(long)]
    pub beta: f64,
    #[arg(long)]
    pub gamma: f64,
    /// Decay exponent of the unperturbed generator.
    #[arg(long)]
    pub alpha: f64,
    /// Bound for the positive graph norms of B and C*.
    #[arg(long, default_value_t = 0.05)]
    pub budget: f64,
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = 24)]
    pub n_times: usize,
    #[arg(long, default_value = "polynomial.json")]
    pub out: PathBuf,
    #[arg(long)]
    pub plots: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub pert: PathBuf,
    /// Defaults to 5/|Re of the slowest mode|.
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    /// Start from the unit vector on this index instead of a random vector.
    #[arg(long)]
    pub index: Option<usize>,
    #[arg(long, default_value_t = 20_240_601)]
    pub seed: u64,
    /// Use the matrix-free adaptive integrator.
    #[arg(long)]
    pub adaptive: bool,
    #[arg(long, default_value = "trajectory.csv")]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Disk,
    Diagonal,
    Poly,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    pub preset: Preset,
    #[arg(long, default_value = "reproduce")]
    pub out: PathBuf,
}
