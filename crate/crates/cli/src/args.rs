use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use zp_core::blocks::Profile;

#[derive(Debug, Parser)]
#[command(
    name = "zp-lab",
    version,
    about = "Finite-section experiments on the Kalton-Peck spaces Z_p"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Seed for every sampled quantity.
    #[arg(long, global = true, env = "ZP_LAB_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileArg {
    Flat,
    Geometric,
    Singleton,
}

impl From<ProfileArg> for Profile {
    fn from(p: ProfileArg) -> Self {
        match p {
            ProfileArg::Flat => Profile::Flat,
            ProfileArg::Geometric => Profile::Geometric,
            ProfileArg::Singleton => Profile::Singleton,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GrowthKind {
    /// Pairs `(0, e_j)`.
    Unit,
    /// Normalized flattenings `(y_j, 0)` of seeded pairs.
    Flattened,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepTarget {
    Loglift,
    Growth,
    Distort,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the Kalton-Peck map on a vector.
    Omega {
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Sparse vector `i:v;...`.
        #[arg(long)]
        vec: String,
    },
    /// Quasi-norm of the pair `(x, y)`.
    Qnorm {
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// First coordinate `x`.
        #[arg(long)]
        vec: String,
        /// Second coordinate `y`; zero when omitted.
        #[arg(long, default_value = "")]
        vec2: String,
    },
    /// Centralizer defect of a multiplier `a` at `x`.
    Defect {
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long)]
        vec: String,
        /// Multiplier `a`, bounded; defaults to the indicator of the support of `x`.
        #[arg(long)]
        mult: Option<String>,
    },
    /// Sampled lower estimate of the centralizer constant.
    Cconst {
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 8)]
        dim: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Log-lift of `n` disjoint normalized blocks.
    Loglift {
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = ProfileArg::Flat)]
        profile: ProfileArg,
        #[arg(long, default_value_t = 4)]
        width: usize,
    },
    /// Flatten seeded pairs with dyadic second coordinates.
    Psp {
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        width: usize,
    },
    /// Quasi-norm growth of block sums against `n^(1/p)`.
    Growth {
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = GrowthKind::Unit)]
        kind: GrowthKind,
        #[arg(long, default_value_t = 4)]
        width: usize,
    },
    /// Check the biorthogonality conditions of a system file.
    Validate {
        #[arg(long)]
        system: PathBuf,
    },
    /// Lift an `l_p` system into `Z_p`; writes the lifted system.
    Lift {
        #[arg(long)]
        system: PathBuf,
    },
    /// Distortion ratio of the renorming against its lower bound.
    Distort {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        eps: f64,
        /// Family whose functionals define the renorming.
        #[arg(long, default_value_t = 1)]
        index: usize,
    },
    /// Distance from the unit sphere of a span to one family of a system.
    Probe {
        #[arg(long)]
        system: PathBuf,
        #[arg(long, default_value_t = 1)]
        family: usize,
        /// Spanning vectors `i:v;...`, repeatable; defaults to `e_1..e_dim`.
        #[arg(long)]
        basis: Vec<String>,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 2000)]
        budget: usize,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
    /// Generate a seeded biorthogonal system; writes the system.
    Synth {
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 3)]
        families: usize,
        #[arg(long, default_value_t = 3)]
        size: usize,
        #[arg(long, default_value_t = 4)]
        width: usize,
        /// Emit the lifted `Z_p` system.
        #[arg(long)]
        lift: bool,
    },
    /// Run one computation over the Cartesian product of grids.
    Sweep {
        #[arg(long, value_enum)]
        target: SweepTarget,
        /// Comma-separated exponents.
        #[arg(long, default_value = "1.5,2,3")]
        p: String,
        /// Comma-separated block counts (loglift, growth).
        #[arg(long, default_value = "2,4,8,16")]
        n: String,
        /// Comma-separated epsilons (distort).
        #[arg(long, default_value = "0.01,0.05,0.1,0.5")]
        eps: String,
        /// Comma-separated deltas (distort).
        #[arg(long, default_value = "0.05,0.1,0.2,0.4")]
        delta: String,
        #[arg(long, value_enum, default_value_t = ProfileArg::Flat)]
        profile: ProfileArg,
        #[arg(long, default_value_t = 4)]
        width: usize,
    },
}
