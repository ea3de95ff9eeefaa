//! Command-line front end: argument grammar, error-to-exit-code mapping and
//! command dispatch. Every command writes one deterministic JSON document.

pub mod commands;
pub mod report;
pub mod selftest;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use zgw_core::Exponent;

/// Environment variable overriding the network-size cap.
pub const SIZE_CAP_ENV: &str = "ZGW_SIZE_CAP";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Input { path: String, message: String },
    #[error("bad argument: {0}")]
    Argument(String),
    #[error(transparent)]
    Core(#[from] zgw_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("self-test failed: {0}")]
    SelfTest(String),
}

impl CliError {
    /// 2 parse errors, 3 descriptor mismatch, 4 size cap, 5 non-geodesic target, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        use zgw_core::Error as E;
        match self {
            CliError::Input { .. } | CliError::Argument(_) => 2,
            CliError::Core(E::Parse(_)) => 2,
            CliError::Core(E::IncompatibleSpaces) => 3,
            CliError::Core(E::SizeCap { .. }) => 4,
            CliError::Core(E::NonGeodesicSpace(_)) => 5,
            _ => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "zgw", version, about = "Gromov-Wasserstein distances between metric-valued networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Clone, Debug)]
pub struct SolverArgs {
    /// Exponent p: a real number >= 1 or "inf".
    #[arg(long, default_value = "2")]
    pub p: Exponent,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    /// Relative Frank-Wolfe gap at which a run stops.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PathKind {
    Mixture,
    Contraction,
    Geodesic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum IngestMode {
    Fused,
    Cone,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Out,
    In,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Upper bound on the GW distance from the conditional-gradient solver.
    Dist {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// Also compute the lower-bound hierarchy and report violations.
        #[arg(long)]
        verify: bool,
        /// Include the best coupling in the report.
        #[arg(long)]
        coupling: bool,
    },
    /// The polynomial-time lower bounds.
    Bounds {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value = "2")]
        p: Exponent,
        /// Basepoint as a JSON literal; defaults to the first kernel entry of `a`.
        #[arg(long)]
        z0: Option<String>,
        #[arg(long, value_enum, default_value_t = DirectionArg::Out)]
        direction: DirectionArg,
    },
    /// Two-sided bound via a landmark embedding into R^n.
    Approx {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// Number of farthest-point landmarks drawn from the kernel values.
        #[arg(long, default_value_t = 4)]
        landmarks: usize,
        /// Exponent of the ℓ^r norm on R^n.
        #[arg(long, default_value = "inf")]
        r: Exponent,
    },
    /// Samples a path between two networks (or from one network to a point).
    Interp {
        a: PathBuf,
        b: Option<PathBuf>,
        #[arg(long, value_enum)]
        kind: PathKind,
        /// Comma-separated times in [0, 1].
        #[arg(long, default_value = "0,0.25,0.5,0.75,1")]
        times: String,
        #[command(flatten)]
        solver: SolverArgs,
        /// Fill point (mixture) or target point (contraction) as a JSON literal;
        /// defaults to the first kernel entry of `a`.
        #[arg(long)]
        z0: Option<String>,
        /// Write the (s, t, distortion, bound) table here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Converts an attributed graph into a network.
    Ingest {
        graph: PathBuf,
        #[arg(long, value_enum)]
        mode: IngestMode,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        /// Edge-feature value used on non-edges (fused mode), as a JSON literal.
        #[arg(long)]
        fill: Option<String>,
        /// Apex base point when the graph has no edges (cone mode), as a JSON literal.
        #[arg(long)]
        default_base: Option<String>,
    },
    /// Exhaustive grid search over couplings for tiny networks.
    Oracle {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value = "2")]
        p: Exponent,
        /// Grid steps per free coupling entry.
        #[arg(long, default_value_t = 100)]
        resolution: usize,
    },
    /// Runs the built-in invariant suites.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Output of a successful command.
#[derive(Debug)]
pub struct Outcome {
    pub json: String,
    /// Nonzero when the command ran but reports a failure (self-test).
    pub exit_code: i32,
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    commands::dispatch(&cli.command)
}
