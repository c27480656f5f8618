//! `spincert` command-line front end.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spincert::sets::Branch;

#[derive(Parser)]
#[command(name = "spincert", version, about = "Randomness certification under a spin bound")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Boundary polylines of the quantum, classical and relaxed sets.
    Boundary(BoundaryArgs),
    /// Certified entropy and its robust lower bound for a target correlation.
    Certify(CertifyArgs),
    /// Seeded Monte-Carlo verification suites.
    Verify(VerifyArgs),
    /// Truncation error, inflation and inclusion margins for coherent states.
    Coherent(CoherentArgs),
    /// Outcome counts sampled from an extremal quantum model.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args)]
pub struct Common {
    /// JSON file with the command's parameters; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Embed the wall time in the output, which makes it non-reproducible.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Args)]
pub struct Scenario {
    /// Twice the spin bound, `2J`.
    #[arg(long)]
    pub two_j: Option<u32>,
    /// Rotation angle in radians, or degrees with `--degrees`.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub degrees: bool,
}

impl Scenario {
    pub fn alpha_radians(&self) -> Option<f64> {
        self.alpha.map(|a| if self.degrees { a.to_radians() } else { a })
    }
}

#[derive(Args)]
pub struct BoundaryArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub scenario: Scenario,
    /// Relaxation parameters of the relaxed boundaries.
    #[arg(long, value_delimiter = ',')]
    pub delta: Option<Vec<f64>>,
    /// Points per boundary arc.
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub scenario: Scenario,
    #[arg(long, allow_hyphen_values = true)]
    pub e1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub e2: Option<f64>,
    /// Estimate the target from an extremal model at this boundary parameter.
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, value_enum)]
    pub branch: Option<BranchArg>,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Boxes per degree in the set-equality suite.
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Args)]
pub struct CoherentArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub scenario: Scenario,
    /// Mean photon number `|β|²`.
    #[arg(long)]
    pub beta_sq: Option<f64>,
    /// Largest photon-number cutoff of the sweep.
    #[arg(long)]
    pub n_max: Option<u32>,
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub scenario: Scenario,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, value_enum)]
    pub branch: Option<BranchArg>,
    #[arg(long)]
    pub samples: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    Lower,
    Upper,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Lower => Branch::Lower,
            BranchArg::Upper => Branch::Upper,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = match &cli.command {
        Command::Boundary(a) => commands::boundary(a, start),
        Command::Certify(a) => commands::certify(a, start),
        Command::Verify(a) => commands::verify(a, start),
        Command::Coherent(a) => commands::coherent(a, start),
        Command::Simulate(a) => commands::simulate(a, start),
    };
    eprintln!("wall time: {:.3} s", start.elapsed().as_secs_f64());
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
