//! Command-line syntax.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use nonlocal_cu::{ScenarioName, Scheme};

#[derive(Debug, Parser)]
#[command(
    name = "nlcu",
    version,
    about = "Central-upwind and Kurganov-Tadmor solvers for nonlocal conservation laws"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and write the solution and mass log as CSV.
    Solve(SolveArgs),
    /// Grid-refinement study against a fine cu2 reference.
    Converge(ConvergeArgs),
    /// Run the randomized invariant checks.
    Check(CheckArgs),
    /// List the built-in scenarios.
    Scenarios,
}

/// Options shared by `solve` and `converge`.
#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_parser = parse_scenario)]
    pub scenario: Option<ScenarioName>,
    /// Scheme to run; repeat for several (cu1, godunov1, cu2, kt).
    #[arg(long = "scheme", value_parser = parse_scheme)]
    pub schemes: Vec<Scheme>,
    /// CFL safety factor in (0, 1]; defaults depend on the scheme.
    #[arg(long)]
    pub cfl: Option<f64>,
    /// Limiter parameter in [1, 2].
    #[arg(long)]
    pub theta: Option<f64>,
    /// Final time; defaults to the scenario's.
    #[arg(long = "t-final")]
    pub t_final: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// File of `key = value` lines; command-line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Refinement level; each level halves the scenario's base spacing.
    #[arg(long = "n")]
    pub level: Option<u32>,
    /// Explicit cell count, overriding the level.
    #[arg(long)]
    pub cells: Option<usize>,
    /// Extra output time; repeat for several.
    #[arg(long = "snapshot")]
    pub snapshots: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Number of levels; levels 0..N-1 are compared.
    #[arg(long)]
    pub levels: Option<u32>,
    /// Level of the cu2 reference solution.
    #[arg(long = "ref-level")]
    pub ref_level: Option<u32>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Seed of the random samples.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random samples per property.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn parse_scenario(s: &str) -> Result<ScenarioName, String> {
    s.parse().map_err(|e: nonlocal_cu::SolverError| e.to_string())
}

pub fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse().map_err(|e: nonlocal_cu::SolverError| e.to_string())
}
