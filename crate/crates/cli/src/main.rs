use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use convdiff_cli::config::{RunConfig, Settings};
use convdiff_cli::run::{run_convergence, run_oracle, run_solve};
use convdiff_cli::CliError;

#[derive(Parser)]
#[command(name = "convdiff", version, about = "Steady convection-diffusion finite-element solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configuration and write solution, report and plots
    Solve(Args),
    /// Solve on a sequence of meshes and fit convergence rates
    Convergence(Args),
    /// Tabulate the closed-form reference solution
    Oracle(Args),
}

#[derive(clap::Args)]
struct Args {
    /// key = value file; command-line flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// paper1d, paper2d or custom
    #[arg(long)]
    preset: Option<String>,
    /// Convection constant (both components in 2D)
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    /// Second convection component (custom 2D only)
    #[arg(long, allow_hyphen_values = true)]
    by: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    /// Diffusion coefficient a >= 1 (custom only)
    #[arg(long)]
    a: Option<String>,
    /// Reaction coefficient c >= 0 (custom only)
    #[arg(long)]
    c: Option<String>,
    /// Constant source (custom only)
    #[arg(long, allow_hyphen_values = true)]
    source: Option<String>,
    /// Spatial dimension for the custom preset
    #[arg(long)]
    dim: Option<String>,
    /// Lagrange degree, 1..=5
    #[arg(long)]
    degree: Option<String>,
    /// Cells per side
    #[arg(long)]
    n: Option<String>,
    /// galerkin, supg or artdiff
    #[arg(long)]
    stab: Option<String>,
    /// Artificial-diffusion multiplier
    #[arg(long)]
    beta: Option<String>,
    /// Comma-separated y values of the 2D line plots
    #[arg(long)]
    layers: Option<String>,
    /// Series truncation tolerance of the 2D reference
    #[arg(long)]
    tol: Option<String>,
    /// Output directory
    #[arg(long)]
    out: Option<String>,
    /// Comma-separated mesh sizes (convergence)
    #[arg(long)]
    meshes: Option<String>,
    /// Comma-separated degrees (convergence)
    #[arg(long)]
    degrees: Option<String>,
    /// Comma-separated points, x or x:y (oracle)
    #[arg(long)]
    points: Option<String>,
    /// Points per side of the uniform oracle grid
    #[arg(long)]
    grid: Option<String>,
}

impl Args {
    fn settings(&self) -> Result<Settings, CliError> {
        let mut s = Settings::default();
        let fields = [
            ("preset", &self.preset),
            ("b", &self.b),
            ("by", &self.by),
            ("eps", &self.eps),
            ("a", &self.a),
            ("c", &self.c),
            ("source", &self.source),
            ("dim", &self.dim),
            ("degree", &self.degree),
            ("n", &self.n),
            ("stab", &self.stab),
            ("beta", &self.beta),
            ("layers", &self.layers),
            ("tol", &self.tol),
            ("out", &self.out),
            ("meshes", &self.meshes),
            ("degrees", &self.degrees),
            ("points", &self.points),
            ("grid", &self.grid),
        ];
        for (key, value) in fields {
            if let Some(v) = value {
                s.set(key, v.clone())?;
            }
        }
        let base = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::default(),
        };
        Ok(base.overlay(s))
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (args, f): (&Args, fn(&RunConfig) -> Result<(), CliError>) = match &cli.command {
        Command::Solve(a) => (a, run_solve),
        Command::Convergence(a) => (a, run_convergence),
        Command::Oracle(a) => (a, run_oracle),
    };
    let cfg = RunConfig::from_settings(&args.settings()?)?;
    f(&cfg)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
