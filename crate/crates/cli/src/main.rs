//! `circfrechet` command-line front end.

mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use circfrechet::input::Unit;
use circfrechet::solver::DEFAULT_TIE_TOL;

/// Fréchet means of measures on the unit circle.
#[derive(Debug, Parser)]
#[command(name = "circfrechet", version, about)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Angle list (one per line) or weighted CSV with header `angle,weight`.
    #[arg(long, global = true, value_name = "FILE")]
    pub input: Option<PathBuf>,

    /// Density spec: `uniform`, `vonmises:kappa=K,mu=M`, `box:center=C,width=W`
    /// or `mixture:<spec>[@w];<spec>[@w]`.
    #[arg(long, global = true, value_name = "SPEC")]
    pub density: Option<String>,

    /// Read input angles in degrees. Output is always radians in [-π, π).
    #[arg(long, global = true)]
    pub degrees: bool,

    /// Grid cells for densities, points for `scan`, oracle resolution.
    #[arg(long, global = true, value_name = "M", default_value_t = 4096)]
    pub grid: usize,

    /// Values within this of the minimum count as tied global minima.
    #[arg(long = "tie-tol", global = true, value_name = "T", default_value_t = DEFAULT_TIE_TOL)]
    pub tie_tol: f64,

    /// Seed for `simulate`.
    #[arg(long, global = true, value_name = "S", default_value_t = 0)]
    pub seed: u64,

    /// Emit JSON.
    #[arg(long, global = true, conflicts_with = "csv")]
    pub json: bool,

    /// Emit CSV.
    #[arg(long, global = true)]
    pub csv: bool,

    /// Confidence parameters `x` for the concentration bounds.
    #[arg(long = "x", global = true, value_delimiter = ',', default_values_t = vec![1.0, 2.0, 4.0])]
    pub x: Vec<f64>,
}

impl GlobalArgs {
    pub fn unit(&self) -> Unit {
        if self.degrees {
            Unit::Degrees
        } else {
            Unit::Radians
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Global minimizers of the Fréchet functional.
    Mean,
    /// F and its one-sided derivatives on a grid plus every cusp.
    Scan {
        /// Chart center; `theta` is measured from here.
        #[arg(long, allow_negative_numbers = true)]
        center: Option<f64>,
    },
    /// Uniqueness certificate at the mean, or at a given critical point.
    Unique {
        #[arg(long, allow_negative_numbers = true)]
        at: Option<f64>,
    },
    /// Sufficient criterion: search for a witness with `--delta`, or check
    /// explicit `--center --alpha --phi`.
    Criterion {
        #[arg(long, conflicts_with_all = ["center", "alpha", "phi"])]
        delta: Option<f64>,
        #[arg(long, allow_negative_numbers = true, requires_all = ["alpha", "phi"])]
        center: Option<f64>,
        #[arg(long, requires_all = ["center", "phi"])]
        alpha: Option<f64>,
        /// In the input unit.
        #[arg(long, requires_all = ["center", "alpha"])]
        phi: Option<f64>,
    },
    /// Monte Carlo check of the concentration bounds for empirical means.
    Simulate {
        #[arg(long = "n", value_delimiter = ',', default_values_t = vec![50usize, 200, 800])]
        n: Vec<usize>,
        #[arg(long, default_value_t = 400)]
        trials: usize,
        /// Criterion parameters for the rate bound; give both or neither.
        #[arg(long, requires = "phi")]
        alpha: Option<f64>,
        /// In the input unit.
        #[arg(long, requires = "alpha")]
        phi: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(&cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
