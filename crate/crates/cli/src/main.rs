//! `reebkit`: run contact-geometry checks on catalog examples or manifests.
//!
//! Exit codes: 0 success or PASS, 1 usage or input error, 2 quantitative
//! FAIL, 3 numerical failure.

mod commands;
mod manifest;
mod report;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "reebkit", version, about = "Contact forms, Reeb dynamics and reduction, numerically")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Where the problem comes from, plus sampling settings.
#[derive(Args, Debug, Clone)]
pub struct Source {
    /// Catalog entry, e.g. `hopf:2` (see `catalog list`).
    #[arg(long, conflicts_with = "manifest", required_unless_present = "manifest")]
    pub example: Option<String>,
    /// TOML manifest describing a chart and a contact form.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Number of sample points.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Seed for random starts and random tangent vectors.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Integrator and return-detection settings.
#[derive(Args, Debug, Clone)]
pub struct Tolerances {
    /// Integrator local error per unit step.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Distance below which the orbit counts as returned.
    #[arg(long)]
    pub return_tol: Option<f64>,
    /// Largest time scanned for a return.
    #[arg(long)]
    pub horizon: Option<f64>,
}

/// Trajectory outputs.
#[derive(Args, Debug, Clone)]
pub struct Outputs {
    /// Write accepted steps as CSV (`t,<coords>`).
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Write a 2-D projection as SVG.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Coordinates plotted in the SVG, e.g. `0,1`.
    #[arg(long, default_value = "0,1")]
    pub proj: String,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the contact condition at sample points.
    Verify {
        #[command(flatten)]
        source: Source,
    },
    /// Solve for the Reeb field and report its residual.
    Reeb {
        #[command(flatten)]
        source: Source,
        /// Point at which to print the field, comma separated.
        #[arg(long)]
        at: Option<String>,
    },
    /// Contact Hamiltonian field of a function and the law it satisfies.
    Hamfield {
        #[command(flatten)]
        source: Source,
        /// Contact Hamiltonian, an expression in the chart coordinates.
        #[arg(long)]
        hamiltonian: Option<String>,
        #[arg(long)]
        at: Option<String>,
    },
    /// Test whether `f R` is the Reeb field of `η/f`.
    RescaleFalsify {
        #[command(flatten)]
        source: Source,
        /// Positive factor `f`.
        #[arg(long)]
        factor: Option<String>,
        /// Half-width of the sample box around the origin.
        #[arg(long, default_value_t = 0.1)]
        radius: f64,
    },
    /// Build the symplectization and check its identities.
    Symplectize {
        #[command(flatten)]
        source: Source,
        /// Conformal factor `F`: compare the projected field of `s/F` with
        /// the Reeb field of `F η`.
        #[arg(long)]
        factor: Option<String>,
    },
    /// Integrate the Reeb flow.
    Flow {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        tolerances: Tolerances,
        #[command(flatten)]
        outputs: Outputs,
        /// `random`, `random:seed=N`, or a comma-separated point.
        #[arg(long)]
        start: Option<String>,
        /// Integration time.
        #[arg(long)]
        time: Option<f64>,
    },
    /// Detect the minimal period of the Reeb orbit through a start point.
    Period {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        tolerances: Tolerances,
        #[command(flatten)]
        outputs: Outputs,
        #[arg(long)]
        start: Option<String>,
    },
    /// Compare minimal periods across several starts.
    PeriodConstancy {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        tolerances: Tolerances,
        /// `random:seed=N,count=M` or points separated by `;`.
        #[arg(long)]
        starts: Option<String>,
        /// Number of random starts when `--starts` is absent.
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
    /// Check the fibration and the reduced 2-form.
    Reduce {
        #[command(flatten)]
        source: Source,
        /// Base point at which to evaluate the reduced form on an
        /// orthonormal tangent pair.
        #[arg(long)]
        at: Option<String>,
    },
    /// Integrate the reduced form over the sphere and test integrality.
    Integrality {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        tolerances: Tolerances,
        #[arg(long)]
        mesh_level: Option<u32>,
        /// Use this value instead of measuring it from the flow.
        #[arg(long)]
        hbar: Option<f64>,
        /// Integrate with the inward orientation.
        #[arg(long)]
        reverse: bool,
        /// Write the finest mesh in OFF format.
        #[arg(long)]
        off: Option<PathBuf>,
    },
    /// Primitive of the reduced form from a global section.
    Exactness {
        #[command(flatten)]
        source: Source,
    },
    /// List or describe catalog entries.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Subcommand, Debug)]
pub enum CatalogAction {
    List,
    Show { name: String },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = commands::run(cli.command);
    print!("{}", outcome.report.render());
    if let Some(err) = &outcome.error {
        eprintln!("error: {err:#}");
    }
    ExitCode::from(outcome.code)
}
