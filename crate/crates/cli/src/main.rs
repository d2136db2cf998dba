//! `asianlie` — verification and classification toolkit for the point
//! symmetries of `u_t = x^2*u_xx + f(x)*u_y`.
//!
//! Every subcommand emits a report, human-readable by default and JSON with
//! `--json` (schema documented in `docs/report-schema.md`). Exit codes:
//! 0 when no check failed (inconclusive checks alone stay 0), 1 when any
//! check failed, 2 when the command could not run at all.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod report;

use report::Tolerances;

#[derive(Parser)]
#[command(name = "asianlie", version, about = "Lie point symmetry toolkit for u_t = x^2*u_xx + f(x)*u_y", long_about = None)]
struct Cli {
    /// Emit the machine-readable JSON report instead of text
    #[arg(long, global = true)]
    json: bool,
    /// Tolerance for numeric comparisons (flow round-trips and similar)
    #[arg(long, global = true, default_value_t = 1e-8)]
    tolerance: f64,
    /// Seed for randomized exact-arithmetic sample points
    #[arg(long, global = true, default_value_t = 7919)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Regenerate the determining system and prove it equivalent to the
    /// reference fixture
    Determining {
        /// Annotate each equation with the jet monomial it came from
        #[arg(long)]
        show_monomials: bool,
        /// Reference-system fixture to compare against (defaults to the
        /// embedded one)
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
    /// Recognize a drift, map it to its canonical form, and report the
    /// admitted symmetry algebra
    Classify {
        /// The drift f(x), in the expression grammar
        #[arg(long)]
        f: String,
    },
    /// Check every cataloged generator, row closure, and dimensions;
    /// `--numeric` adds finite-flow lattice checks
    VerifyCatalog {
        /// Restrict to one catalog row
        #[arg(long)]
        row: Option<usize>,
        /// Also grade the generators' finite flows against a solved lattice
        #[arg(long)]
        numeric: bool,
        /// Catalog fixture to verify (defaults to the embedded one)
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
    /// Reduce the equation by a symmetry generator and verify the ansatz by
    /// back-substitution
    Reduce {
        /// The drift f(x), in the expression grammar
        #[arg(long)]
        f: String,
        /// The generator, e.g. "Dt + 3*Dy" or "2*Dy + u*Du"
        #[arg(long)]
        generator: String,
    },
    /// Solve the equation on a box and export the final-time slice as CSV
    Solve {
        /// The drift f(x), in the expression grammar (no free constants)
        #[arg(long)]
        f: String,
        /// Nodes per spatial axis
        #[arg(long, default_value_t = 33)]
        size: usize,
        /// Final time
        #[arg(long, default_value_t = 0.4)]
        t_max: f64,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tol = Tolerances {
        tolerance: cli.tolerance,
        seed: cli.seed,
    };
    let result = match &cli.command {
        Command::Determining {
            show_monomials,
            fixtures,
        } => commands::determining(*show_monomials, fixtures.as_deref(), tol),
        Command::Classify { f } => commands::classify(f, tol),
        Command::VerifyCatalog {
            row,
            numeric,
            fixtures,
        } => commands::verify_catalog(*row, *numeric, fixtures.as_deref(), tol),
        Command::Reduce { f, generator } => commands::reduce_cmd(f, generator, tol),
        Command::Solve {
            f,
            size,
            t_max,
            out,
        } => commands::solve(f, *size, *t_max, out, tol),
    };
    match result {
        Ok(report) => {
            if cli.json {
                print!("{}", report.render_json());
            } else {
                print!("{}", report.render_text());
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
