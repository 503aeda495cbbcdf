//! `htk` — command-line interface for hypertoric arrangement validation,
//! potential/metric evaluation, moment-map fiber classification and
//! arrangement transforms.
//!
//! Reports are emitted as JSON on stdout and are byte-deterministic for
//! identical inputs and flags; timing goes to stderr. Exit codes: 0 success
//! (validation passed), 2 validation violations, 1 parse or usage errors.

mod commands;
mod util;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "htk", version, about = "Hypertoric arrangement toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate an arrangement file: primitivity, smoothness conditions,
    /// convergence.
    Validate {
        /// Arrangement JSON file.
        file: String,
        /// Residual tolerance for floating-point consistency checks.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Evaluate potentials, metric matrices or finite-difference residual
    /// diagnostics over a grid, writing CSV.
    Eval {
        file: String,
        /// potential | metric | harmonic | polyharmonic
        #[arg(long)]
        mode: String,
        /// Grid "x0,y0,z0:x1,y1,z1:nx,ny,nz" in the slice coordinate.
        #[arg(long)]
        grid: String,
        /// Slice base point, 3n comma-separated values (default zeros).
        #[arg(long)]
        slice_base: Option<String>,
        /// Slice covector, n comma-separated integers (default e1*).
        #[arg(long)]
        slice_alpha: Option<String>,
        /// Truncation tolerance for infinite families.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Finite-difference step for residual modes.
        #[arg(long, default_value_t = 1e-3)]
        fd_step: f64,
        /// Metric entry "i,j" (1-based) for polyharmonic mode.
        #[arg(long)]
        entry: Option<String>,
        /// Output CSV path.
        #[arg(long)]
        out: String,
    },
    /// Classify a moment-map fiber (su2/su3 target file) or construct a
    /// torus fiber witness over an arrangement.
    Fiber {
        file: String,
        /// su2 | su3 | torus
        #[arg(long)]
        group: String,
        /// Cross-check with the scanning oracle.
        #[arg(long, default_value_t = false)]
        oracle: bool,
        /// Target point for torus mode: 3n comma-separated values.
        #[arg(long)]
        point: Option<String>,
        /// Phases for torus mode, one per flat (default zeros).
        #[arg(long)]
        phases: Option<String>,
    },
    /// Apply an arrangement transform and write the result.
    Transform {
        file: String,
        /// modify | taubnut | scale | iterate-ak | cut
        #[arg(long)]
        op: String,
        /// Weight of the new flat for modify: "u1,u2,...".
        #[arg(long)]
        flat_u: Option<String>,
        /// Level of the new flat for modify: three values, rationals as p/q.
        #[arg(long)]
        flat_lambda: Option<String>,
        /// Symmetric PSD matrix for taubnut: rows separated by ';'.
        #[arg(long)]
        matrix: Option<String>,
        /// Scale constant for scale.
        #[arg(long)]
        factor: Option<f64>,
        /// Scaling convention: times-c (default, satisfies V'(Cμ) = V/C) or
        /// over-c.
        #[arg(long, default_value = "times-c")]
        convention: String,
        /// Number of centers to add for iterate-ak.
        #[arg(long)]
        k: Option<usize>,
        /// Centers "x,y,z;x,y,z;..." for iterate-ak (defaults to integer
        /// points on the first axis).
        #[arg(long)]
        points: Option<String>,
        /// Cut level for cut.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Output arrangement path (not used by cut).
        #[arg(long)]
        out: Option<String>,
    },
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("HTK_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = hypertoric::par::set_threads(n.max(1));
        }
    }
    let started = Instant::now();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Validate { file, tol } => commands::validate::run(&file, tol),
        Command::Eval { file, mode, grid, slice_base, slice_alpha, tol, fd_step, entry, out } => {
            commands::eval::run(&file, &mode, &grid, slice_base, slice_alpha, tol, fd_step, entry, &out)
        }
        Command::Fiber { file, group, oracle, point, phases } => {
            commands::fiber::run(&file, &group, oracle, point, phases)
        }
        Command::Transform {
            file,
            op,
            flat_u,
            flat_lambda,
            matrix,
            factor,
            convention,
            k,
            points,
            epsilon,
            out,
        } => commands::transform::run(commands::transform::Params {
            file,
            op,
            flat_u,
            flat_lambda,
            matrix,
            factor,
            convention,
            k,
            points,
            epsilon,
            out,
        }),
    };
    eprintln!("# elapsed_ms={}", started.elapsed().as_millis());
    match outcome {
        Ok(violations) => {
            if violations {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
