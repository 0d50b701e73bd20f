//! `projcalc`: constructions and the randomized verification suite from the command line.

mod compute;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use projcalc_core::verify::{run_suite, Suite, VerifyConfig};
use projcalc_core::{ProjError, Tolerances};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "projcalc", version, about = "Projection calculus for pairs of projections")]
struct Cli {
    /// Identity tolerance; the clustering and well-supportedness tolerances keep their defaults.
    #[arg(long, global = true, default_value_t = Tolerances::default().eq)]
    tol: f64,
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and print its report.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 12)]
        dim_max: usize,
        #[arg(long, default_value_t = 1e-4)]
        tau_spec: f64,
    },
    /// Projections with prescribed angles.
    Pair {
        /// Angles in `(0, π/2)`, comma separated.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        angles: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        extra_p: usize,
        #[arg(long, default_value_t = 0)]
        extra_q: usize,
        #[arg(long, default_value_t = 0)]
        extra_kernel: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// `P_{Q,R,f}` and `U_{Q,R,f}`.
    Pc {
        #[arg(long)]
        q: PathBuf,
        #[arg(long)]
        r: PathBuf,
        /// `id`, `chi`, `cap:c`, `const:t`, or a path to a function JSON file.
        #[arg(long = "fn", default_value = "id")]
        function: String,
    },
    /// Norm-continuous path of projections.
    Homotopy {
        #[arg(long, value_enum)]
        kind: HomotopyKind,
        /// Start projection (kind `close`).
        #[arg(long)]
        q: Option<PathBuf>,
        /// End projection (kind `close`).
        #[arg(long)]
        r: Option<PathBuf>,
        /// Partial isometry (kinds `mvn` and `orthogonal`).
        #[arg(long)]
        u: Option<PathBuf>,
        #[arg(long, default_value_t = 9)]
        steps: usize,
    },
    /// Lift through a quotient of a block-diagonal algebra.
    Lift {
        #[arg(long, value_enum)]
        kind: LiftKind,
        /// `{"blocks": [n1, ...]}`.
        #[arg(long)]
        algebra: PathBuf,
        /// `{"kept": [i, ...]}`.
        #[arg(long)]
        map: PathBuf,
        /// `{"r": M, "q": M}` for projection lifts, `{"t": M}` otherwise; block-diagonal matrices.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 200)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-4)]
        tau_spec: f64,
    },
    /// Projection `P ≥ v` of the requested rank with `PQP = φ(Q)P`.
    Excise {
        #[arg(long)]
        q: PathBuf,
        /// `{"re": [...], "im": [...]}`.
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = 1)]
        rank: usize,
    },
    /// Matrix units moving an orthonormal family.
    Transitivity {
        #[arg(long)]
        n: usize,
        #[arg(long = "N")]
        big_n: usize,
        #[arg(long)]
        fat: bool,
        /// Use `e₁, …, eₙ` instead of a random orthonormal family.
        #[arg(long)]
        standard: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
pub enum HomotopyKind {
    /// `‖Q − R‖ < 1`.
    Close,
    /// From `UU*` to `U*U`.
    Mvn,
    /// From `UU*` to `U*U` when they are orthogonal.
    Orthogonal,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum LiftKind {
    Norm,
    Spectrum,
    Idempotent,
    Isometry,
    IsometrySpectrum,
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
}

fn emit(value: &impl Serialize, out: Option<&PathBuf>) -> Result<(), ProjError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| ProjError::Format(e.to_string()))?;
    match out {
        Some(path) => {
            std::fs::write(path, text + "\n").map_err(|e| ProjError::Format(format!("{}: {e}", path.display())))
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<u8, ProjError> {
    let tol = Tolerances::with_eq(cli.tol)?;
    let out = cli.out.as_ref();
    match cli.command {
        Command::Verify { suite, seed, trials, dim_max, tau_spec } => {
            let suite: Suite = suite.parse()?;
            let report = run_suite(suite, &VerifyConfig { seed, trials, dim_max, tol, tau_spec })?;
            emit(&report, out)?;
            return Ok(if report.all_pass() { 0 } else { 1 });
        }
        Command::Pair { angles, extra_p, extra_q, extra_kernel, seed } => {
            emit(&compute::pair(&angles, extra_p, extra_q, extra_kernel, seed, &tol)?, out)?
        }
        Command::Pc { q, r, function } => emit(&compute::pc(&q, &r, &function, &tol)?, out)?,
        Command::Homotopy { kind, q, r, u, steps } => {
            emit(&compute::homotopy(kind, q.as_ref(), r.as_ref(), u.as_ref(), steps, &tol)?, out)?
        }
        Command::Lift { kind, algebra, map, input, max_iters, tau_spec } => {
            emit(&compute::lift(kind, &algebra, &map, &input, max_iters, tau_spec, &tol)?, out)?
        }
        Command::Excise { q, state, rank } => emit(&compute::excise(&q, &state, rank, &tol)?, out)?,
        Command::Transitivity { n, big_n, fat, standard, seed } => {
            emit(&compute::transitivity(n, big_n, fat, standard, seed, &tol)?, out)?
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let report = ErrorReport { error: e.kind(), message: e.to_string() };
            eprintln!("{}", serde_json::to_string(&report).unwrap_or_else(|_| e.to_string()));
            ExitCode::from(u8::try_from(e.exit_code()).unwrap_or(1))
        }
    }
}
