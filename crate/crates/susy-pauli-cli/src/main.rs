//! Command-line front end: field profiles, tolerances and subcommands wired
//! to the library, emitting all reports and data files.
//!
//! Exit codes: 0 = all checks within tolerance, 1 = a verification failed,
//! 2 = usage or configuration error. The parallelism width is controlled by
//! the `SUSY_PAULI_THREADS` environment variable (0 or unset = automatic,
//! 1 = sequential).

mod commands;
mod config;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "susy-pauli",
    version,
    about = "Supercharges, ladder operators and exact solutions of the planar Pauli equation in time-dependent fields"
)]
struct Cli {
    /// Path to a `section.key = value` config file (defaults are built in).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for reports and data files (overrides output.dir).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Seed for the reproducible probe fields.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Multiplies every verification tolerance.
    #[arg(long, global = true, default_value_t = 1.0)]
    tol_scale: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Prove the operator-algebra identities exactly and write the report.
    VerifyAlgebra,
    /// Solve the auxiliary oscillator equation and dump the trajectory CSV.
    SolveOde,
    /// Check the bracket identities on the grid with seeded probe fields.
    CheckOperators,
    /// Generate one eigenstate snapshot plus its metadata row.
    GenState,
    /// Sweep the Pauli-equation residual of the configured state over time.
    Residual,
    /// Propagate the configured state and report conserved-observable drifts.
    Propagate,
    /// Print the eigenvalue table with degeneracy annotations.
    Spectrum {
        /// Largest ladder index to list.
        #[arg(long, default_value_t = 3)]
        n_max: u32,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match config::RunConfig::load(cli.config.as_deref()) {
        Ok(mut cfg) => {
            if let Some(dir) = cli.out_dir {
                cfg.out_dir = dir;
            }
            cfg
        }
        Err(err) => {
            eprintln!("config error: {err:#}");
            return ExitCode::from(2);
        }
    };
    let env = commands::Env {
        config,
        seed: cli.seed,
        tol_scale: cli.tol_scale,
    };
    let outcome = match cli.command {
        Command::VerifyAlgebra => commands::verify_algebra(&env),
        Command::SolveOde => commands::solve_ode(&env),
        Command::CheckOperators => commands::check_operators(&env),
        Command::GenState => commands::gen_state(&env),
        Command::Residual => commands::residual(&env),
        Command::Propagate => commands::propagate(&env),
        Command::Spectrum { n_max } => commands::spectrum(&env, n_max),
    };
    match outcome {
        Ok(commands::Outcome::Pass) => ExitCode::SUCCESS,
        Ok(commands::Outcome::VerificationFailed(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
