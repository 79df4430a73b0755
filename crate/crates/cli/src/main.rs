//! `povmlab` command-line front end.
//!
//! Exit codes: 0 success, 1 parse or usage error, 2 validation failure,
//! 3 negative verdict (the artifact is still written).

mod commands;
mod config;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use povmlab::qubit::Family;

use commands::{Output, Status};
use config::{Overrides, Settings};
use io::{emit, to_json, Envelope, Failure, Metadata};

#[derive(Parser)]
#[command(name = "povmlab", version, about = "Dual frames, optimal data processing and post-processing for POVMs")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Eigenvalues at or below this count as zero.
    #[arg(long, global = true)]
    tol_eig_zero: Option<f64>,
    /// Slack allowed on positivity checks.
    #[arg(long, global = true)]
    tol_psd_slack: Option<f64>,
    /// Residual allowed on linear solves and completeness.
    #[arg(long, global = true)]
    tol_lin_solve: Option<f64>,
    /// Eigenvalue clustering distance.
    #[arg(long, global = true)]
    tol_cluster: Option<f64>,
    /// `key = value` file with tolerances and seed; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for sampling.
    #[arg(long, global = true, env = "POVMLAB_SEED")]
    seed: Option<u64>,
    /// Write the JSON artifact here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check a POVM file, or re-check an artifact written by this tool.
    Validate { file: PathBuf },
    /// Canonical dual frame, or the alternate dual built from `--y`.
    Dual {
        #[arg(long)]
        povm: PathBuf,
        /// Operator list `Y_i` for the alternate dual.
        #[arg(long)]
        y: Option<PathBuf>,
    },
    /// Optimal dual frame for an ensemble.
    OptimalDual {
        #[arg(long)]
        povm: PathBuf,
        /// Ensemble file or preset (`six-state`, `maximally-mixed`).
        #[arg(long)]
        ensemble: String,
    },
    /// Minimal ensemble-averaged error for an observable.
    MinError {
        #[arg(long)]
        povm: PathBuf,
        #[arg(long)]
        ensemble: String,
        #[arg(long)]
        x: PathBuf,
    },
    /// Informational completeness, or R-completeness with `--r`.
    Infocheck {
        #[arg(long)]
        povm: PathBuf,
        #[arg(long)]
        r: Option<PathBuf>,
    },
    /// Classical post-processing.
    #[command(subcommand)]
    Postproc(Postproc),
    /// AB-spaces built from two observables.
    #[command(subcommand)]
    Abspace(Abspace),
    /// Optimal qubit families for sigma_x and sigma_y type pairs.
    #[command(subcommand)]
    Qubit(Qubit),
    /// Sample a POVM on a state and estimate an observable.
    Simulate {
        #[arg(long)]
        povm: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        x: PathBuf,
        /// Number of shots.
        #[arg(long)]
        n: u64,
        /// Use the optimal dual for this ensemble instead of the canonical one.
        #[arg(long)]
        ensemble: Option<String>,
    },
}

#[derive(Subcommand)]
enum Postproc {
    /// Is Q a post-processing of P?
    Check {
        #[arg(long)]
        q: PathBuf,
        #[arg(long)]
        p: PathBuf,
    },
    /// Blur P into a post-processing of Q.
    Blur {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
        #[arg(long)]
        ensemble: String,
    },
    /// Is the POVM a joint measurement of the observables?
    Joint {
        #[arg(long)]
        povm: PathBuf,
        #[arg(long = "x", required = true, num_args = 1..)]
        xs: Vec<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Abspace {
    /// Build the AB-space of two observables.
    Build {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// AB-informational completeness of a POVM.
    Check {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        povm: PathBuf,
    },
}

#[derive(Subcommand)]
enum Qubit {
    /// Optimal POVM at one angle.
    Optimal {
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        /// 3 or 4 outcomes.
        #[arg(long, value_parser = commands::parse_family, default_value = "4")]
        family: Family,
        #[arg(long, default_value = "six-state")]
        ensemble: String,
    },
    /// Noise quantities over a grid of angles.
    Sweep {
        /// `start:end:count`.
        #[arg(long, value_parser = grid)]
        thetas: Grid,
        #[arg(long, value_parser = commands::parse_family, default_value = "4")]
        family: Family,
        #[arg(long, default_value = "six-state")]
        ensemble: String,
        /// Also write the rows as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Clone)]
struct Grid(Vec<f64>);

fn grid(s: &str) -> Result<Grid, String> {
    commands::parse_grid(s).map(Grid)
}

fn run(cli: Cli) -> Result<Status, Failure> {
    let g = &cli.global;
    let flags = Overrides {
        eig_zero: g.tol_eig_zero,
        psd_slack: g.tol_psd_slack,
        lin_solve: g.tol_lin_solve,
        cluster: g.tol_cluster,
        seed: g.seed,
    };
    let s: Settings = config::resolve(g.config.as_deref(), flags)?;
    log::debug!("tolerances {:?}, seed {}", s.tol, s.seed);
    let mut csv = None;
    let output: Output = match &cli.command {
        Command::Validate { file } => commands::validate(file, &s)?,
        Command::Dual { povm, y } => commands::dual(povm, y.as_ref(), &s)?,
        Command::OptimalDual { povm, ensemble } => commands::optimal(povm, ensemble, &s)?,
        Command::MinError { povm, ensemble, x } => commands::min_err(povm, ensemble, x, &s)?,
        Command::Infocheck { povm, r } => commands::infocheck(povm, r.as_ref(), &s)?,
        Command::Postproc(Postproc::Check { q, p }) => commands::postproc_check(q, p, &s)?,
        Command::Postproc(Postproc::Blur { p, q, ensemble }) => commands::postproc_blur(p, q, ensemble, &s)?,
        Command::Postproc(Postproc::Joint { povm, xs }) => commands::postproc_joint(povm, xs, &s)?,
        Command::Abspace(Abspace::Build { a, b }) => commands::abspace_build(a, b, &s)?,
        Command::Abspace(Abspace::Check { space, povm }) => commands::abspace_check(space, povm, &s)?,
        Command::Qubit(Qubit::Optimal { theta, family, ensemble }) => {
            commands::qubit_optimal(*theta, *family, ensemble, &s)?
        }
        Command::Qubit(Qubit::Sweep { thetas, family, ensemble, csv: path }) => {
            let (out, text) = commands::qubit_sweep(&thetas.0, *family, ensemble, &s)?;
            csv = path.as_ref().map(|p| (p.clone(), text));
            out
        }
        Command::Simulate { povm, state, x, n, ensemble } => {
            commands::run_simulation(povm, state, x, *n, ensemble.as_deref(), &s)?
        }
    };
    let env = Envelope { metadata: Metadata::new(output.kind, s.tol, s.seed), result: output.result };
    emit(g.out.as_ref(), &to_json(&env))?;
    if let Some((path, text)) = csv {
        emit(Some(&path), &text)?;
    }
    Ok(output.status)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Invalid) => ExitCode::from(2),
        Ok(Status::Negative) => ExitCode::from(3),
        Err(f) => {
            eprintln!("povmlab: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
