//! `qcavity`: reference solutions, training, inference and sweeps for the
//! lid-driven cavity.
//!
//! Exit codes: 0 success, 2 usage or configuration, 3 numerical abort, 4 I/O.
//! `QCAVITY_THREADS` caps the worker pool.

mod commands;
mod config;
mod error;
mod manifest;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{ReferenceArgs, SweepArgs, SweepAxis};
use error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "qcavity", version, about = "Physics-informed quantum and classical solvers for the lid-driven cavity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the steady cavity by pseudo-time integration.
    Reference {
        #[arg(long = "re")]
        reynolds: f64,
        #[arg(long, default_value_t = 50)]
        nx: usize,
        #[arg(long, default_value_t = 50)]
        ny: usize,
        /// Artificial compressibility.
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        steady_tol: Option<f64>,
        #[arg(long)]
        no_svg: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a model from a JSON config (or a previous run's manifest).
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Field CSV to track rel-L2 errors against during training.
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a checkpoint on the nodes of a reference field.
    Infer {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        no_svg: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Error metrics between two field CSVs on the same grid.
    Metrics {
        #[arg(long)]
        prediction: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dump encoding angles of the three embeddings on a grid.
    CompareEmbeddings {
        #[arg(long)]
        config: PathBuf,
        /// Trained checkpoints to take embedding parameters from.
        #[arg(long)]
        checkpoint: Vec<PathBuf>,
        #[arg(long, default_value_t = 50)]
        nx: usize,
        #[arg(long, default_value_t = 50)]
        ny: usize,
        #[arg(long)]
        no_svg: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Final training loss of every embedding across qubit counts or Reynolds numbers.
    Sweep {
        #[arg(long, value_enum)]
        axis: SweepAxis,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        values: Vec<f64>,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Run the sweep's trainings concurrently.
        #[arg(long)]
        parallel: bool,
    },
}

fn init_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("QCAVITY_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("QCAVITY_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> CliResult<()> {
    init_threads()?;
    match cli.command {
        Command::Reference {
            reynolds,
            nx,
            ny,
            beta,
            steady_tol,
            no_svg,
            out,
        } => commands::reference(&ReferenceArgs {
            reynolds,
            nx,
            ny,
            beta,
            steady_tol,
            svg: !no_svg,
            out,
        }),
        Command::Train { config, reference, out } => commands::train(&config, reference.as_deref(), &out),
        Command::Infer {
            checkpoint,
            reference,
            no_svg,
            out,
        } => commands::infer(&checkpoint, &reference, &out, !no_svg),
        Command::Metrics {
            prediction,
            reference,
            out,
        } => commands::metrics_cmd(&prediction, &reference, &out),
        Command::CompareEmbeddings {
            config,
            checkpoint,
            nx,
            ny,
            no_svg,
            out,
        } => commands::compare_embeddings(&config, &checkpoint, nx, ny, &out, !no_svg),
        Command::Sweep {
            axis,
            values,
            config,
            out,
            parallel,
        } => commands::sweep(&SweepArgs {
            axis,
            values,
            config,
            out,
            parallel,
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qcavity: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
