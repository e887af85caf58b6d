//! `bjlab`: command-line harness for block Jacobi experiments.
//!
//! Subcommands:
//!
//! * `run` solves eigenproblems and exports the convergence trace;
//! * `operator-norm` samples block Jacobi operators and checks `‖J‖₂ ≤ μ`;
//! * `classify` reports the strategy classes a pivot sequence belongs to;
//! * `jjacobi` runs the block J-Jacobi method on a positive definite matrix;
//! * `bounds` prints the contraction constants of a partition.
//!
//! Exit codes: 0 success, 1 input or configuration error (including a
//! non-positive-definite `jjacobi` input), 2 bound violation, 3 non-convergence.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use bjlab_core::{ClassKind, UbcMode};
use clap::{Parser, Subcommand};

use crate::config::{DefaultMatrix, ExperimentConfig, Overrides, Resolved};
use crate::error::{CliResult, EXIT_INPUT};

/// Output directory used when neither `--out-dir` nor the config names one.
const DEFAULT_OUT_DIR: &str = "bjlab-out";

#[derive(Parser, Debug)]
#[command(name = "bjlab", version, about = "Block Jacobi eigenvalue experiments")]
struct Cli {
    /// JSON experiment config; command-line flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for random matrices, sampled strategies and operator sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory for traces and summaries.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Fail with exit code 2 when an observed ratio exceeds the a-priori bound.
    #[arg(long, global = true)]
    check_bounds: bool,

    /// When to apply the UBC column permutation: always, adaptive or never.
    #[arg(long, global = true)]
    ubc: Option<UbcMode>,

    /// UBC slack rho in (0, 1].
    #[arg(long, global = true)]
    rho: Option<f64>,

    /// Matrix file (first line n, then n rows of n numbers).
    #[arg(long, global = true)]
    matrix: Option<PathBuf>,

    /// Matrix generator: random, spd, identity, diagonal or laplacian.
    #[arg(long, global = true, conflicts_with = "matrix")]
    generator: Option<String>,

    /// Matrix order for generators (defaults to the partition's n).
    #[arg(long, global = true)]
    n: Option<usize>,

    /// Block partition, for example "pi:2,2,2,2".
    #[arg(long, global = true)]
    partition: Option<String>,

    /// Strategy: "class:B_c m=4 seed=7", "pairs:(1,2),(1,3),…", "row" or "column".
    #[arg(long, global = true)]
    strategy: Option<String>,

    /// Maximum number of sweeps.
    #[arg(long, global = true)]
    sweep_cap: Option<usize>,

    /// Worker threads for repetition and sampling campaigns.
    #[arg(long, global = true, env = "BJLAB_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the block Jacobi method and export the trace.
    Run {
        /// Independent repetitions (random sources use seed + r).
        #[arg(long)]
        repetitions: Option<usize>,
    },
    /// Sample block Jacobi operators with UBC factors and compare their norm with mu.
    OperatorNorm {
        /// Number of sampled operator products.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Report class memberships, witnesses and M_O of a pivot sequence.
    Classify {
        /// Inline spec ("pairs:…", "class:…", "row", "column") or a file containing one.
        sequence: String,
        /// Only test this class, for example B_sg.
        #[arg(long = "class")]
        class: Option<ClassKind>,
        /// Number of blocks for "row" and "column".
        #[arg(long)]
        blocks: Option<usize>,
    },
    /// Run the block J-Jacobi method on a positive definite matrix.
    Jjacobi {
        /// Number of positive signs in J = diag(I_nu, -I_(n-nu)).
        #[arg(long)]
        nu: Option<usize>,
    },
    /// Print the contraction constants of a partition.
    Bounds,
}

fn execute(cli: Cli) -> CliResult<u8> {
    if let Some(threads) = cli.threads {
        // `build_global` only fails when the pool already exists.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let file = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let mut flags = Overrides {
        seed: cli.seed,
        out_dir: cli.out_dir,
        check_bounds: cli.check_bounds,
        ubc: cli.ubc,
        rho: cli.rho,
        matrix: cli.matrix,
        generator: cli.generator,
        n: cli.n,
        partition: cli.partition,
        strategy: cli.strategy,
        sweep_cap: cli.sweep_cap,
        ..Overrides::default()
    };
    let default_dir = PathBuf::from(DEFAULT_OUT_DIR);
    match cli.command {
        Command::Run { repetitions } => {
            flags.repetitions = repetitions;
            let cfg = Resolved::new(file, flags, DefaultMatrix::Random)?;
            commands::cmd_run(&cfg, cfg.out_dir.as_ref().unwrap_or(&default_dir))
        }
        Command::OperatorNorm { samples } => {
            flags.samples = samples;
            let cfg = Resolved::new(file, flags, DefaultMatrix::None)?;
            commands::cmd_operator_norm(&cfg, cfg.out_dir.as_ref().unwrap_or(&default_dir))
        }
        Command::Classify { sequence, class, blocks } => {
            commands::cmd_classify(&sequence, class, blocks, flags.seed.or(file.seed))
        }
        Command::Jjacobi { nu } => {
            flags.nu = nu;
            let cfg = Resolved::new(file, flags, DefaultMatrix::Spd)?;
            commands::cmd_jjacobi(&cfg, cfg.out_dir.as_ref().unwrap_or(&default_dir))
        }
        Command::Bounds => {
            let cfg = Resolved::new(file, flags, DefaultMatrix::None)?;
            commands::cmd_bounds(&cfg, cfg.out_dir.as_deref())
        }
    }
}

fn main() -> ExitCode {
    // Usage errors exit with 1 like every other input problem; clap's own
    // code 2 would read as a bound violation.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("bjlab: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
