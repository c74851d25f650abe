// `!(x > tol)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use mppose_bench::commands::{
    parse_mode, run_bench_noise, run_bench_numeric, run_ransac, run_solve, run_synth, CliError,
};
use mppose_bench::experiments::thread_pool;
use mppose_bench::report::SolverKind;
use mppose_core::ransac::{RansacConfig, SamplingMode};

#[derive(Parser)]
#[command(
    name = "mppose",
    version,
    about = "Multi-camera pose from points and lines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Solver {
    P2l1,
    P1l2,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Switch {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the minimal problem formed by the first features of an instance.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        solver: Solver,
        #[arg(long, value_enum, default_value = "on")]
        cheirality: Switch,
    },
    /// Noiseless trials for both solvers.
    BenchNumeric {
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// `off` writes 0 in the timing column so reports are byte-reproducible.
        #[arg(long, value_enum, default_value = "on")]
        timing: Switch,
    },
    /// Trials at several pixel noise levels.
    BenchNoise {
        #[arg(long, default_value_t = 1000)]
        trials_per_level: u64,
        #[arg(long, default_value = "0,1,2,3,4,5")]
        levels: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "on")]
        timing: Switch,
    },
    /// Robust pose from all features of a dataset.
    Ransac {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        point_thresh: f64,
        #[arg(long, default_value_t = 2.0)]
        line_thresh: f64,
        #[arg(long, default_value_t = 0.3)]
        inlier_frac: f64,
        #[arg(long, default_value_t = 1000)]
        max_iter: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "auto", value_parser = parse_mode)]
        mode: SamplingMode,
        /// Result file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate synthetic instance files and a manifest.
    Synth {
        /// Generation settings or a previous manifest; defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let pool = thread_pool().map_err(CliError::Input)?;
    pool.install(|| match cli.command {
        Command::Solve {
            input,
            solver,
            cheirality,
        } => {
            let solver = match solver {
                Solver::P2l1 => SolverKind::P2l1,
                Solver::P1l2 => SolverKind::P1l2,
            };
            run_solve(&input, solver, cheirality == Switch::On)
        }
        Command::BenchNumeric {
            trials,
            seed,
            out,
            timing,
        } => run_bench_numeric(trials, seed, &out, timing == Switch::On),
        Command::BenchNoise {
            trials_per_level,
            levels,
            seed,
            out,
            timing,
        } => run_bench_noise(trials_per_level, &levels, seed, &out, timing == Switch::On),
        Command::Ransac {
            input,
            point_thresh,
            line_thresh,
            inlier_frac,
            max_iter,
            seed,
            mode,
            out,
        } => {
            let config = RansacConfig {
                point_threshold_px: point_thresh,
                line_threshold: line_thresh,
                required_inlier_fraction: inlier_frac,
                max_iterations: max_iter,
                sampling_mode: mode,
                seed,
                keep_log: false,
            };
            run_ransac(&input, &config, out.as_deref()).map(|_| ())
        }
        Command::Synth { config, out } => run_synth(config.as_ref(), &out),
    })
}

fn main() -> ExitCode {
    // Usage errors share exit code 1 with other input errors; 2 means degenerate.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
