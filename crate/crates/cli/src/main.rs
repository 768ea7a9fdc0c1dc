//! `lfrect`: simulate LF-point correspondences, estimate the relative pose
//! of two plenoptic cameras, rectify their light fields, extract EPIs and
//! run Monte-Carlo benchmarks.
//!
//! Exit codes: 0 success, 1 internal failure, 2 invalid input or
//! configuration, 3 generation failure, 4 coplanar scene, 5 no overlap
//! between the rectified apertures.

mod commands;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use failure::Failure;

#[derive(Debug, Parser)]
#[command(name = "lfrect", version, about = "Light-field pose estimation and rectification")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Seed overriding the one in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output path: a directory, or a file for `epi`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Log progress to stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Correspondences and ground truth from a simulation config.
    Simulate(commands::SimulateArgs),
    /// Relative pose from LF-point correspondences.
    Estimate(commands::EstimateArgs),
    /// Row-aligned sub-aperture images in the common parameterization.
    Rectify(commands::RectifyArgs),
    /// Epipolar plane image of a light-field directory.
    Epi(commands::EpiArgs),
    /// Monte-Carlo error sweep.
    Bench(commands::BenchArgs),
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(jobs) = cli.global.jobs {
        if jobs == 0 {
            return Err(Failure::config("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::internal(format!("thread pool: {e}")))?;
    }
    let g = &cli.global;
    match &cli.command {
        Command::Simulate(a) => commands::simulate(a, g.seed, g.out.as_deref()),
        Command::Estimate(a) => commands::estimate(a, g.out.as_deref()),
        Command::Rectify(a) => commands::rectify(a, g.out.as_deref()),
        Command::Epi(a) => commands::epi(a, g.out.as_deref()),
        Command::Bench(a) => commands::bench(a, g.seed, g.out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.global.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
