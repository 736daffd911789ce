//! Command-line front end: closed-form bound tables, bound surfaces,
//! Monte Carlo success curves, overcompleteness threshold scans, and the
//! library self-check suites, emitted as CSV or JSON.
//!
//! Exit codes: 0 success, 1 selftest failure, 2 configuration error,
//! 3 runtime error (convergence, scan cap, i/o).

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use overcomp::{Error, Result};

use commands::{bounds, scan, selftest, simulate, surface};
use output::Format;

#[derive(Debug, Parser)]
#[command(name = "overcomp", version, about = "Overcompleteness bounds for universal sparse representation, with a Monte Carlo harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Master seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for Monte Carlo trials. Outputs do not depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form overcompleteness bounds at a regime point or along a sweep.
    Bounds(bounds::BoundsArgs),
    /// Bound values over an (s, eps) grid for heatmaps.
    Surface(surface::SurfaceArgs),
    /// Monte Carlo success probabilities across overcompleteness ratios.
    Simulate(simulate::SimulateArgs),
    /// Minimal overcompleteness reaching a target success probability.
    Scan(scan::ScanArgs),
    /// Run the library's named self-check suites.
    Selftest(selftest::SelftestArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Domain(_) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    if cli.threads == 0 {
        return Err(Error::Config("--threads must be at least 1".into()));
    }
    // The trial counts are exact for any pool size; the pool size only
    // sets how fast they arrive.
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;

    let out = cli.out.as_deref();
    match &cli.command {
        Command::Bounds(args) => output::emit(&bounds::run(args)?, out, cli.format)?,
        Command::Surface(args) => output::emit(&surface::run(args)?, out, cli.format)?,
        Command::Simulate(args) => {
            output::emit(&simulate::run(args, cli.seed)?, out, cli.format)?
        }
        Command::Scan(args) => {
            output::emit(&scan::run(args, cli.seed, out, cli.format)?, out, cli.format)?
        }
        Command::Selftest(args) => {
            if !selftest::run(args, cli.seed, out, cli.format)? {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
