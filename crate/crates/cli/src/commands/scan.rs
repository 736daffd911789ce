//! The `scan` subcommand: minimal overcompleteness reaching a target
//! success probability, per dimension, with the asymptotic bounds that
//! should bracket the threshold and a full trace per dimension.

use std::path::Path;

use clap::Args;
use overcomp::bounds::{self, RegimeParams};
use overcomp::montecarlo::{self, ScanConfig, ScanResult};
use overcomp::Result;

use crate::output::{self, Cell, Format, Table};

use super::simulate::{parse_scheme, Scheme};

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Comma-separated list of signal dimensions.
    #[arg(long, value_delimiter = ',', required = true)]
    pub d_list: Vec<usize>,
    /// Sparsity factor; s * d must be integral for every dimension.
    #[arg(long)]
    pub s: f64,
    /// Permissible relative representation error, in (0, 1].
    #[arg(long, conflicts_with = "snr_db")]
    pub eps: Option<f64>,
    /// Error level as a signal-to-noise ratio: eps = 10^(-snr_db/20).
    #[arg(long)]
    pub snr_db: Option<f64>,
    /// Success probability the scan must reach.
    #[arg(long, default_value_t = 0.99)]
    pub target_p: f64,
    /// Overcompleteness increment between scan points.
    #[arg(long, default_value_t = 1.0)]
    pub o_step: f64,
    /// Monte Carlo trials per scan point.
    #[arg(long, default_value_t = 200)]
    pub trials: u64,
    /// Give up once o exceeds this.
    #[arg(long, default_value_t = 200.0)]
    pub o_cap: f64,
    /// Dictionary/coder pairing to scan.
    #[arg(long, value_parser = parse_scheme, default_value = "dense:omp")]
    pub scheme: Scheme,
}

const COLUMNS: &[&str] = &[
    "d",
    "k",
    "n_min",
    "o_min",
    "p_hat_at_o_min",
    "wc_lower",
    "ac_upper_closed",
    "trace_file",
];

const TRACE_COLUMNS: &[&str] =
    &["d", "k", "n", "o", "trials", "successes", "p_hat", "ci_low", "ci_high"];

/// Runs the scans and writes one trace table per dimension next to the
/// main output file. Without --out the traces stay in memory only.
pub fn run(args: &ScanArgs, seed: u64, out: Option<&Path>, format: Format) -> Result<Table> {
    let eps = super::resolve_eps(args.eps, args.snr_db)?;
    let mut table = Table::new(COLUMNS);
    for &d in &args.d_list {
        let cfg = ScanConfig {
            d,
            s: args.s,
            eps,
            target_p: args.target_p,
            coder: args.scheme.coder,
            dict: args.scheme.dict,
            trials: args.trials,
            o_step: args.o_step,
            seed,
            o_cap: args.o_cap,
        };
        let result = montecarlo::scan_min_overcompleteness(&cfg)?;

        let trace_file = match out {
            Some(path) => {
                let trace_path = output::sibling_path(path, &format!("trace.d{d}"));
                output::emit(&trace_table(&result), Some(&trace_path), format)?;
                Cell::from(trace_path.to_string_lossy().into_owned())
            }
            None => Cell::Empty,
        };

        // Dimension-free bracket for the threshold: the worst-case lower
        // bound and the closed average-case upper bound at this regime.
        let r = RegimeParams::new(args.s, eps)?;
        let p_at_min = result
            .trace
            .last()
            .map(|pt| Cell::F(pt.estimate.p_hat))
            .unwrap_or(Cell::Empty);
        table.push(vec![
            Cell::U(result.d as u64),
            Cell::U(result.k as u64),
            Cell::U(result.n_min as u64),
            Cell::F(result.o_min),
            p_at_min,
            Cell::F(bounds::wc_lower(r).value),
            Cell::F(bounds::ac_upper_closed(r).value),
            trace_file,
        ]);
    }
    Ok(table)
}

fn trace_table(result: &ScanResult) -> Table {
    let mut table = Table::new(TRACE_COLUMNS);
    for pt in &result.trace {
        table.push(vec![
            Cell::U(result.d as u64),
            Cell::U(result.k as u64),
            Cell::U(pt.n as u64),
            Cell::F(pt.o),
            Cell::U(pt.estimate.trials),
            Cell::U(pt.estimate.successes),
            Cell::F(pt.estimate.p_hat),
            Cell::F(pt.estimate.ci_low),
            Cell::F(pt.estimate.ci_high),
        ]);
    }
    table
}
