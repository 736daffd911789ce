//! The `surface` subcommand: log10 bound values over an (s, eps) grid,
//! one row per cell, for heatmap plotting.

use clap::Args;
use overcomp::bounds::{self, BoundReport, RegimeParams};
use overcomp::{Error, Result};

use crate::output::{Cell, Table};

#[derive(Debug, Args)]
pub struct SurfaceArgs {
    /// Grid resolution per axis.
    #[arg(long, default_value_t = 50)]
    pub grid: usize,
    #[arg(long, default_value_t = 0.05)]
    pub s_min: f64,
    #[arg(long, default_value_t = 0.5)]
    pub s_max: f64,
    #[arg(long, default_value_t = 0.05)]
    pub eps_min: f64,
    #[arg(long, default_value_t = 0.9)]
    pub eps_max: f64,
}

const COLUMNS: &[&str] = &[
    "s",
    "eps",
    "log10_wc_lower",
    "log10_wc_upper_closed",
    "log10_wc_upper_exact",
    "log10_ac_upper_closed",
    "wc_lower_reason",
    "wc_upper_closed_reason",
    "wc_upper_exact_reason",
    "ac_upper_closed_reason",
];

pub fn run(args: &SurfaceArgs) -> Result<Table> {
    if args.grid < 2 {
        return Err(Error::Config(format!(
            "grid needs at least 2 points per axis, got {}",
            args.grid
        )));
    }
    for (name, lo, hi) in [("s", args.s_min, args.s_max), ("eps", args.eps_min, args.eps_max)] {
        if !(0.0 < lo && lo < hi && hi < 1.0) {
            return Err(Error::Config(format!(
                "{name} range must satisfy 0 < min < max < 1, got [{lo}, {hi}]"
            )));
        }
    }

    let mut table = Table::new(COLUMNS);
    let step = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (args.grid - 1) as f64;
    for i in 0..args.grid {
        let s = step(args.s_min, args.s_max, i);
        for j in 0..args.grid {
            let eps = step(args.eps_min, args.eps_max, j);
            let r = RegimeParams::new(s, eps)?;
            let reports = [
                bounds::wc_lower(r),
                bounds::wc_upper_closed(r),
                bounds::wc_upper_exact(r),
                bounds::ac_upper_closed(r),
            ];
            let mut row = vec![Cell::F(s), Cell::F(eps)];
            row.extend(reports.iter().map(value_cell));
            row.extend(reports.iter().map(reason_cell));
            table.push(row);
        }
    }
    Ok(table)
}

fn value_cell(report: &BoundReport) -> Cell {
    if report.valid {
        Cell::F(report.log10_value)
    } else {
        Cell::Empty
    }
}

fn reason_cell(report: &BoundReport) -> Cell {
    report.violated_condition.clone().map(Cell::S).into()
}
