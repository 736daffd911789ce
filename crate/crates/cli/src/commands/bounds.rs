//! The `bounds` subcommand: closed-form overcompleteness bounds at one
//! regime point, or swept along 1/s or SNR for curve files.

use clap::{Args, ValueEnum};
use overcomp::bounds::{self, BoundReport, RegimeParams};
use overcomp::{Error, Result};

use crate::output::{Cell, Table};

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Sparsity factor k/d.
    #[arg(long)]
    pub s: Option<f64>,
    /// Permissible relative representation error, in (0, 1).
    #[arg(long, conflicts_with = "snr_db")]
    pub eps: Option<f64>,
    /// Error level as a signal-to-noise ratio: eps = 10^(-snr_db/20).
    #[arg(long)]
    pub snr_db: Option<f64>,
    /// Sweep axis producing one block of rows per point.
    #[arg(long, value_enum)]
    pub sweep: Option<SweepAxis>,
    /// Sweep start (in 1/s units for --sweep s, in dB for --sweep snr).
    #[arg(long)]
    pub from: Option<f64>,
    /// Sweep end, inclusive.
    #[arg(long)]
    pub to: Option<f64>,
    /// Number of sweep points.
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    /// Approximation level for the delta-dependent bounds.
    /// Defaults: eps for the exact average-case bound, eps/sqrt(2) for
    /// the closed success lower bound (which requires delta < eps).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Overcompleteness ratio for the finite-d success-probability rows.
    #[arg(long)]
    pub o: Option<f64>,
    /// Signal dimension for the finite-d success-probability rows.
    #[arg(long)]
    pub d: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepAxis {
    /// Sweep the inverse sparsity 1/s at fixed error level.
    S,
    /// Sweep the SNR in dB at fixed sparsity.
    Snr,
}

const COLUMNS: &[&str] = &[
    "bound", "s", "inv_s", "eps", "snr_db", "delta", "o", "d", "value", "log10_value", "valid",
    "reason", "note", "constants",
];

pub fn run(args: &BoundsArgs) -> Result<Table> {
    let mut table = Table::new(COLUMNS);
    match args.sweep {
        None => {
            let s = args
                .s
                .ok_or_else(|| Error::Config("--s is required unless sweeping".into()))?;
            let eps = super::resolve_eps(args.eps, args.snr_db)?;
            point_rows(&mut table, s, eps, args)?;
        }
        Some(SweepAxis::S) => {
            let eps = super::resolve_eps(args.eps, args.snr_db)?;
            if args.s.is_some() {
                return Err(Error::Config("--s conflicts with --sweep s".into()));
            }
            let (from, to) = sweep_range(args, 2.0, 10.0)?;
            for i in 0..args.points {
                let inv_s = lerp(from, to, i, args.points);
                point_rows(&mut table, 1.0 / inv_s, eps, args)?;
            }
        }
        Some(SweepAxis::Snr) => {
            let s = args
                .s
                .ok_or_else(|| Error::Config("--sweep snr needs a fixed --s".into()))?;
            if args.eps.is_some() || args.snr_db.is_some() {
                return Err(Error::Config(
                    "--eps/--snr-db conflict with --sweep snr; the axis sets the error level".into(),
                ));
            }
            let (from, to) = sweep_range(args, 4.0, 20.0)?;
            for i in 0..args.points {
                let db = lerp(from, to, i, args.points);
                point_rows(&mut table, s, bounds::snr_db_to_eps(db)?, args)?;
            }
        }
    }
    Ok(table)
}

fn sweep_range(args: &BoundsArgs, default_from: f64, default_to: f64) -> Result<(f64, f64)> {
    let from = args.from.unwrap_or(default_from);
    let to = args.to.unwrap_or(default_to);
    if args.points < 2 || !(from < to) {
        return Err(Error::Config(format!(
            "sweep needs --from < --to and --points >= 2, got [{from}, {to}] with {} points",
            args.points
        )));
    }
    Ok((from, to))
}

fn lerp(from: f64, to: f64, i: usize, points: usize) -> f64 {
    from + (to - from) * i as f64 / (points - 1) as f64
}

/// All bound rows at one (s, eps) point.
fn point_rows(table: &mut Table, s: f64, eps: f64, args: &BoundsArgs) -> Result<()> {
    let r = RegimeParams::new(s, eps)?;
    let delta_exact = args.delta.unwrap_or(eps);
    let delta_closed = args.delta.unwrap_or(eps / std::f64::consts::SQRT_2);

    let plain = [
        bounds::wc_lower(r),
        bounds::wc_upper_closed(r),
        bounds::wc_upper_exact(r),
        bounds::ac_lower(r),
        bounds::ac_upper_closed(r),
    ];
    for report in plain {
        table.push(row(s, eps, None, None, None, &report));
    }
    table.push(row(
        s,
        eps,
        Some(delta_exact),
        None,
        None,
        &bounds::ac_overcomp_exact(r, delta_exact)?,
    ));

    // Finite-dimension success-probability rows only when the point is given.
    if let (Some(o), Some(d)) = (args.o, args.d) {
        match bounds::ac_success_upper(r, o, d) {
            Ok(report) => table.push(row(s, eps, None, Some(o), Some(d), &report)),
            Err(e) => table.push(error_row("success_upper", s, eps, None, Some(o), Some(d), &e)),
        }
        match bounds::cantelli_success_lower_closed(r, delta_closed, o, d) {
            Ok(report) => table.push(row(s, eps, Some(delta_closed), Some(o), Some(d), &report)),
            Err(e) => table.push(error_row(
                "cantelli_closed",
                s,
                eps,
                Some(delta_closed),
                Some(o),
                Some(d),
                &e,
            )),
        }
    }
    Ok(())
}

fn shared_cells(s: f64, eps: f64, delta: Option<f64>, o: Option<f64>, d: Option<usize>) -> Vec<Cell> {
    vec![
        Cell::F(s),
        Cell::F(1.0 / s),
        Cell::F(eps),
        Cell::F(-20.0 * eps.log10()),
        delta.map(Cell::F).into(),
        o.map(Cell::F).into(),
        d.map(|d| Cell::U(d as u64)).into(),
    ]
}

fn row(
    s: f64,
    eps: f64,
    delta: Option<f64>,
    o: Option<f64>,
    d: Option<usize>,
    report: &BoundReport,
) -> Vec<Cell> {
    let mut cells = vec![Cell::from(report.id.as_str())];
    cells.extend(shared_cells(s, eps, delta, o, d));
    cells.extend([
        Cell::F(report.value),
        Cell::F(report.log10_value),
        Cell::B(report.valid),
        report.violated_condition.clone().map(Cell::S).into(),
        report.note.clone().map(Cell::S).into(),
        constants_cell(report),
    ]);
    cells
}

/// A bound whose preconditions reject the point entirely still gets a row,
/// with the failure message in the reason column.
fn error_row(
    id: &str,
    s: f64,
    eps: f64,
    delta: Option<f64>,
    o: Option<f64>,
    d: Option<usize>,
    e: &Error,
) -> Vec<Cell> {
    let mut cells = vec![Cell::from(id)];
    cells.extend(shared_cells(s, eps, delta, o, d));
    cells.extend([
        Cell::Empty,
        Cell::Empty,
        Cell::B(false),
        Cell::from(e.to_string()),
        Cell::Empty,
        Cell::Empty,
    ]);
    cells
}

/// Named constants packed into one `name=value` list so every bound fits
/// the same schema.
fn constants_cell(report: &BoundReport) -> Cell {
    if report.constants.is_empty() {
        return Cell::Empty;
    }
    let parts: Vec<String> = report
        .constants
        .iter()
        .map(|(k, v)| format!("{k}={v:.16e}"))
        .collect();
    Cell::S(parts.join(";"))
}
