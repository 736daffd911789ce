//! The `simulate` subcommand: Monte Carlo success-probability curves over
//! a list of overcompleteness ratios, one row per (scheme, o), with the
//! matching closed-form and quadrature bounds alongside for overlay.

use std::collections::HashMap;

use clap::Args;
use overcomp::bounds::{self, RegimeParams};
use overcomp::montecarlo::{self, CoderKind, DictKind, ZMoments};
use overcomp::{ProblemInstance, Result};

use crate::output::{Cell, Table};

/// One dictionary/coder pairing, parsed from `dict:coder` syntax.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scheme {
    pub dict: DictKind,
    pub coder: CoderKind,
}

pub fn parse_scheme(text: &str) -> std::result::Result<Scheme, String> {
    let scheme = match text {
        "dense:omp" => Scheme { dict: DictKind::Dense, coder: CoderKind::Omp },
        "dense:group" => Scheme { dict: DictKind::Dense, coder: CoderKind::GroupOmp },
        "block:omp" => Scheme { dict: DictKind::Block, coder: CoderKind::Omp },
        "block:group" => Scheme { dict: DictKind::Block, coder: CoderKind::GroupOmp },
        "block:exact" => Scheme { dict: DictKind::Block, coder: CoderKind::BlockExact },
        other => {
            return Err(format!(
                "unknown scheme '{other}'; expected one of dense:omp, dense:group, \
                 block:omp, block:group, block:exact"
            ))
        }
    };
    Ok(scheme)
}

/// Whether this scheme constrains the atom count to multiples of k.
fn needs_k_alignment(scheme: Scheme) -> bool {
    scheme.dict == DictKind::Block || scheme.coder != CoderKind::Omp
}

/// Atom count for a requested overcompleteness ratio, snapped to the
/// scheme's divisibility constraint the same way scans snap.
pub fn atoms_for(o: f64, d: usize, k: usize, aligned: bool) -> usize {
    let n = (o * d as f64).round() as usize;
    if aligned {
        ((n + k / 2) / k).max(1) * k
    } else {
        n.max(1)
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Signal dimension.
    #[arg(long)]
    pub d: usize,
    /// Sparsity factor k/d (alternative: --k).
    #[arg(long)]
    pub s: Option<f64>,
    /// Sparsity budget (alternative: --s).
    #[arg(long, conflicts_with = "s")]
    pub k: Option<usize>,
    /// Permissible relative representation error, in (0, 1].
    #[arg(long, conflicts_with = "snr_db")]
    pub eps: Option<f64>,
    /// Error level as a signal-to-noise ratio: eps = 10^(-snr_db/20).
    #[arg(long)]
    pub snr_db: Option<f64>,
    /// Comma-separated overcompleteness ratios to simulate.
    #[arg(long, value_delimiter = ',', required = true)]
    pub o_list: Vec<f64>,
    /// Dictionary/coder pairing, repeatable. Defaults to dense:omp.
    #[arg(long = "scheme", value_parser = parse_scheme)]
    pub schemes: Vec<Scheme>,
    /// Monte Carlo trials per point.
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    /// Approximation level of the closed success lower bound; must be
    /// below eps. Defaults to eps/sqrt(2).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Draw a fresh dictionary every trial instead of fixing one per point.
    #[arg(long)]
    pub fresh_dict: bool,
}

const COLUMNS: &[&str] = &[
    "dict",
    "coder",
    "d",
    "k",
    "n",
    "o",
    "trials",
    "successes",
    "p_hat",
    "ci_low",
    "ci_high",
    "success_upper",
    "success_upper_reason",
    "cantelli_numeric",
    "cantelli_numeric_reason",
    "cantelli_closed",
    "cantelli_closed_reason",
    "delta",
];

pub fn run(args: &SimulateArgs, seed: u64) -> Result<Table> {
    let k = super::resolve_k(args.d, args.s, args.k)?;
    let eps = super::resolve_eps(args.eps, args.snr_db)?;
    let schemes = if args.schemes.is_empty() {
        vec![Scheme { dict: DictKind::Dense, coder: CoderKind::Omp }]
    } else {
        args.schemes.clone()
    };

    let mut table = Table::new(COLUMNS);
    // Block-maximum moments per atoms-per-block count; quadrature is pure,
    // so one evaluation serves every scheme and ratio that shares m.
    let mut moments: HashMap<u64, Result<ZMoments>> = HashMap::new();

    for scheme in schemes {
        for &o in &args.o_list {
            let n = atoms_for(o, args.d, k, needs_k_alignment(scheme));
            let inst = ProblemInstance::new(args.d, k, n)?;
            let est = montecarlo::estimate_success(
                &inst,
                eps,
                scheme.dict,
                scheme.coder,
                args.trials,
                seed,
                args.fresh_dict,
            )?;
            table.push(point_row(&inst, eps, scheme, &est, args.delta, &mut moments));
        }
    }
    Ok(table)
}

fn point_row(
    inst: &ProblemInstance,
    eps: f64,
    scheme: Scheme,
    est: &montecarlo::SuccessEstimate,
    delta: Option<f64>,
    moments: &mut HashMap<u64, Result<ZMoments>>,
) -> Vec<Cell> {
    let mut row = vec![
        Cell::from(scheme.dict.as_str()),
        Cell::from(scheme.coder.as_str()),
        Cell::U(inst.d as u64),
        Cell::U(inst.k as u64),
        Cell::U(inst.n as u64),
        Cell::F(inst.o()),
        Cell::U(est.trials),
        Cell::U(est.successes),
        Cell::F(est.p_hat),
        Cell::F(est.ci_low),
        Cell::F(est.ci_high),
    ];
    row.extend(overlay_cells(inst, eps, delta, moments));
    row
}

/// The three success-probability bounds at this configuration, each as a
/// (value, reason) cell pair, plus the delta actually used. Bounds that
/// reject the configuration leave the value empty and explain why; the
/// simulated estimate stands either way.
fn overlay_cells(
    inst: &ProblemInstance,
    eps: f64,
    delta: Option<f64>,
    moments: &mut HashMap<u64, Result<ZMoments>>,
) -> Vec<Cell> {
    let delta = delta.unwrap_or(eps / std::f64::consts::SQRT_2);
    let regime = RegimeParams::new(inst.s(), eps);
    let mut cells = Vec::with_capacity(7);

    match &regime {
        Ok(r) => match bounds::ac_success_upper(*r, inst.o(), inst.d) {
            Ok(report) if report.valid => {
                cells.extend([Cell::F(report.value), Cell::Empty]);
            }
            Ok(report) => {
                cells.extend([
                    Cell::Empty,
                    report.violated_condition.map(Cell::S).into(),
                ]);
            }
            Err(e) => cells.extend([Cell::Empty, Cell::from(e.to_string())]),
        },
        Err(e) => cells.extend([Cell::Empty, Cell::from(e.to_string())]),
    }

    // Numeric one-sided Chebyshev bound from quadrature block moments;
    // defined only when the atoms split evenly into k blocks.
    if inst.n % inst.k == 0 {
        let m = (inst.n / inst.k) as u64;
        let quad = moments
            .entry(m)
            .or_insert_with(|| montecarlo::z_moments_quadrature(inst.s(), m));
        match (&regime, &quad) {
            (Ok(r), Ok(z)) => {
                match bounds::cantelli_success_lower(z.mu, z.sigma2, *r, inst.d) {
                    Ok(v) => cells.extend([Cell::F(v), Cell::Empty]),
                    Err(e) => cells.extend([Cell::Empty, Cell::from(e.to_string())]),
                }
            }
            (Err(e), _) => cells.extend([Cell::Empty, Cell::from(e.to_string())]),
            (_, Err(e)) => cells.extend([Cell::Empty, Cell::from(e.to_string())]),
        }
    } else {
        cells.extend([
            Cell::Empty,
            Cell::from(format!("n = {} is not a multiple of k = {}", inst.n, inst.k)),
        ]);
    }

    match &regime {
        Ok(r) => match bounds::cantelli_success_lower_closed(*r, delta, inst.o(), inst.d) {
            Ok(report) if report.valid => cells.extend([Cell::F(report.value), Cell::Empty]),
            Ok(report) => cells.extend([
                Cell::Empty,
                report.violated_condition.map(Cell::S).into(),
            ]),
            Err(e) => cells.extend([Cell::Empty, Cell::from(e.to_string())]),
        },
        Err(e) => cells.extend([Cell::Empty, Cell::from(e.to_string())]),
    }

    cells.push(Cell::F(delta));
    cells
}
