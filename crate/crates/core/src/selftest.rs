//! Named self-check suites.
//!
//! Each suite re-derives one family of claims the library rests on
//! (closed-form beta identities, bound orderings, sampling laws, coder
//! oracles) and reports pass/fail with a one-line diagnostic. The CLI
//! `selftest` subcommand runs them by name; the integration tests reuse
//! them so the command and the test suite cannot drift apart.

use crate::bounds::{self, C2Form, RegimeParams};
use crate::coder;
use crate::error::{Error, Result};
use crate::montecarlo;
use crate::randmodel::{self, derive_stream, ProblemInstance, Signal};
use crate::specfun;
use crate::stats;

/// Outcome of one suite.
#[derive(Debug, Clone)]
pub struct PropertyOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// One-line diagnostic: worst margins, p-values, or a printed pmf.
    pub detail: String,
}

/// Suite knobs. `n` and `k` are only consulted by the `overlap` suite,
/// which prints the pmf for that pair; everything else keys off `seed`.
#[derive(Debug, Clone, Copy)]
pub struct SelftestOptions {
    pub seed: u64,
    pub n: Option<usize>,
    pub k: Option<usize>,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        Self { seed: 0, n: None, k: None }
    }
}

type Suite = fn(&SelftestOptions) -> Result<PropertyOutcome>;

/// All suites in run order. Order matters only for readability of the
/// report: cheap algebraic checks first, sampling checks last.
pub const PROPERTIES: &[(&str, Suite)] = &[
    ("beta_suite", beta_suite),
    ("beta_lower_bound", beta_lower_bound_suite),
    ("cap_bounds", cap_bounds_suite),
    ("constants", constants_suite),
    ("sandwich", sandwich_suite),
    ("binomial_sandwich", binomial_sandwich_suite),
    ("overlap", overlap_suite),
    ("projection_law", projection_law_suite),
    ("block_statistics", block_statistics_suite),
    ("identity_omp", identity_omp_suite),
    ("block_equivalence", block_equivalence_suite),
    ("order_stat", order_stat_suite),
    ("variance_bound", variance_bound_suite),
    ("zmoments_agreement", zmoments_agreement_suite),
];

/// Registered suite names, in run order.
pub fn property_names() -> Vec<&'static str> {
    PROPERTIES.iter().map(|(name, _)| *name).collect()
}

/// Runs every suite, converting internal errors into failed outcomes so
/// one broken suite cannot hide the results of the others.
pub fn run_all(opts: &SelftestOptions) -> Vec<PropertyOutcome> {
    PROPERTIES
        .iter()
        .map(|(name, suite)| run_suite(name, *suite, opts))
        .collect()
}

/// Runs a single suite by name.
pub fn run_named(name: &str, opts: &SelftestOptions) -> Result<PropertyOutcome> {
    for (reg_name, suite) in PROPERTIES {
        if *reg_name == name {
            return Ok(run_suite(reg_name, *suite, opts));
        }
    }
    Err(Error::Config(format!(
        "unknown property '{name}'; available: {}",
        property_names().join(", ")
    )))
}

fn run_suite(name: &'static str, suite: Suite, opts: &SelftestOptions) -> PropertyOutcome {
    match suite(opts) {
        Ok(outcome) => outcome,
        Err(e) => PropertyOutcome {
            name,
            passed: false,
            detail: format!("suite error: {e}"),
        },
    }
}

fn outcome(name: &'static str, passed: bool, detail: String) -> PropertyOutcome {
    PropertyOutcome { name, passed, detail }
}

// --- algebraic suites -----------------------------------------------------

/// Closed-form oracles for the regularized incomplete beta function:
/// the arcsine law at (1/2, 1/2), the elementary forms at a in {1, 2},
/// b in {1/2, 1, 4}, and inverse round-trips.
fn beta_suite(_opts: &SelftestOptions) -> Result<PropertyOutcome> {
    let mut worst_closed = 0.0f64;
    let mut worst_inv = 0.0f64;
    for i in 1..50 {
        let x = i as f64 / 50.0;

        let arcsine = 2.0 / std::f64::consts::PI * x.sqrt().asin();
        worst_closed = worst_closed.max((specfun::reg_inc_beta(0.5, 0.5, x)? - arcsine).abs());

        for b in [0.5, 1.0, 4.0] {
            let tail = (1.0 - x).powf(b);
            let a1 = 1.0 - tail;
            let a2 = 1.0 - tail * (1.0 + b * x);
            worst_closed = worst_closed.max((specfun::reg_inc_beta(1.0, b, x)? - a1).abs());
            worst_closed = worst_closed.max((specfun::reg_inc_beta(2.0, b, x)? - a2).abs());
        }

        for (a, b) in [(0.5, 0.5), (2.0, 0.5), (0.5, 2.0), (3.0, 5.0), (40.0, 2.0)] {
            let p = specfun::reg_inc_beta(a, b, x)?;
            let back = specfun::reg_inc_beta_inv(a, b, p)?;
            worst_inv = worst_inv.max((back - x).abs());
        }
    }
    let passed = worst_closed <= 1e-10 && worst_inv <= 1e-9;
    Ok(outcome(
        "beta_suite",
        passed,
        format!("max closed-form error {worst_closed:.2e}, max inverse round-trip {worst_inv:.2e}"),
    ))
}

/// The pointwise lower bound on I_x(a, b) for b <= 1 never exceeds the
/// function, is exact at b = 1, and dominates the classical cap bound.
fn beta_lower_bound_suite(_opts: &SelftestOptions) -> Result<PropertyOutcome> {
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_b1 = 0.0f64;
    let mut points = 0usize;
    for ia in 1..=20 {
        let a = ia as f64 * 0.25;
        for ib in 1..=10 {
            let b = ib as f64 * 0.1;
            for ix in 1..=50 {
                let x = ix as f64 / 51.0;
                let lower = specfun::beta_lower_bound(a, b, x)?;
                let exact = specfun::reg_inc_beta(a, b, x)?;
                worst_excess = worst_excess.max(lower - exact);
                if ib == 10 {
                    worst_b1 = worst_b1.max((lower - exact).abs());
                }
                points += 1;
            }
        }
    }
    let passed = worst_excess <= 1e-12 && worst_b1 <= 1e-12;
    Ok(outcome(
        "beta_lower_bound",
        passed,
        format!("{points} grid points, worst excess over exact {worst_excess:.2e}, worst b=1 gap {worst_b1:.2e}"),
    ))
}

/// Spherical cap area bounds: the sharpened lower bound dominates the
/// classical one, both bracket the exact beta value, and the sharpened
/// form is within 0.1% of the upper bound at d = 10^4, eps = 0.5.
fn cap_bounds_suite(_opts: &SelftestOptions) -> Result<PropertyOutcome> {
    let mut worst_order = f64::NEG_INFINITY;
    for d in [2usize, 3, 4, 5, 10, 50, 100, 1000, 10_000] {
        for ie in 1..=19 {
            let eps = ie as f64 * 0.05;
            let cb = specfun::cap_bounds_frankl(d, eps)?;
            // Exact relative cap area, in logs so the deep tail stays finite.
            let ln_exact = specfun::ln_reg_inc_beta((d as f64 - 1.0) / 2.0, 0.5, eps * eps)?
                - std::f64::consts::LN_2;
            // Chain: classical lower <= sharpened lower <= exact <= upper.
            worst_order = worst_order.max(cb.ln_lower - cb.ln_our_lower);
            worst_order = worst_order.max(cb.ln_our_lower - ln_exact);
            worst_order = worst_order.max(ln_exact - cb.ln_upper);
        }
    }
    let tight = specfun::cap_bounds_frankl(10_000, 0.5)?;
    let ratio = (tight.ln_our_lower - tight.ln_upper).exp();
    let passed = worst_order <= 1e-12 && ratio >= 0.999;
    Ok(outcome(
        "cap_bounds",
        passed,
        format!("worst ordering slack {worst_order:.2e} (log scale), tightness ratio {ratio:.6} at d=10000 eps=0.5"),
    ))
}

/// Prefactor claims on 0.01-step grids: c1 >= e^(-3/2) wherever the
/// worst-case lower bound applies, c4 <= sqrt(pi/2) everywhere, and the
/// derivation-form c2 <= 12 for s <= 1/3.
fn constants_suite(_opts: &SelftestOptions) -> Result<PropertyOutcome> {
    let c1_floor = (-1.5f64).exp();
    let c4_ceil = (std::f64::consts::PI / 2.0).sqrt();
    let mut c1_min = f64::INFINITY;
    let mut c4_max = f64::NEG_INFINITY;
    let mut c2_max = f64::NEG_INFINITY;
    for i in 1..=99 {
        let s = i as f64 * 0.01;
        for j in 1..=99 {
            let eps = j as f64 * 0.01;
            let r = RegimeParams::new(s, eps)?;
            let wl = bounds::wc_lower(r);
            if let Some(c1) = wl.constants.get("c1") {
                c1_min = c1_min.min(*c1);
            }
            if let Some(c4) = bounds::ac_upper_closed(r).constants.get("c4") {
                c4_max = c4_max.max(*c4);
            }
            if s <= 1.0 / 3.0 {
                let wu = bounds::wc_upper_closed_with(r, C2Form::Derivation);
                if let Some(c2) = wu.constants.get("c2") {
                    c2_max = c2_max.max(*c2);
                }
            }
        }
    }
    let passed = c1_min >= c1_floor && c4_max <= c4_ceil && c2_max <= 12.0;
    Ok(outcome(
        "constants",
        passed,
        format!("min c1 {c1_min:.6} (floor {c1_floor:.6}), max c4 {c4_max:.6} (ceil {c4_ceil:.6}), max c2 {c2_max:.4} (ceil 12)"),
    ))
}

/// The five overcompleteness bounds nest at every grid point where all
/// their hypotheses hold: worst-case lower <= exact average-case <=
/// closed average-case <= exact worst-case <= closed worst-case.
fn sandwich_suite(_opts: &SelftestOptions) -> Result<PropertyOutcome> {
    let mut worst_gap = f64::NEG_INFINITY;
    let mut points = 0usize;
    for i in 1..=33 {
        let s = i as f64 * 0.01;
        if s > 1.0 / 3.0 {
            continue;
        }
        for j in 1.. {
            let eps = j as f64 * 0.01;
            if eps * eps >= 1.0 - s || eps >= 1.0 {
                break;
            }
            let r = RegimeParams::new(s, eps)?;
            let chain = [
                bounds::wc_lower(r).log10_value,
                bounds::ac_overcomp_exact(r, eps)?.log10_value,
                bounds::ac_upper_closed(r).log10_value,
                bounds::wc_upper_exact(r).log10_value,
                bounds::wc_upper_closed(r).log10_value,
            ];
            for w in chain.windows(2) {
                worst_gap = worst_gap.max(w[0] - w[1]);
            }
            points += 1;
        }
    }
    // A vacuously empty grid would be a bug in the filter itself.
    let passed = worst_gap <= 1e-9 && points > 1000;
    Ok(outcome(
        "sandwich",
        passed,
        format!("{points} hypothesis-valid grid points, worst inversion {worst_gap:.2e} (log10 scale)"),
    ))
}

/// Entropy-form bounds on log C(n, k) bracket the exact value.
fn binomial_sandwich_suite(_opts: &SelftestOptions) -> Result<PropertyOutcome> {
    let mut worst = f64::NEG_INFINITY;
    let mut points = 0usize;
    for n in [2usize, 3, 5, 10, 20, 40, 60, 100, 400, 1000] {
        for k in 1..n {
            let (lower, exact, upper) = bounds::log_binomial_bounds(n, k)?;
            worst = worst.max(lower - exact);
            worst = worst.max(exact - upper);
            points += 1;
        }
    }
    let (_, exact_252, _) = bounds::log_binomial_bounds(10, 5)?;
    let anchor = (exact_252 - 252.0f64.ln()).abs();
    let passed = worst <= 1e-12 && anchor <= 1e-12;
    Ok(outcome(
        "binomial_sandwich",
        passed,
        format!("{points} (n, k) pairs, worst bracket violation {worst:.2e}, ln C(10,5) error {anchor:.2e}"),
    ))
}

// --- distribution suites ---------------------------------------------------

/// Exact enumeration cap for the overlap brute force; C(n, k) above this
/// is skipped and only the closed-form moment checks run.
const OVERLAP_BRUTE_CAP: f64 = 2e6;

/// Overlap of two random k-subsets of n atoms: pmf against exact
/// enumeration, mean k^2/n, and the hypergeometric standard deviation,
/// also spot-checked at (8,2), (40,10), (200,50).
fn overlap_suite(opts: &SelftestOptions) -> Result<PropertyOutcome> {
    let n = opts.n.unwrap_or(8);
    let k = opts.k.unwrap_or(2);
    let pmf = bounds::overlap_pmf(n, k)?;

    let mut worst = 0.0f64;
    let (_, ln_total, _) = if 0 < k && k < n {
        bounds::log_binomial_bounds(n, k)?
    } else {
        (0.0, 0.0, 0.0)
    };
    let detail_pmf = if ln_total.exp() <= OVERLAP_BRUTE_CAP {
        let counts = overlap_counts_brute(n, k);
        let total: u64 = counts.iter().sum();
        for (p, c) in pmf.iter().zip(&counts) {
            worst = worst.max((p - *c as f64 / total as f64).abs());
        }
        let fracs: Vec<String> = counts.iter().map(|c| format!("{c}/{total}")).collect();
        format!("[{}]", fracs.join(", "))
    } else {
        let vals: Vec<String> = pmf.iter().map(|p| format!("{p:.6}")).collect();
        format!("[{}]", vals.join(", "))
    };

    let mut worst_moment = 0.0f64;
    for (nn, kk) in [(n, k), (8, 2), (40, 10), (200, 50)] {
        let p = bounds::overlap_pmf(nn, kk)?;
        let mean: f64 = p.iter().enumerate().map(|(l, q)| l as f64 * q).sum();
        let msq: f64 = p.iter().enumerate().map(|(l, q)| (l * l) as f64 * q).sum();
        let nf = nn as f64;
        let kf = kk as f64;
        let want_mean = kf * kf / nf;
        let want_sd = if nn == 1 {
            0.0
        } else {
            (kf * (kf / nf) * (1.0 - kf / nf) * (nf - kf) / (nf - 1.0)).sqrt()
        };
        worst_moment = worst_moment.max((mean - want_mean).abs());
        worst_moment = worst_moment.max(((msq - mean * mean).max(0.0).sqrt() - want_sd).abs());
    }

    let passed = worst <= 1e-12 && worst_moment <= 1e-9;
    Ok(outcome(
        "overlap",
        passed,
        format!("pmf({n}, {k}) = {detail_pmf}; enumeration gap {worst:.2e}, moment gap {worst_moment:.2e}"),
    ))
}

/// Overlap counts of the fixed subset {0..k} against every k-subset of
/// {0..n}, by lexicographic enumeration.
fn overlap_counts_brute(n: usize, k: usize) -> Vec<u64> {
    let mut counts = vec![0u64; k + 1];
    let mut comb: Vec<usize> = (0..k).collect();
    loop {
        let ov = comb.iter().filter(|&&j| j < k).count();
        counts[ov] += 1;
        // Advance to the next combination, rightmost movable element first.
        let mut i = k;
        let advanced = loop {
            if i == 0 {
                break false;
            }
            i -= 1;
            if comb[i] != i + n - k {
                comb[i] += 1;
                for j in i + 1..k {
                    comb[j] = comb[j - 1] + 1;
                }
                break true;
            }
        };
        if !advanced {
            return counts;
        }
    }
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut caa = 0.0;
    let mut cbb = 0.0;
    let mut cab = 0.0;
    for (x, y) in a.iter().zip(b) {
        caa += (x - ma) * (x - ma);
        cbb += (y - mb) * (y - mb);
        cab += (x - ma) * (y - mb);
    }
    cab / (caa * cbb).sqrt()
}

/// Standard error of a sample variance, from the central fourth moment.
fn variance_se(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    ((m4 - m2 * m2).max(0.0) / n).sqrt()
}

/// Squared projection law of an isotropic direction: the energy fraction
/// in a fixed k-dimensional slice follows Beta(k/2, (d-k)/2), block
/// energy fractions have the matching mean and variance, and block
/// statistics are uncorrelated across blocks.
fn projection_law_suite(opts: &SelftestOptions) -> Result<PropertyOutcome> {
    const SAMPLES: usize = 10_000;

    // KS test at d = 40, k = 8 against Beta(4, 16).
    let mut rng = derive_stream(opts.seed, 11);
    let mut fractions = Vec::with_capacity(SAMPLES);
    for _ in 0..SAMPLES {
        let x = randmodel::sample_isotropic_signal(40, &mut rng);
        let head: f64 = x.values()[..8].iter().map(|v| v * v).sum();
        let total: f64 = x.values().iter().map(|v| v * v).sum();
        fractions.push(head / total);
    }
    let ks = stats::ks_test(&mut fractions, |t| {
        specfun::reg_inc_beta(4.0, 16.0, t.clamp(0.0, 1.0)).unwrap_or(f64::NAN)
    });

    // Block energy fractions at d = 100, k = 20 (blocks of 5): the first
    // block's fraction has mean 1/k and variance 2(k-1)/(k^2 (d+2)).
    let (d, k) = (100usize, 20usize);
    let dk = d / k;
    let mut rng = derive_stream(opts.seed, 12);
    let mut gamma1 = Vec::with_capacity(SAMPLES);
    for _ in 0..SAMPLES {
        let x = randmodel::sample_isotropic_signal(d, &mut rng);
        let head: f64 = x.values()[..dk].iter().map(|v| v * v).sum();
        let total: f64 = x.values().iter().map(|v| v * v).sum();
        gamma1.push(head / total);
    }
    let (g_mean, g_var) = stats::mean_and_variance(&gamma1);
    let kf = k as f64;
    let want_mean = 1.0 / kf;
    let want_var = 2.0 * (kf - 1.0) / (kf * kf * (d as f64 + 2.0));
    let mean_gap = (g_mean - want_mean).abs();
    let mean_ok = mean_gap <= 3.0 * stats::standard_error(&gamma1);
    let var_gap = (g_var - want_var).abs();
    let var_ok = var_gap <= 3.0 * variance_se(&gamma1);

    // Cross-block independence on a block dictionary: corr(gamma_1, Z_1)
    // and corr(y_0 of block 1, y_0 of block 2) both within 3/sqrt(N).
    let inst = ProblemInstance::new(d, k, 200)?;
    let dict = randmodel::gen_blockdiag_dict(&inst, opts.seed, 13)?;
    let (bd, bn) = dict.block_dims().expect("block dictionary");
    let mut rng = derive_stream(opts.seed, 14);
    let mut g1 = Vec::with_capacity(SAMPLES);
    let mut z1 = Vec::with_capacity(SAMPLES);
    let mut y10 = Vec::with_capacity(SAMPLES);
    let mut y20 = Vec::with_capacity(SAMPLES);
    for _ in 0..SAMPLES {
        let x = randmodel::sample_isotropic_signal(d, &mut rng);
        let xs = x.values();
        let total: f64 = xs.iter().map(|v| v * v).sum();
        let block_energy =
            |b: usize| -> f64 { xs[b * bd..(b + 1) * bd].iter().map(|v| v * v).sum() };
        let y = |j: usize| -> f64 {
            let (row, col) = dict.atom(j);
            let block = row / bd;
            let dot: f64 = col.iter().zip(&xs[row..row + bd]).map(|(c, v)| c * v).sum();
            let norm = dict.atom_norms()[j];
            dot * dot / (norm * norm * block_energy(block))
        };
        g1.push(block_energy(0) / total);
        z1.push((0..bn).map(y).fold(f64::NEG_INFINITY, f64::max));
        y10.push(y(0));
        y20.push(y(bn));
    }
    let limit = 3.0 / (SAMPLES as f64).sqrt();
    let corr_gz = pearson(&g1, &z1);
    let corr_yy = pearson(&y10, &y20);
    let indep_ok = corr_gz.abs() <= limit && corr_yy.abs() <= limit;

    let passed = ks.p_value > 0.01 && mean_ok && var_ok && indep_ok;
    Ok(outcome(
        "projection_law",
        passed,
        format!(
            "KS p = {:.4}; gamma mean gap {mean_gap:.2e}, var gap {var_gap:.2e}; corr(gamma, Z) = {corr_gz:.4}, cross-block corr = {corr_yy:.4}",
            ks.p_value
        ),
    ))
}

/// The restricted block scheme's captured energy matches the
/// quadrature moments: mean within 3 SE, variance at most
/// (1 + 2s) sigma^2 / k up to sampling noise.
fn block_statistics_suite(opts: &SelftestOptions) -> Result<PropertyOutcome> {
    const SAMPLES: usize = 4_000;
    let (d, k, m) = (100usize, 20usize, 30usize);
    let inst = ProblemInstance::new(d, k, k * m)?;
    let dict = randmodel::gen_blockdiag_dict(&inst, opts.seed, 15)?;
    let quad = montecarlo::z_moments_quadrature(inst.s(), m as u64)?;

    let mut rng = derive_stream(opts.seed, 16);
    let mut captured = Vec::with_capacity(SAMPLES);
    for _ in 0..SAMPLES {
        let x = randmodel::sample_isotropic_signal(d, &mut rng);
        let ap = coder::block_exact(&x, &dict)?;
        captured.push(1.0 - ap.relative_error * ap.relative_error);
    }
    let (mean, var) = stats::mean_and_variance(&captured);
    let mean_gap = (mean - quad.mu).abs();
    let mean_ok = mean_gap <= 3.0 * stats::standard_error(&captured);
    let var_cap = (1.0 + 2.0 * inst.s()) * quad.sigma2 / k as f64;
    let var_ok = var <= var_cap + 3.0 * variance_se(&captured);

    let passed = mean_ok && var_ok;
    Ok(outcome(
        "block_statistics",
        passed,
        format!("mean {mean:.5} vs quadrature {:.5} (gap {mean_gap:.2e}), variance {var:.2e} vs cap {var_cap:.2e}", quad.mu),
    ))
}

// --- coder suites ----------------------------------------------------------

/// On the identity dictionary the pursuit must reproduce the sort
/// oracle: keep the k largest-magnitude coordinates. The uniform signal
/// pins the error at exactly sqrt(1 - s).
fn identity_omp_suite(opts: &SelftestOptions) -> Result<PropertyOutcome> {
    let (d, k) = (32usize, 8usize);
    let mut eye = vec![0.0f64; d * d];
    for i in 0..d {
        eye[i * d + i] = 1.0;
    }
    let dict = randmodel::Dictionary::from_dense_columns(d, d, eye)?;

    let mut rng = derive_stream(opts.seed, 17);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let x = randmodel::sample_isotropic_signal(d, &mut rng);
        let ap = coder::omp(&x, &dict, k, 0.0)?;
        let mut energies: Vec<f64> = x.values().iter().map(|v| v * v).collect();
        energies.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let total: f64 = energies.iter().sum();
        let kept: f64 = energies[..k].iter().sum();
        let oracle = (1.0 - kept / total).max(0.0).sqrt();
        worst = worst.max((ap.relative_error - oracle).abs());
    }

    let uniform = Signal::new(vec![1.0; d])?;
    let ap = coder::omp(&uniform, &dict, k, 0.0)?;
    let err2 = ap.relative_error * ap.relative_error;
    let uniform_gap = (err2 - (1.0 - k as f64 / d as f64)).abs();

    let passed = worst <= 1e-10 && uniform_gap <= 1e-14;
    Ok(outcome(
        "identity_omp",
        passed,
        format!("200 signals, worst sort-oracle gap {worst:.2e}; uniform-signal error^2 gap {uniform_gap:.2e}"),
    ))
}

/// The closed-form block coder agrees with brute-force per-block argmax,
/// satisfies the captured-energy identity, and matches the support that
/// group pursuit finds on the same block dictionary.
fn block_equivalence_suite(opts: &SelftestOptions) -> Result<PropertyOutcome> {
    let (d, k, m) = (8usize, 2usize, 5usize);
    let inst = ProblemInstance::new(d, k, k * m)?;
    let mut worst_err = 0.0f64;
    let mut support_mismatches = 0usize;
    for dict_stream in [18u64, 19] {
        let dict = randmodel::gen_blockdiag_dict(&inst, opts.seed, dict_stream)?;
        let (bd, bn) = dict.block_dims().expect("block dictionary");
        let mut rng = derive_stream(opts.seed, 20 + dict_stream);
        for _ in 0..50 {
            let x = randmodel::sample_isotropic_signal(d, &mut rng);
            let xs = x.values();
            let ap = coder::block_exact(&x, &dict)?;

            // Brute force: per block, the atom with the largest squared
            // normalized projection; captured energy is sum gamma_i Z_i.
            let total: f64 = xs.iter().map(|v| v * v).sum();
            let mut captured = 0.0;
            let mut support = Vec::with_capacity(k);
            for b in 0..k {
                let be: f64 = xs[b * bd..(b + 1) * bd].iter().map(|v| v * v).sum();
                let mut best = (f64::NEG_INFINITY, 0);
                for j in b * bn..(b + 1) * bn {
                    let (row, col) = dict.atom(j);
                    let dot: f64 =
                        col.iter().zip(&xs[row..row + bd]).map(|(c, v)| c * v).sum();
                    let norm = dict.atom_norms()[j];
                    let y = if be > 0.0 { dot * dot / (norm * norm * be) } else { 0.0 };
                    if y > best.0 {
                        best = (y, j);
                    }
                }
                captured += best.0.max(0.0) * be / total;
                support.push(best.1);
            }
            let want_err = (1.0 - captured).max(0.0).sqrt();
            worst_err = worst_err.max((ap.relative_error - want_err).abs());
            if ap.support != support {
                support_mismatches += 1;
            }

            // Group pursuit restricted to the same blocks picks the same
            // atoms (it maximizes the same per-block correlation).
            let gp = coder::group_omp(&x, &dict, k, 0.0)?;
            let mut gp_support = gp.support.clone();
            gp_support.sort_unstable();
            if gp_support != support {
                support_mismatches += 1;
            }
        }
    }
    let passed = worst_err <= 1e-10 && support_mismatches == 0;
    Ok(outcome(
        "block_equivalence",
        passed,
        format!("100 signals, worst error gap {worst_err:.2e}, {support_mismatches} support mismatches"),
    ))
}

// --- moment suites ----------------------------------------------------------

/// Quantile lower bound on the mean of the block maximum, checked
/// against sampled means at s = 0.2, m in {2, 10, 50}.
fn order_stat_suite(opts: &SelftestOptions) -> Result<PropertyOutcome> {
    let mut detail = Vec::new();
    let mut passed = true;
    for m in [2u64, 10, 50] {
        let (mean, bound, holds) = montecarlo::order_stat_check(0.2, m, 20_000, opts.seed)?;
        passed &= holds;
        detail.push(format!("m={m}: mean {mean:.4} vs bound {bound:.4}"));
    }
    Ok(outcome("order_stat", passed, detail.join("; ")))
}

/// Variance bound on the block maximum across the (s, m, rho) grid,
/// with the exact 1/4 value at rho = 1/2.
fn variance_bound_suite(_opts: &SelftestOptions) -> Result<PropertyOutcome> {
    let mut min_slack = f64::INFINITY;
    let mut passed = true;
    let mut points = 0usize;
    for s in [0.1, 0.2, 1.0 / 3.0] {
        for m in [1u64, 10, 100, 1000] {
            for rho in [0.05, 0.1, 0.25] {
                let (bound, holds) = montecarlo::variance_bound_check(s, m, rho)?;
                let sigma2 = montecarlo::z_moments_quadrature(s, m)?.sigma2;
                min_slack = min_slack.min(bound - sigma2);
                passed &= holds;
                points += 1;
            }
        }
    }
    let (half_bound, half_holds) = montecarlo::variance_bound_check(0.2, 7, 0.5)?;
    passed &= half_holds && half_bound == 0.25;
    Ok(outcome(
        "variance_bound",
        passed,
        format!("{points} grid points, min slack {min_slack:.2e}; rho=1/2 bound {half_bound}"),
    ))
}

/// Quadrature and Monte Carlo block-maximum moments agree: means within
/// 3 SE, variances within 10% relative.
fn zmoments_agreement_suite(opts: &SelftestOptions) -> Result<PropertyOutcome> {
    let quad = montecarlo::z_moments_quadrature(0.2, 50)?;
    let mc = montecarlo::z_moments_mc(0.2, 50, 100_000, opts.seed)?;
    let mu_gap = (quad.mu - mc.mu).abs();
    let mu_ok = mu_gap <= 3.0 * mc.error_estimate;
    let var_rel = (quad.sigma2 - mc.sigma2).abs() / quad.sigma2;
    let passed = mu_ok && var_rel <= 0.1;
    Ok(outcome(
        "zmoments_agreement",
        passed,
        format!("mean gap {mu_gap:.2e} (3 SE = {:.2e}), variance relative gap {var_rel:.4}", 3.0 * mc.error_estimate),
    ))
}
