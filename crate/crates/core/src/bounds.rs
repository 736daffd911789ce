//! Closed-form bounds on the overcompleteness ratio o = n/d a dictionary
//! needs before k-sparse representation with normalized error at most ε
//! becomes possible, in two regimes: worst case (every unit signal must be
//! representable) and average case (a random isotropic signal is
//! representable with high probability). Also houses the finite-dimension
//! success-probability bounds, subspace coverage, the subset-overlap law,
//! binomial sandwich bounds, and SNR conversions.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::specfun;

/// Dimension-free regime: sparsity factor s = k/d and error budget ε.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeParams {
    pub s: f64,
    pub eps: f64,
}

impl RegimeParams {
    pub fn new(s: f64, eps: f64) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::Domain(format!("sparsity factor s = {s} must lie in (0, 1)")));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Domain(format!("error budget eps = {eps} must lie in (0, 1)")));
        }
        Ok(Self { s, eps })
    }
}

/// Identifies which bound a report evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundId {
    WcLower,
    WcUpperClosed,
    WcUpperExact,
    AcLower,
    AcSuccessUpper,
    AcUpperClosed,
    AcOvercompExact,
    CantelliClosed,
}

impl BoundId {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundId::WcLower => "wc_lower",
            BoundId::WcUpperClosed => "wc_upper_closed",
            BoundId::WcUpperExact => "wc_upper_exact",
            BoundId::AcLower => "ac_lower",
            BoundId::AcSuccessUpper => "ac_success_upper",
            BoundId::AcUpperClosed => "ac_upper_closed",
            BoundId::AcOvercompExact => "ac_overcomp_exact",
            BoundId::CantelliClosed => "cantelli_closed",
        }
    }
}

/// One evaluated bound: linear and log10 values, validity, and the
/// intermediate constants that entered the formula.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub id: BoundId,
    /// Linear value; saturates to +inf past 1e300. NaN when invalid.
    pub value: f64,
    /// log10 of the value; stays finite far beyond f64 range.
    pub log10_value: f64,
    pub valid: bool,
    /// Which hypothesis failed, when `valid` is false.
    pub violated_condition: Option<String>,
    /// Non-fatal remarks (regime switches, rounding substitutions, clamps).
    pub note: Option<String>,
    /// Evaluated constants by name (c1..c5, h, m, ...).
    pub constants: BTreeMap<String, f64>,
}

impl BoundReport {
    fn from_ln(id: BoundId, ln_value: f64) -> Self {
        let value = if ln_value > 300.0 * std::f64::consts::LN_10 {
            f64::INFINITY
        } else {
            ln_value.exp()
        };
        Self {
            id,
            value,
            log10_value: ln_value / std::f64::consts::LN_10,
            valid: true,
            violated_condition: None,
            note: None,
            constants: BTreeMap::new(),
        }
    }

    fn exactly(id: BoundId, value: f64) -> Self {
        Self {
            id,
            value,
            log10_value: value.log10(),
            valid: true,
            violated_condition: None,
            note: None,
            constants: BTreeMap::new(),
        }
    }

    fn invalid(id: BoundId, condition: &str) -> Self {
        Self {
            id,
            value: f64::NAN,
            log10_value: f64::NAN,
            valid: false,
            violated_condition: Some(condition.to_string()),
            note: None,
            constants: BTreeMap::new(),
        }
    }

    fn with_constant(mut self, name: &str, v: f64) -> Self {
        self.constants.insert(name.to_string(), v);
        self
    }

    fn with_note(mut self, note: String) -> Self {
        self.note = Some(note);
        self
    }
}

/// c1 prefactor of the worst/average-case lower bounds.
fn c1_constant(s: f64, eps: f64) -> f64 {
    let ln_c1 = -1.0 + 0.5 * ((1.0 / s - 1.0) * (-s).ln_1p() - (-eps * eps).ln_1p());
    ln_c1.exp()
}

/// Lower bound on the worst-case minimal overcompleteness:
/// o >= c1(s, ε) · s^{3/2} · (1/ε)^{1/s - 1} while ε² < 1 - s.
/// Past that error budget a square dictionary already suffices (o = 1).
pub fn wc_lower(r: RegimeParams) -> BoundReport {
    let RegimeParams { s, eps } = r;
    if eps * eps >= 1.0 - s {
        return BoundReport::exactly(BoundId::WcLower, 1.0)
            .with_note("o = 1 regime: eps >= sqrt(1 - s)".to_string());
    }
    let c1 = c1_constant(s, eps);
    let ln_value = c1.ln() + 1.5 * s.ln() + (1.0 / s - 1.0) * (1.0 / eps).ln();
    BoundReport::from_ln(BoundId::WcLower, ln_value).with_constant("c1", c1)
}

/// Which closed-form prefactor the worst-case upper bound uses; the two
/// forms disagree in the last term of the density factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum C2Form {
    /// sqrt(e)/(x ln x) term; consistent with the exact-form pipeline.
    Derivation,
    /// sqrt(e)/x term, slightly looser for small x.
    Simplified,
}

/// Density factor variant with sqrt(e)/x in place of sqrt(e)/(x ln x).
fn covering_h_simplified(x: f64) -> Result<f64> {
    if !(x >= 3.0) {
        return Err(Error::Domain(format!("covering density factor needs x >= 3, got {x}")));
    }
    let lx = x.ln();
    let e_sqrt = std::f64::consts::E.sqrt();
    Ok((1.0 + 2.0 / lx) * (1.0 + lx.ln() / lx + e_sqrt / x))
}

/// Rounds 1/s to the nearest integer when it is one up to tolerance,
/// otherwise takes the ceiling; returns (t, was_rounded_up).
fn integer_inverse_s(s: f64) -> (f64, bool) {
    let x = 1.0 / s;
    let nearest = x.round();
    if (x - nearest).abs() <= 1.0e-9 {
        (nearest, false)
    } else {
        (x.ceil(), true)
    }
}

/// Sufficient overcompleteness for worst-case representation, closed form:
/// o >= c2 · ln(1/s) · s^{-1/2} · (1/ε)^{1/s - 1} with
/// c2 = sqrt(2π(1 - ε²(1-s)/(1+s))) · h(1/s), for s <= 1/3.
/// A non-integer 1/s is rounded up to the next integer, which only
/// strengthens the requirement.
pub fn wc_upper_closed_with(r: RegimeParams, form: C2Form) -> BoundReport {
    let RegimeParams { s, eps } = r;
    if s > 1.0 / 3.0 {
        return BoundReport::invalid(BoundId::WcUpperClosed, "s <= 1/3 violated");
    }
    let (t, rounded) = integer_inverse_s(s);
    let s_eff = 1.0 / t;
    let h = match form {
        C2Form::Derivation => specfun::covering_h(t),
        C2Form::Simplified => covering_h_simplified(t),
    }
    .expect("t >= 3 is guaranteed by the s <= 1/3 gate");
    let pref = (2.0 * std::f64::consts::PI
        * (1.0 - eps * eps * (1.0 - s_eff) / (1.0 + s_eff)))
        .sqrt();
    let c2 = pref * h;
    let ln_value = c2.ln() + t.ln().ln() + 0.5 * t.ln() + (t - 1.0) * (1.0 / eps).ln();
    let mut report = BoundReport::from_ln(BoundId::WcUpperClosed, ln_value)
        .with_constant("c2", c2)
        .with_constant("h", h);
    if rounded {
        report = report.with_note(format!("1/s = {} is not an integer; used {t}", 1.0 / s));
    }
    report
}

/// `wc_upper_closed_with` in the derivation form, which is the variant the
/// exact-form pipeline actually proves.
pub fn wc_upper_closed(r: RegimeParams) -> BoundReport {
    wc_upper_closed_with(r, C2Form::Derivation)
}

/// Sufficient overcompleteness, exact beta form:
/// o >= 2 h(1/s) ln(1/s) / I_{ε²}((1-s)/(2s), 1/2), for 1/s >= 3.
pub fn wc_upper_exact(r: RegimeParams) -> BoundReport {
    let RegimeParams { s, eps } = r;
    let x = 1.0 / s;
    if x < 3.0 {
        return BoundReport::invalid(BoundId::WcUpperExact, "1/s >= 3 violated");
    }
    let h = specfun::covering_h(x).expect("x >= 3 checked above");
    let ln_i = specfun::ln_reg_inc_beta((1.0 - s) / (2.0 * s), 0.5, eps * eps)
        .expect("arguments are in range by construction");
    let ln_value = std::f64::consts::LN_2 + h.ln() + x.ln().ln() - ln_i;
    BoundReport::from_ln(BoundId::WcUpperExact, ln_value).with_constant("h", h)
}

/// Lower bound on the average-case minimal overcompleteness; the same
/// expression as `wc_lower` but stated only for ε < sqrt(1 - s).
pub fn ac_lower(r: RegimeParams) -> BoundReport {
    let RegimeParams { s, eps } = r;
    if eps * eps >= 1.0 - s {
        return BoundReport::invalid(BoundId::AcLower, "eps < sqrt(1 - s) violated");
    }
    let mut report = wc_lower(r);
    report.id = BoundId::AcLower;
    report
}

/// Upper bound on the success probability of ANY scheme at overcompleteness
/// o in dimension d:
/// P <= (2πs(1 - s/o))^{-1/2} · d^{-1/2} · exp(-c3 d),
/// c3 = D(1-s || ε²)/2 - o·H(s/o). Clamped to 1 when the exponent helps
/// nothing; decays geometrically in d exactly when c3 > 0.
pub fn ac_success_upper(r: RegimeParams, o: f64, d: usize) -> Result<BoundReport> {
    let RegimeParams { s, eps } = r;
    if !(o > s) {
        return Err(Error::Domain(format!("overcompleteness o = {o} must exceed s = {s}")));
    }
    if d == 0 {
        return Err(Error::Domain("dimension d must be positive".into()));
    }
    let df = d as f64;
    let kl = specfun::bernoulli_kl(1.0 - s, eps * eps)?;
    let ent = specfun::bernoulli_entropy(s / o)?;
    let c3 = 0.5 * kl - o * ent;
    let ln_raw = -0.5 * (2.0 * std::f64::consts::PI * s * (1.0 - s / o)).ln()
        - 0.5 * df.ln()
        - c3 * df;
    let report = if ln_raw > 0.0 {
        BoundReport::exactly(BoundId::AcSuccessUpper, 1.0)
            .with_note("bound exceeded 1 and was clamped".to_string())
    } else {
        BoundReport::from_ln(BoundId::AcSuccessUpper, ln_raw)
    };
    Ok(report.with_constant("c3", c3))
}

/// Upper bound on the average-case minimal overcompleteness, closed form:
/// o <= c4 · s^{1/2} · (1/ε)^{1/s - 1} with
/// c4 = sqrt(π/2 · (1 - ε²(1-s)/(1+s))). Stated for 1/s integer; other
/// sparsity factors evaluate the same formula and carry a remark.
pub fn ac_upper_closed(r: RegimeParams) -> BoundReport {
    let RegimeParams { s, eps } = r;
    let c4 = (std::f64::consts::FRAC_PI_2 * (1.0 - eps * eps * (1.0 - s) / (1.0 + s))).sqrt();
    let ln_value = c4.ln() + 0.5 * s.ln() + (1.0 / s - 1.0) * (1.0 / eps).ln();
    let mut report =
        BoundReport::from_ln(BoundId::AcUpperClosed, ln_value).with_constant("c4", c4);
    let (_, rounded) = integer_inverse_s(s);
    if rounded {
        report = report.with_note(format!("1/s = {} is not an integer", 1.0 / s));
    }
    report
}

/// Upper bound on the average-case minimal overcompleteness, exact beta
/// form at approximation level delta <= ε:
/// o >= s / I_{δ²}((1-s)/(2s), 1/2) suffices. Also records the implied
/// per-block atom count m = ceil(1 / I_{δ²}).
pub fn ac_overcomp_exact(r: RegimeParams, delta: f64) -> Result<BoundReport> {
    let RegimeParams { s, eps } = r;
    if !(delta > 0.0 && delta <= eps) {
        return Err(Error::Domain(format!("delta = {delta} must lie in (0, eps = {eps}]")));
    }
    let ln_i = specfun::ln_reg_inc_beta((1.0 - s) / (2.0 * s), 0.5, delta * delta)?;
    let ln_value = s.ln() - ln_i;
    let m = (-ln_i).exp().ceil();
    Ok(BoundReport::from_ln(BoundId::AcOvercompExact, ln_value).with_constant("m", m))
}

/// One-sided Chebyshev lower bound on the success probability of the
/// restricted block scheme, from numerically computed block-maximum
/// moments (mu, sigma2):
/// P >= (1 + (1+2s)·σ² / ((μ - 1 + ε²)² · s · d))^{-1}.
/// Needs μ strictly above 1 - ε²; a margin under 1e-8 is rejected as
/// numerically violated.
pub fn cantelli_success_lower(
    mu: f64,
    sigma2: f64,
    r: RegimeParams,
    d: usize,
) -> Result<f64> {
    let RegimeParams { s, eps } = r;
    let margin = mu - (1.0 - eps * eps);
    if !(margin > 1.0e-8) {
        return Err(Error::Domain(format!(
            "mean mu = {mu} must exceed 1 - eps^2 = {} by more than 1e-8",
            1.0 - eps * eps
        )));
    }
    if !(sigma2 >= 0.0) {
        return Err(Error::Domain(format!("variance sigma2 = {sigma2} must be nonnegative")));
    }
    if d == 0 {
        return Err(Error::Domain("dimension d must be positive".into()));
    }
    let df = d as f64;
    Ok(1.0 / (1.0 + (1.0 + 2.0 * s) * sigma2 / (margin * margin * s * df)))
}

/// Closed-form variant of the restricted-scheme success lower bound:
/// P >= 1 - c5/(c5 + d) with
/// c5 = [(1-2ε²) (I_{1-2ε²}(1/2, (1-s)/(2s)))^{o/s} + ε⁴]
///        / (ε² - δ²)² · (1+2s)/s,
/// valid for ε² <= 1/2, δ < ε, and o at least the exact-form requirement.
pub fn cantelli_success_lower_closed(
    r: RegimeParams,
    delta: f64,
    o: f64,
    d: usize,
) -> Result<BoundReport> {
    let RegimeParams { s, eps } = r;
    if d == 0 {
        return Err(Error::Domain("dimension d must be positive".into()));
    }
    if eps * eps > 0.5 {
        return Ok(BoundReport::invalid(BoundId::CantelliClosed, "eps^2 <= 1/2 violated"));
    }
    if !(delta > 0.0 && delta < eps) {
        return Ok(BoundReport::invalid(BoundId::CantelliClosed, "0 < delta < eps violated"));
    }
    let b = (1.0 - s) / (2.0 * s);
    let i_delta = specfun::reg_inc_beta(b, 0.5, delta * delta)?;
    if o * i_delta < s {
        return Ok(BoundReport::invalid(
            BoundId::CantelliClosed,
            "o >= s / I_{delta^2}((1-s)/(2s), 1/2) violated",
        ));
    }
    let df = d as f64;
    let ln_tail = (o / s) * specfun::ln_reg_inc_beta(0.5, b, 1.0 - 2.0 * eps * eps)?;
    let e2 = eps * eps;
    let numer = (1.0 - 2.0 * e2) * ln_tail.exp() + e2 * e2;
    let gap = e2 - delta * delta;
    let c5 = numer / (gap * gap) * (1.0 + 2.0 * s) / s;
    let value = 1.0 - c5 / (c5 + df);
    Ok(BoundReport::exactly(BoundId::CantelliClosed, value).with_constant("c5", c5))
}

/// Relative sphere area covered by the ε-dilation of a k-dimensional
/// subspace in d dimensions: I_{ε²}((d-k)/2, k/2).
pub fn subspace_coverage(d: usize, k: usize, eps: f64) -> Result<f64> {
    if k < 1 || k >= d {
        return Err(Error::Domain(format!("coverage needs 1 <= k < d, got k = {k}, d = {d}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("coverage needs eps in (0, 1), got {eps}")));
    }
    specfun::reg_inc_beta((d - k) as f64 / 2.0, k as f64 / 2.0, eps * eps)
}

/// C(n, k) in u128, None on overflow anywhere along the way.
fn binomial_u128(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 1..=k {
        // The running product stays integral at every step.
        c = c.checked_mul((n - k + i) as u128)? / (i as u128);
    }
    Some(c)
}

/// ln C(n, k) through log-gamma.
fn ln_choose(n: f64, k: f64) -> f64 {
    specfun::ln_gamma(n + 1.0) - specfun::ln_gamma(k + 1.0) - specfun::ln_gamma(n - k + 1.0)
}

/// Distribution of the overlap between two independent uniformly random
/// k-subsets of n atoms: the hypergeometric(n, k, k) pmf over l = 0..=k.
/// Small cases are evaluated in exact integer arithmetic.
pub fn overlap_pmf(n: usize, k: usize) -> Result<Vec<f64>> {
    if k < 1 || k > n {
        return Err(Error::Domain(format!("overlap needs 1 <= k <= n, got k = {k}, n = {n}")));
    }
    let (nu, ku) = (n as u64, k as u64);
    let mut pmf = Vec::with_capacity(k + 1);
    if let Some(total) = binomial_u128(nu, ku) {
        let mut exact = true;
        for l in 0..=ku {
            match binomial_u128(ku, l).zip(binomial_u128(nu - ku, ku - l)) {
                Some((ways_in, ways_out)) => match ways_in.checked_mul(ways_out) {
                    Some(num) => pmf.push(num as f64 / total as f64),
                    None => {
                        exact = false;
                        break;
                    }
                },
                None => {
                    exact = false;
                    break;
                }
            }
        }
        if exact {
            return Ok(pmf);
        }
        pmf.clear();
    }
    // Counts overflow u128; fall back to the log-gamma form.
    let (nf, kf) = (n as f64, k as f64);
    let ln_total = ln_choose(nf, kf);
    for l in 0..=k {
        let lf = l as f64;
        if k - l > n - k {
            pmf.push(0.0);
            continue;
        }
        pmf.push((ln_choose(kf, lf) + ln_choose(nf - kf, kf - lf) - ln_total).exp());
    }
    Ok(pmf)
}

/// Entropy sandwich for the binomial coefficient, all in nats:
/// nH(k/n) - ln(8k(1-k/n))/2 <= ln C(n,k) <= nH(k/n) - ln(2πk(1-k/n))/2.
/// Returns (lower, exact, upper).
pub fn log_binomial_bounds(n: usize, k: usize) -> Result<(f64, f64, f64)> {
    if k == 0 || k >= n {
        return Err(Error::Domain(format!("bounds need 0 < k < n, got k = {k}, n = {n}")));
    }
    let (nf, kf) = (n as f64, k as f64);
    let alpha = kf / nf;
    let ent = specfun::bernoulli_entropy(alpha)?;
    let spread = kf * (1.0 - alpha);
    let lower = nf * ent - 0.5 * (8.0 * spread).ln();
    let upper = nf * ent - 0.5 * (2.0 * std::f64::consts::PI * spread).ln();
    Ok((lower, ln_choose(nf, kf), upper))
}

/// ε from an SNR in decibels: ε = 10^(-snr/20).
pub fn snr_db_to_eps(snr_db: f64) -> Result<f64> {
    if !(snr_db > 0.0) {
        return Err(Error::Domain(format!(
            "snr_db = {snr_db} must be positive for an error budget below 1"
        )));
    }
    Ok(10.0f64.powf(-snr_db / 20.0))
}

/// SNR in decibels from ε: 20 log10(1/ε).
pub fn eps_to_snr_db(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps = {eps} must lie in (0, 1)")));
    }
    Ok(-20.0 * eps.log10())
}
