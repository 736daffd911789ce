//! Small statistical toolbox: Wilson score intervals for binomial
//! proportions, a one-sample Kolmogorov-Smirnov test against an arbitrary
//! CDF, and streaming mean/variance.

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.9599639845400542;

/// Wilson score interval for `successes` out of `trials` at normal
/// quantile z. Zero trials yield the vacuous interval [0, 1].
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // At the extremes the score interval touches the boundary exactly;
    // spare it the rounding noise of center - half.
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Result of a one-sample Kolmogorov-Smirnov test.
#[derive(Debug, Clone, Copy)]
pub struct KsResult {
    /// Supremum distance between empirical and reference CDF.
    pub statistic: f64,
    /// Asymptotic p-value (small means the sample rejects the CDF).
    pub p_value: f64,
}

/// Survival function of the Kolmogorov distribution,
/// Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2).
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-12 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample KS test of `samples` against the reference CDF. The sample
/// buffer is sorted in place.
pub fn ks_test<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> KsResult {
    assert!(!samples.is_empty(), "KS test needs at least one sample");
    samples.sort_by(|a, b| a.partial_cmp(b).expect("samples must be comparable"));
    let n = samples.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    let sqrt_n = n.sqrt();
    let p_value = kolmogorov_q((sqrt_n + 0.12 + 0.11 / sqrt_n) * d);
    KsResult { statistic: d, p_value }
}

/// Sample mean and unbiased variance in one pass (Welford's recurrence).
pub fn mean_and_variance(xs: &[f64]) -> (f64, f64) {
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (x - mean);
    }
    let var = if xs.len() > 1 { m2 / (xs.len() - 1) as f64 } else { 0.0 };
    (mean, var)
}

/// Standard error of the sample mean.
pub fn standard_error(xs: &[f64]) -> f64 {
    let (_, var) = mean_and_variance(xs);
    (var / xs.len() as f64).sqrt()
}
