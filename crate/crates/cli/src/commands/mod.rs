pub mod bounds;
pub mod scan;
pub mod selftest;
pub mod simulate;
pub mod surface;

use overcomp::{Error, Result};

/// Resolves the `--eps` / `--snr-db` pair into a single error level.
/// Exactly one must be present.
pub fn resolve_eps(eps: Option<f64>, snr_db: Option<f64>) -> Result<f64> {
    match (eps, snr_db) {
        (Some(e), None) => Ok(e),
        (None, Some(db)) => overcomp::bounds::snr_db_to_eps(db),
        (Some(_), Some(_)) => Err(Error::Config(
            "--eps and --snr-db are two spellings of the same parameter; give exactly one".into(),
        )),
        (None, None) => Err(Error::Config("one of --eps or --snr-db is required".into())),
    }
}

/// Sparsity as `k = s * d` with the integrality check scans use.
pub fn resolve_k(d: usize, s: Option<f64>, k: Option<usize>) -> Result<usize> {
    match (s, k) {
        (None, Some(k)) => Ok(k),
        (Some(s), None) => {
            let kf = s * d as f64;
            let k = kf.round() as usize;
            if k == 0 || (kf - k as f64).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "s * d = {kf} must be a positive integer sparsity budget"
                )));
            }
            Ok(k)
        }
        (Some(_), Some(_)) => Err(Error::Config(
            "--s and --k are two spellings of the same parameter; give exactly one".into(),
        )),
        (None, None) => Err(Error::Config("one of --s or --k is required".into())),
    }
}
