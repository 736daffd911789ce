//! Sparse coders: greedy orthogonal matching pursuit (plain and
//! group-restricted), the exact per-block coder for block-diagonal
//! dictionaries, and a least-squares evaluator for fixed supports.
//!
//! All coders score atoms by normalized correlation |<r, phi>| / ||phi||,
//! so nothing here assumes unit-norm atoms. Errors are always relative:
//! ||x - approximation|| / ||x||.

use crate::error::{Error, Result};
use crate::randmodel::{Dictionary, Signal};

/// Threshold below which a candidate atom is considered numerically
/// dependent on the span of the atoms already selected.
const DEPENDENT_TOL: f64 = 1e-12;

/// Orthogonality defect that triggers a full re-factorization of the
/// incremental QR.
const QR_DEFECT_TOL: f64 = 1e-8;

/// A plain-mode pursuit stops once the best normalized correlation drops
/// below this multiple of the residual norm; the residual is then
/// numerically orthogonal to every remaining atom.
const CORR_FLOOR: f64 = 1e-13;

/// Outcome of a sparse coding run: which atoms were used, with what
/// coefficients, and the relative representation error they achieve.
#[derive(Debug, Clone)]
pub struct SparseApproximation {
    /// Atom indices in selection order. Distinct, each < n.
    pub support: Vec<usize>,
    /// Coefficient for each support atom, in the same order.
    pub coefficients: Vec<f64>,
    /// ||x - sum_i coeff_i atom_i|| / ||x||, recomputed from scratch.
    pub relative_error: f64,
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

#[inline]
fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Subtracts `scale * v` from `target` in place.
#[inline]
fn axpy_neg(target: &mut [f64], scale: f64, v: &[f64]) {
    for (t, &x) in target.iter_mut().zip(v) {
        *t -= scale * x;
    }
}

fn materialize_atom(dict: &Dictionary, j: usize, out: &mut [f64]) {
    out.fill(0.0);
    let (off, seg) = dict.atom(j);
    out[off..off + seg.len()].copy_from_slice(seg);
}

/// Residual x - sum_i coefficients[i] * atom(support[i]), relative to ||x||,
/// clamped to [0, 1]. This is the from-scratch error every coder reports.
fn recompute_relative_error(
    x: &Signal,
    dict: &Dictionary,
    support: &[usize],
    coefficients: &[f64],
) -> f64 {
    let mut residual = x.values().to_vec();
    for (&j, &c) in support.iter().zip(coefficients) {
        let (off, seg) = dict.atom(j);
        axpy_neg(&mut residual[off..off + seg.len()], c, seg);
    }
    (norm(&residual) / x.norm()).clamp(0.0, 1.0)
}

fn check_signal_dims(x: &Signal, dict: &Dictionary) -> Result<()> {
    if x.len() != dict.d() {
        return Err(Error::Config(format!(
            "signal has {} entries but the dictionary is {} x {}",
            x.len(),
            dict.d(),
            dict.n()
        )));
    }
    Ok(())
}

fn check_eps_target(eps_target: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eps_target) {
        return Err(Error::Domain(format!(
            "target relative error must lie in [0, 1], got {eps_target}"
        )));
    }
    Ok(())
}

/// Incremental QR of the materialized atoms accepted so far. Columns of q
/// are orthonormal; r is upper triangular, stored one column at a time.
struct IncrementalQr {
    d: usize,
    q: Vec<f64>,        // d x t, column-major
    r: Vec<Vec<f64>>,   // column c holds rows 0..=c
    z: Vec<f64>,        // q^T x, accumulated as columns arrive
}

impl IncrementalQr {
    fn new(d: usize) -> Self {
        IncrementalQr {
            d,
            q: Vec::new(),
            r: Vec::new(),
            z: Vec::new(),
        }
    }

    fn cols(&self) -> usize {
        self.r.len()
    }

    fn q_col(&self, i: usize) -> &[f64] {
        &self.q[i * self.d..(i + 1) * self.d]
    }

    /// Orthogonalizes `col` against the current basis with two passes of
    /// modified Gram-Schmidt. Returns false when the column is numerically
    /// inside the span (no basis extension). `x` is the signal being coded;
    /// it supplies the new right-hand-side entry.
    fn push(&mut self, col: &[f64], col_norm: f64, x: &[f64]) -> bool {
        let t = self.cols();
        let mut v = col.to_vec();
        let mut rcol = vec![0.0; t + 1];
        for _pass in 0..2 {
            for i in 0..t {
                let h = dot(self.q_col(i), &v);
                axpy_neg(&mut v, h, self.q_col(i));
                rcol[i] += h;
            }
        }
        let vnorm = norm(&v);
        if vnorm <= DEPENDENT_TOL * col_norm {
            return false;
        }
        for e in v.iter_mut() {
            *e /= vnorm;
        }
        rcol[t] = vnorm;
        self.z.push(dot(&v, x));
        self.q.extend_from_slice(&v);
        self.r.push(rcol);
        true
    }

    /// Largest |q_i . q_last| over earlier columns; zero for a single column.
    fn last_column_defect(&self) -> f64 {
        let t = self.cols();
        if t < 2 {
            return 0.0;
        }
        let last = self.q_col(t - 1);
        (0..t - 1)
            .map(|i| dot(self.q_col(i), last).abs())
            .fold(0.0, f64::max)
    }

    /// Solves r c = z by back substitution.
    fn solve(&self) -> Vec<f64> {
        let t = self.cols();
        let mut c = vec![0.0; t];
        for row in (0..t).rev() {
            let mut s = self.z[row];
            for col in row + 1..t {
                s -= self.r[col][row] * c[col];
            }
            c[row] = s / self.r[row][row];
        }
        c
    }
}

/// Shared engine behind `omp` and `group_omp`. With `group_size = None`
/// every unselected atom is admissible; with `Some(m)` the atoms are
/// consecutive groups of m and a selection consumes its whole group.
fn greedy_pursuit(
    x: &Signal,
    dict: &Dictionary,
    budget: usize,
    eps_target: f64,
    group_size: Option<usize>,
) -> Result<SparseApproximation> {
    check_signal_dims(x, dict)?;
    check_eps_target(eps_target)?;
    let d = dict.d();
    let n = dict.n();
    if budget == 0 || budget > d {
        return Err(Error::Config(format!(
            "sparsity budget must lie in 1..={d}, got {budget}"
        )));
    }

    let xv = x.values();
    let xnorm = x.norm();
    let norms = dict.atom_norms();
    let mut residual = xv.to_vec();
    let mut selected = vec![false; n];
    let mut group_used = group_size.map(|m| vec![false; n / m]);
    let mut support: Vec<usize> = Vec::with_capacity(budget);
    // Parallel to support: true when the atom did not extend the QR basis
    // (numerically dependent); such atoms keep a zero coefficient.
    let mut degenerate: Vec<bool> = Vec::with_capacity(budget);
    let mut qr = IncrementalQr::new(d);
    let mut col = vec![0.0; d];

    for _ in 0..budget {
        let rnorm = norm(&residual);
        if rnorm / xnorm <= eps_target {
            break;
        }

        let mut best = f64::NEG_INFINITY;
        let mut best_j = usize::MAX;
        for j in 0..n {
            if selected[j] {
                continue;
            }
            if let (Some(m), Some(used)) = (group_size, group_used.as_ref()) {
                if used[j / m] {
                    continue;
                }
            }
            let (off, seg) = dict.atom(j);
            let score = dot(seg, &residual[off..off + seg.len()]).abs() / norms[j];
            if score > best {
                best = score;
                best_j = j;
            }
        }
        if best_j == usize::MAX {
            break;
        }
        // A residual orthogonal to every remaining atom cannot shrink
        // further; in group mode we still consume a group per step (the
        // lowest admissible index won the all-zero tie above) so that the
        // support always pairs one atom with one group.
        if group_size.is_none() && best <= CORR_FLOOR * rnorm {
            break;
        }

        selected[best_j] = true;
        if let (Some(m), Some(used)) = (group_size, group_used.as_mut()) {
            used[best_j / m] = true;
        }
        support.push(best_j);

        materialize_atom(dict, best_j, &mut col);
        if !qr.push(&col, norms[best_j], xv) {
            degenerate.push(true);
            continue;
        }
        degenerate.push(false);
        if qr.last_column_defect() > QR_DEFECT_TOL {
            refactor(&mut qr, dict, &support, &mut degenerate, xv, &mut col);
        }
        // Re-projecting x onto the refreshed basis is cheaper to state as
        // residual = x - q (q^T x); the incremental form subtracts only the
        // newest direction, which is equivalent while q stays orthonormal.
        residual.copy_from_slice(xv);
        for i in 0..qr.cols() {
            axpy_neg(&mut residual, qr.z[i], qr.q_col(i));
        }
    }

    let active = qr.solve();
    let mut coefficients = vec![0.0; support.len()];
    let mut next = 0;
    for (slot, &degen) in coefficients.iter_mut().zip(&degenerate) {
        if !degen {
            *slot = active[next];
            next += 1;
        }
    }
    let relative_error = recompute_relative_error(x, dict, &support, &coefficients);
    Ok(SparseApproximation {
        support,
        coefficients,
        relative_error,
    })
}

/// Rebuilds the QR from the support atoms when orthogonality has drifted.
fn refactor(
    qr: &mut IncrementalQr,
    dict: &Dictionary,
    support: &[usize],
    degenerate: &mut [bool],
    x: &[f64],
    col: &mut [f64],
) {
    *qr = IncrementalQr::new(dict.d());
    let norms = dict.atom_norms();
    for (pos, &j) in support.iter().enumerate() {
        materialize_atom(dict, j, col);
        degenerate[pos] = !qr.push(col, norms[j], x);
    }
}

/// Orthogonal matching pursuit: repeatedly pick the atom most correlated
/// with the residual, then replace the approximation by the least-squares
/// fit on the enlarged support.
///
/// Stops before a selection once the relative residual is at most
/// `eps_target` or `k` atoms have been taken, so `eps_target = 1.0` returns
/// the empty approximation with error 1.
pub fn omp(
    x: &Signal,
    dict: &Dictionary,
    k: usize,
    eps_target: f64,
) -> Result<SparseApproximation> {
    greedy_pursuit(x, dict, k, eps_target, None)
}

/// Matching pursuit restricted to one atom per group, where the n atoms
/// form `groups` consecutive groups of equal size. Runs at most `groups`
/// selections, so the support never uses a group twice.
pub fn group_omp(
    x: &Signal,
    dict: &Dictionary,
    groups: usize,
    eps_target: f64,
) -> Result<SparseApproximation> {
    let n = dict.n();
    if groups == 0 || n % groups != 0 {
        return Err(Error::Config(format!(
            "cannot split {n} atoms into {groups} equal groups"
        )));
    }
    greedy_pursuit(x, dict, groups, eps_target, Some(n / groups))
}

/// Exact sparse coder for block-diagonal dictionaries: within each block
/// the best single atom maximizes the squared normalized correlation with
/// that block's signal segment, and blocks do not interact, so the
/// blockwise argmax is the global optimum at one atom per block.
///
/// A block whose signal segment is zero contributes its first atom with
/// coefficient zero. Ties go to the lowest atom index.
pub fn block_exact(x: &Signal, dict: &Dictionary) -> Result<SparseApproximation> {
    check_signal_dims(x, dict)?;
    let blocks = dict.blocks().ok_or_else(|| {
        Error::Config("exact block coding needs a block-diagonal dictionary".into())
    })?;
    let (dk, nk) = dict.block_dims().expect("block dims exist for block dicts");
    let xv = x.values();
    let norms = dict.atom_norms();

    let mut support = Vec::with_capacity(blocks);
    let mut coefficients = Vec::with_capacity(blocks);
    for b in 0..blocks {
        let xb = &xv[b * dk..(b + 1) * dk];
        let mut best_val = f64::NEG_INFINITY;
        let mut best_j = b * nk;
        let mut best_coeff = 0.0;
        for jj in 0..nk {
            let j = b * nk + jj;
            let (_, seg) = dict.atom(j);
            let corr = dot(seg, xb);
            let val = (corr / norms[j]).powi(2);
            if val > best_val {
                best_val = val;
                best_j = j;
                best_coeff = corr / (norms[j] * norms[j]);
            }
        }
        support.push(best_j);
        coefficients.push(best_coeff);
    }
    let relative_error = recompute_relative_error(x, dict, &support, &coefficients);
    Ok(SparseApproximation {
        support,
        coefficients,
        relative_error,
    })
}

/// Least squares on a fixed support: the minimum-norm coefficient vector
/// and the relative error it achieves. Handles rank-deficient supports
/// (duplicate or dependent atoms) via a one-sided Jacobi SVD.
pub fn eval_error(
    x: &Signal,
    dict: &Dictionary,
    support: &[usize],
) -> Result<(f64, Vec<f64>)> {
    check_signal_dims(x, dict)?;
    let n = dict.n();
    if support.is_empty() {
        return Err(Error::Config("support must contain at least one atom".into()));
    }
    let mut seen = vec![false; n];
    for &j in support {
        if j >= n {
            return Err(Error::Config(format!(
                "support index {j} out of range for {n} atoms"
            )));
        }
        if seen[j] {
            return Err(Error::Config(format!("support repeats atom {j}")));
        }
        seen[j] = true;
    }

    let d = dict.d();
    let t = support.len();
    let xv = x.values();
    // b holds the support atoms column-major; right rotations orthogonalize
    // its columns in place while v accumulates them, giving a = (b/sigma)
    // sigma v^T with b's column norms as singular values.
    let mut b = vec![0.0; d * t];
    for (c, &j) in support.iter().enumerate() {
        let (off, seg) = dict.atom(j);
        b[c * d + off..c * d + off + seg.len()].copy_from_slice(seg);
    }
    let mut v = vec![0.0; t * t];
    for i in 0..t {
        v[i * t + i] = 1.0;
    }

    let mut converged = false;
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..t {
            for q in p + 1..t {
                let (bp, bq) = column_pair(&mut b, d, p, q);
                let app = dot(bp, bp);
                let aqq = dot(bq, bq);
                let apq = dot(bp, bq);
                if apq.abs() <= 1e-15 * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                let tau = (aqq - app) / (2.0 * apq);
                let tan = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let cos = 1.0 / (1.0 + tan * tan).sqrt();
                let sin = cos * tan;
                rotate_pair(bp, bq, cos, sin);
                let (vp, vq) = column_pair(&mut v, t, p, q);
                rotate_pair(vp, vq, cos, sin);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Convergence(
            "Jacobi sweeps did not orthogonalize the support columns".into(),
        ));
    }

    let sigma: Vec<f64> = (0..t).map(|c| norm(&b[c * d..(c + 1) * d])).collect();
    let sigma_max = sigma.iter().fold(0.0f64, |m, &s| m.max(s));
    let mut coefficients = vec![0.0; t];
    if sigma_max > 0.0 {
        for c in 0..t {
            if sigma[c] <= DEPENDENT_TOL * sigma_max {
                continue;
            }
            // b's column c equals sigma_c * u_c, so (b_c . x) / sigma_c^2
            // is the coefficient along v_c of the minimum-norm solution.
            let w = dot(&b[c * d..(c + 1) * d], xv) / (sigma[c] * sigma[c]);
            for row in 0..t {
                coefficients[row] += w * v[c * t + row];
            }
        }
    }
    let error = recompute_relative_error(x, dict, support, &coefficients);
    Ok((error, coefficients))
}

/// Disjoint mutable views of columns p < q in a col-major matrix.
fn column_pair(data: &mut [f64], rows: usize, p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
    debug_assert!(p < q);
    let (head, tail) = data.split_at_mut(q * rows);
    (&mut head[p * rows..(p + 1) * rows], &mut tail[..rows])
}

fn rotate_pair(bp: &mut [f64], bq: &mut [f64], cos: f64, sin: f64) {
    for (xp, xq) in bp.iter_mut().zip(bq.iter_mut()) {
        let new_p = cos * *xp - sin * *xq;
        let new_q = sin * *xp + cos * *xq;
        *xp = new_p;
        *xq = new_q;
    }
}

/// Pursuit engine for many signals against one fixed dictionary. It
/// precomputes the normalized Gram table G[i,j] = <phi_i, phi_j> /
/// (||phi_i|| ||phi_j||), after which each selection updates correlations
/// through G instead of touching the dictionary, replacing the per-step
/// d-by-n correlation pass with an n-by-t one.
///
/// Selections and stopping rules match `omp` / `group_omp`; small
/// floating-point differences aside, both engines walk the same support.
pub struct GramOmp<'a> {
    dict: &'a Dictionary,
    gram: Vec<f64>, // n x n, column-major, symmetric
}

impl<'a> GramOmp<'a> {
    /// Bytes the Gram table for an n-atom dictionary will occupy; callers
    /// deciding between engines can budget against this.
    pub fn gram_bytes(n: usize) -> usize {
        n * n * std::mem::size_of::<f64>()
    }

    /// Builds the normalized Gram table, O(n^2 d) once.
    pub fn new(dict: &'a Dictionary) -> Self {
        let n = dict.n();
        let norms = dict.atom_norms();
        let mut gram = vec![0.0; n * n];
        for j in 0..n {
            let (off_j, seg_j) = dict.atom(j);
            for i in 0..=j {
                let (off_i, seg_i) = dict.atom(i);
                // Atoms in disjoint row ranges (distinct blocks) cannot
                // overlap; intersect the segments otherwise.
                let lo = off_i.max(off_j);
                let hi = (off_i + seg_i.len()).min(off_j + seg_j.len());
                let g = if lo < hi {
                    dot(
                        &seg_i[lo - off_i..hi - off_i],
                        &seg_j[lo - off_j..hi - off_j],
                    ) / (norms[i] * norms[j])
                } else {
                    0.0
                };
                gram[j * n + i] = g;
                gram[i * n + j] = g;
            }
        }
        GramOmp { dict, gram }
    }

    /// Matching pursuit through the Gram table; see `omp`.
    pub fn omp(&self, x: &Signal, k: usize, eps_target: f64) -> Result<SparseApproximation> {
        self.run(x, k, eps_target, None)
    }

    /// Group-restricted pursuit through the Gram table; see `group_omp`.
    pub fn group_omp(
        &self,
        x: &Signal,
        groups: usize,
        eps_target: f64,
    ) -> Result<SparseApproximation> {
        let n = self.dict.n();
        if groups == 0 || n % groups != 0 {
            return Err(Error::Config(format!(
                "cannot split {n} atoms into {groups} equal groups"
            )));
        }
        self.run(x, groups, eps_target, Some(n / groups))
    }

    fn run(
        &self,
        x: &Signal,
        budget: usize,
        eps_target: f64,
        group_size: Option<usize>,
    ) -> Result<SparseApproximation> {
        check_signal_dims(x, self.dict)?;
        check_eps_target(eps_target)?;
        let d = self.dict.d();
        let n = self.dict.n();
        if budget == 0 || budget > d {
            return Err(Error::Config(format!(
                "sparsity budget must lie in 1..={d}, got {budget}"
            )));
        }

        let xv = x.values();
        let xnorm2 = x.norm() * x.norm();
        let norms = self.dict.atom_norms();
        // corr0[j] = <phi_j / ||phi_j||, x>; corr tracks the same against
        // the current residual.
        let mut corr0 = vec![0.0; n];
        for (j, c) in corr0.iter_mut().enumerate() {
            let (off, seg) = self.dict.atom(j);
            *c = dot(seg, &xv[off..off + seg.len()]) / norms[j];
        }
        let mut corr = corr0.clone();

        let mut selected = vec![false; n];
        let mut group_used = group_size.map(|m| vec![false; n / m]);
        let mut support: Vec<usize> = Vec::with_capacity(budget);
        let mut degenerate: Vec<bool> = Vec::with_capacity(budget);
        // Cholesky factor of the Gram submatrix on the active support,
        // row-major lower triangle, extended one row per accepted atom.
        let mut chol: Vec<Vec<f64>> = Vec::new();
        let mut active: Vec<usize> = Vec::new(); // atom ids backing chol
        let mut coeffs_active: Vec<f64> = Vec::new();
        let mut resid2_rel: f64 = 1.0;

        for _ in 0..budget {
            if resid2_rel.max(0.0).sqrt() <= eps_target {
                break;
            }
            let mut best = f64::NEG_INFINITY;
            let mut best_j = usize::MAX;
            for j in 0..n {
                if selected[j] {
                    continue;
                }
                if let (Some(m), Some(used)) = (group_size, group_used.as_ref()) {
                    if used[j / m] {
                        continue;
                    }
                }
                let score = corr[j].abs();
                if score > best {
                    best = score;
                    best_j = j;
                }
            }
            if best_j == usize::MAX {
                break;
            }
            let rnorm = (resid2_rel.max(0.0) * xnorm2).sqrt();
            if group_size.is_none() && best <= CORR_FLOOR * rnorm {
                break;
            }

            selected[best_j] = true;
            if let (Some(m), Some(used)) = (group_size, group_used.as_mut()) {
                used[best_j / m] = true;
            }
            support.push(best_j);

            // Extend the Cholesky factor with the new atom's normalized
            // Gram column restricted to the active set.
            let t = active.len();
            let gcol = &self.gram[best_j * n..(best_j + 1) * n];
            let mut w = vec![0.0; t + 1];
            for (row, &i) in active.iter().enumerate() {
                let mut s = gcol[i];
                for c in 0..row {
                    s -= chol[row][c] * w[c];
                }
                w[row] = s / chol[row][row];
            }
            let diag2 = 1.0 - dot(&w[..t], &w[..t]);
            if diag2 <= DEPENDENT_TOL {
                degenerate.push(true);
                continue;
            }
            degenerate.push(false);
            w[t] = diag2.sqrt();
            chol.push(w);
            active.push(best_j);

            // Solve (L L^T) c = corr0_active, then refresh correlations:
            // corr = corr0 - G_active c, and the residual energy.
            let t = active.len();
            let mut y = vec![0.0; t];
            for row in 0..t {
                let mut s = corr0[active[row]];
                for c in 0..row {
                    s -= chol[row][c] * y[c];
                }
                y[row] = s / chol[row][row];
            }
            let mut c = vec![0.0; t];
            for row in (0..t).rev() {
                let mut s = y[row];
                for r in row + 1..t {
                    s -= chol[r][row] * c[r];
                }
                c[row] = s / chol[row][row];
            }
            corr.copy_from_slice(&corr0);
            let mut fit = 0.0;
            for (pos, &i) in active.iter().enumerate() {
                let gi = &self.gram[i * n..(i + 1) * n];
                axpy_neg(&mut corr, c[pos], gi);
                fit += c[pos] * corr0[i];
            }
            resid2_rel = 1.0 - fit / xnorm2;
            coeffs_active = c;
        }

        // Map normalized-atom coefficients back to raw atoms and fill
        // degenerate picks with zero.
        let mut coefficients = vec![0.0; support.len()];
        let mut next = 0;
        for (slot, (&degen, &j)) in coefficients
            .iter_mut()
            .zip(degenerate.iter().zip(&support))
        {
            if !degen {
                *slot = coeffs_active[next] / norms[j];
                next += 1;
            }
        }
        let relative_error = recompute_relative_error(x, self.dict, &support, &coefficients);
        Ok(SparseApproximation {
            support,
            coefficients,
            relative_error,
        })
    }
}
