//! Cholesky, triangular solves, and Householder QR.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Relative tolerance for the symmetry precondition of [`cholesky`].
const CHOLESKY_SYMMETRY_TOL: f64 = 1e-12;

/// Lower-triangular Cholesky factor C with C C^T = B.
///
/// Fails with [`Error::NotPositiveDefinite`] at the first non-positive pivot,
/// so callers can retry with a larger diagonal shift.
pub fn cholesky(b: &DenseMatrix) -> Result<DenseMatrix> {
    if !b.is_square() {
        return Err(Error::invalid("cholesky requires a square matrix"));
    }
    if !b.is_symmetric_within(CHOLESKY_SYMMETRY_TOL) {
        return Err(Error::invalid("cholesky requires a symmetric matrix"));
    }
    let n = b.rows();
    let mut c = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut pivot = b.get(j, j);
        for k in 0..j {
            pivot -= c.get(j, k) * c.get(j, k);
        }
        if pivot <= 0.0 || !pivot.is_finite() {
            return Err(Error::NotPositiveDefinite { index: j, pivot });
        }
        let cjj = pivot.sqrt();
        c[(j, j)] = cjj;
        for i in (j + 1)..n {
            let mut sum = b.get(i, j);
            for k in 0..j {
                sum -= c.get(i, k) * c.get(j, k);
            }
            c[(i, j)] = sum / cjj;
        }
    }
    Ok(c)
}

/// Solve E * C = Y for E, with C lower triangular (back-substitution on columns).
pub fn triangular_solve_right(y: &DenseMatrix, c: &DenseMatrix) -> Result<DenseMatrix> {
    if !c.is_square() {
        return Err(Error::invalid("triangular factor must be square"));
    }
    if y.cols() != c.rows() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} columns", c.rows()),
            got: format!("{} columns", y.cols()),
        });
    }
    let n = c.rows();
    let m = y.rows();
    for j in 0..n {
        if c.get(j, j) == 0.0 {
            return Err(Error::SingularFactor(j));
        }
    }
    // E[:,j] = (Y[:,j] - sum_{l>j} E[:,l] C[l,j]) / C[j,j], from the last column down.
    let mut e = y.clone();
    for j in (0..n).rev() {
        let diag = c.get(j, j);
        for l in (j + 1)..n {
            let clj = c.get(l, j);
            if clj == 0.0 {
                continue;
            }
            for i in 0..m {
                let v = e.get(i, j) - clj * e.get(i, l);
                e.set(i, j, v);
            }
        }
        for i in 0..m {
            let v = e.get(i, j) / diag;
            e.set(i, j, v);
        }
    }
    Ok(e)
}

/// Solve E * C^T = Y for E, with C lower triangular (forward substitution
/// on columns). With B = C C^T this gives E E^T = Y B^{-1} Y^T, the least
/// squares step of the reconstruction.
pub(crate) fn triangular_solve_right_transposed(
    y: &DenseMatrix,
    c: &DenseMatrix,
) -> Result<DenseMatrix> {
    if !c.is_square() {
        return Err(Error::invalid("triangular factor must be square"));
    }
    if y.cols() != c.rows() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} columns", c.rows()),
            got: format!("{} columns", y.cols()),
        });
    }
    let n = c.rows();
    let m = y.rows();
    for j in 0..n {
        if c.get(j, j) == 0.0 {
            return Err(Error::SingularFactor(j));
        }
    }
    // Y[:,j] = sum_{l<=j} E[:,l] C[j,l], solved for ascending j.
    let mut e = y.clone();
    for j in 0..n {
        let diag = c.get(j, j);
        for l in 0..j {
            let cjl = c.get(j, l);
            if cjl == 0.0 {
                continue;
            }
            for i in 0..m {
                let v = e.get(i, j) - cjl * e.get(i, l);
                e.set(i, j, v);
            }
        }
        for i in 0..m {
            let v = e.get(i, j) / diag;
            e.set(i, j, v);
        }
    }
    Ok(e)
}

/// Orthonormal basis of range(g) via Householder QR.
///
/// Errors on rank-deficient input.
pub fn qr_orthonormalize(g: &DenseMatrix) -> Result<DenseMatrix> {
    let m = g.rows();
    let n = g.cols();
    if m < n {
        return Err(Error::invalid("qr_orthonormalize requires rows >= cols"));
    }
    let (q, r) = householder_qr(g);
    let scale = r.max_abs();
    for j in 0..n {
        if r.get(j, j).abs() <= 1e-12 * scale.max(1e-300) {
            return Err(Error::invalid("qr_orthonormalize: rank-deficient input"));
        }
    }
    Ok(q)
}

/// Householder QR returning explicit thin factors (Q m-by-n, R n-by-n).
pub(crate) fn householder_qr(a: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    let m = a.rows();
    let n = a.cols();
    assert!(m >= n, "householder_qr requires rows >= cols");
    let mut work = a.clone();
    let mut v0s = vec![0.0f64; n];
    let mut betas = vec![0.0f64; n];

    for k in 0..n {
        let mut norm_sq = 0.0;
        for i in k..m {
            let v = work.get(i, k);
            norm_sq += v * v;
        }
        let norm = norm_sq.sqrt();
        if norm == 0.0 {
            continue;
        }
        let akk = work.get(k, k);
        let alpha = if akk >= 0.0 { -norm } else { norm };
        let v0 = akk - alpha;
        let mut vnorm_sq = v0 * v0;
        for i in (k + 1)..m {
            let v = work.get(i, k);
            vnorm_sq += v * v;
        }
        if vnorm_sq == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm_sq;
        for j in (k + 1)..n {
            let mut dot = v0 * work.get(k, j);
            for i in (k + 1)..m {
                dot += work.get(i, k) * work.get(i, j);
            }
            let t = beta * dot;
            work[(k, j)] -= t * v0;
            for i in (k + 1)..m {
                let v = work.get(i, k);
                work[(i, j)] -= t * v;
            }
        }
        work[(k, k)] = alpha;
        v0s[k] = v0;
        betas[k] = beta;
    }

    let mut r = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            r[(i, j)] = work.get(i, j);
        }
    }

    // Accumulate thin Q by applying reflectors to the first n columns of I.
    let mut q = DenseMatrix::zeros(m, n);
    for j in 0..n {
        q[(j, j)] = 1.0;
    }
    for k in (0..n).rev() {
        if betas[k] == 0.0 {
            continue;
        }
        let beta = betas[k];
        let v0 = v0s[k];
        for j in 0..n {
            let mut dot = v0 * q.get(k, j);
            for i in (k + 1)..m {
                dot += work.get(i, k) * q.get(i, j);
            }
            let t = beta * dot;
            q[(k, j)] -= t * v0;
            for i in (k + 1)..m {
                let v = work.get(i, k);
                q[(i, j)] -= t * v;
            }
        }
    }
    (q, r)
}
