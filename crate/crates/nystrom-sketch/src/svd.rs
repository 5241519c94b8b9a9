//! Singular value decomposition, symmetric eigendecomposition, and
//! Schatten-norm machinery.
//!
//! Two kernels back everything here: a one-sided Jacobi SVD (run on the
//! triangular factor of a QR decomposition) for general matrices, and a
//! Householder tridiagonalization + implicit-shift QL iteration for
//! symmetric matrices. Exactly symmetric inputs take the symmetric path,
//! which is both faster and an exact SVD for that case.

use crate::error::{Error, Result};
use crate::factor::householder_qr;
use crate::matrix::DenseMatrix;

/// Relative threshold for treating a column pair as orthogonal.
const JACOBI_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 60;
const QL_MAX_ITERS: usize = 50;

/// Schatten norm order used in the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchattenOrder {
    One,
    Two,
    Inf,
}

impl SchattenOrder {
    pub const ALL: [SchattenOrder; 3] =
        [SchattenOrder::One, SchattenOrder::Two, SchattenOrder::Inf];

    /// lp norm of a nonnegative vector.
    pub fn vector_norm(self, values: &[f64]) -> f64 {
        match self {
            SchattenOrder::One => values.iter().sum(),
            SchattenOrder::Two => values.iter().map(|v| v * v).sum::<f64>().sqrt(),
            SchattenOrder::Inf => values.iter().fold(0.0f64, |a, &v| a.max(v)),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SchattenOrder::One => "1",
            SchattenOrder::Two => "2",
            SchattenOrder::Inf => "inf",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "1" => Ok(SchattenOrder::One),
            "2" => Ok(SchattenOrder::Two),
            "inf" | "Inf" | "INF" => Ok(SchattenOrder::Inf),
            other => Err(Error::invalid(format!("unknown Schatten order: {other:?}"))),
        }
    }
}

/// Thin SVD factors: `u * diag(singular_values) * vt`.
///
/// `u` has orthonormal columns, `vt` orthonormal rows, and the singular
/// values are sorted nonincreasing (ties keep the earlier column first).
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: DenseMatrix,
    pub singular_values: Vec<f64>,
    pub vt: DenseMatrix,
}

impl SvdResult {
    /// Materialize `u * diag(sigma) * vt`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let m = self.u.rows();
        let q = self.singular_values.len();
        let n = self.vt.cols();
        let mut out = DenseMatrix::zeros(m, n);
        for k in 0..q {
            let s = self.singular_values[k];
            if s == 0.0 {
                continue;
            }
            for i in 0..m {
                let uik = s * self.u.get(i, k);
                if uik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let v = out.get(i, j) + uik * self.vt.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }
}

fn is_exactly_symmetric(m: &DenseMatrix) -> bool {
    if !m.is_square() {
        return false;
    }
    let n = m.rows();
    for i in 0..n {
        for j in (i + 1)..n {
            if m.get(i, j) != m.get(j, i) {
                return false;
            }
        }
    }
    true
}

// ── Symmetric kernel: Householder tridiagonalization + implicit QL ──

/// Reduce symmetric `z` (overwritten) to tridiagonal form; returns (d, e).
/// When `want_vectors`, `z` ends up holding the accumulated orthogonal
/// transform Q with Q^T A Q = tridiag(d, e).
fn tridiagonalize(z: &mut DenseMatrix, want_vectors: bool) -> (Vec<f64>, Vec<f64>) {
    let n = z.rows();
    let mut d = vec![0.0f64; n];
    let mut e = vec![0.0f64; n];

    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let mut scale = 0.0;
            for k in 0..=l {
                scale += z.get(i, k).abs();
            }
            if scale == 0.0 {
                e[i] = z.get(i, l);
            } else {
                for k in 0..=l {
                    let v = z.get(i, k) / scale;
                    z.set(i, k, v);
                    h += v * v;
                }
                let f = z.get(i, l);
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                z.set(i, l, f - g);
                let mut f_acc = 0.0;
                for j in 0..=l {
                    if want_vectors {
                        let v = z.get(i, j) / h;
                        z.set(j, i, v);
                    }
                    let mut g_acc = 0.0;
                    for k in 0..=j {
                        g_acc += z.get(j, k) * z.get(i, k);
                    }
                    for k in (j + 1)..=l {
                        g_acc += z.get(k, j) * z.get(i, k);
                    }
                    e[j] = g_acc / h;
                    f_acc += e[j] * z.get(i, j);
                }
                let hh = f_acc / (h + h);
                for j in 0..=l {
                    let f = z.get(i, j);
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        let v = z.get(j, k) - (f * e[k] + g * z.get(i, k));
                        z.set(j, k, v);
                    }
                }
            }
        } else {
            e[i] = z.get(i, l);
        }
        d[i] = h;
    }

    d[0] = 0.0;
    e[0] = 0.0;

    if want_vectors {
        for i in 0..n {
            if d[i] != 0.0 {
                for j in 0..i {
                    let mut g = 0.0;
                    for k in 0..i {
                        g += z.get(i, k) * z.get(k, j);
                    }
                    for k in 0..i {
                        let v = z.get(k, j) - g * z.get(k, i);
                        z.set(k, j, v);
                    }
                }
            }
            d[i] = z.get(i, i);
            z.set(i, i, 1.0);
            for j in 0..i {
                z.set(j, i, 0.0);
                z.set(i, j, 0.0);
            }
        }
    } else {
        for i in 0..n {
            d[i] = z.get(i, i);
        }
    }

    (d, e)
}

fn sign_of(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Implicit-shift QL iteration on a tridiagonal matrix (d, e).
/// Rotations are accumulated into `z` columns when provided.
fn ql_implicit(d: &mut [f64], e: &mut [f64], mut z: Option<&mut DenseMatrix>) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    // Absolute deflation floor at the backward-error level eps * ||T||.
    // Off-diagonals below it carry no information, and without an absolute
    // floor a flat cluster of rounding noise (dd ~ 0) never deflates and
    // the iteration spins forever.
    let scale = d.iter().chain(e.iter()).fold(0.0f64, |a, v| a.max(v.abs()));
    let floor = scale * f64::EPSILON + f64::MIN_POSITIVE;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd + floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > QL_MAX_ITERS {
                return Err(Error::NoConvergence("tridiagonal QL iteration"));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + sign_of(r, g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(zm) = z.as_deref_mut() {
                    let nn = zm.rows();
                    for k in 0..nn {
                        f = zm.get(k, i + 1);
                        let zki = zm.get(k, i);
                        zm.set(k, i + 1, s * zki + c * f);
                        zm.set(k, i, c * zki - s * f);
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Eigendecomposition of an exactly symmetric matrix, eigenvalues sorted
/// nonincreasing; the columns of the returned matrix are the eigenvectors.
pub fn symmetric_eigen(m: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    if !m.is_square() {
        return Err(Error::invalid("symmetric_eigen requires a square matrix"));
    }
    let mut z = m.symmetrize();
    let (mut d, mut e) = tridiagonalize(&mut z, true);
    ql_implicit(&mut d, &mut e, Some(&mut z))?;
    let n = d.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[b].partial_cmp(&d[a]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let vectors = DenseMatrix::from_fn(n, n, |i, j| z.get(i, order[j]));
    Ok((values, vectors))
}

/// Eigenvalues of an exactly symmetric matrix, sorted nonincreasing.
pub fn symmetric_eigenvalues(m: &DenseMatrix) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(Error::invalid(
            "symmetric_eigenvalues requires a square matrix",
        ));
    }
    let mut z = m.symmetrize();
    let (mut d, mut e) = tridiagonalize(&mut z, false);
    ql_implicit(&mut d, &mut e, None)?;
    d.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(d)
}

// ── General kernel: one-sided Jacobi on the QR triangular factor ──

/// Orthogonalize the columns of `a` by plane rotations, accumulating the
/// rotations in `v`. On return the columns of `a` are `u_j * sigma_j`.
///
/// Columns whose norm falls below eps * ||A||_F are flushed to exact zero;
/// without the flush, the rotated-away residue of a rank-deficient input
/// stays correlated with its parent column and the sweep never settles.
fn onesided_jacobi(a: &mut DenseMatrix, v: &mut DenseMatrix) -> Result<()> {
    let m = a.rows();
    let n = a.cols();
    let floor_sq = {
        let fro = a.frobenius_norm();
        (fro * f64::EPSILON).powi(2)
    };
    let flush = |a: &mut DenseMatrix, col: usize| {
        for i in 0..m {
            a.set(i, col, 0.0);
        }
    };
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = 0.0;
                for i in 0..m {
                    let x = a.get(i, p);
                    let y = a.get(i, q);
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if alpha > 0.0 && alpha <= floor_sq {
                    flush(a, p);
                    continue;
                }
                if beta > 0.0 && beta <= floor_sq {
                    flush(a, q);
                    continue;
                }
                if gamma == 0.0 || gamma.abs() <= JACOBI_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let x = a.get(i, p);
                    let y = a.get(i, q);
                    a.set(i, p, c * x - s * y);
                    a.set(i, q, s * x + c * y);
                }
                for i in 0..n {
                    let x = v.get(i, p);
                    let y = v.get(i, q);
                    v.set(i, p, c * x - s * y);
                    v.set(i, q, s * x + c * y);
                }
            }
        }
        if !rotated {
            return Ok(());
        }
    }
    Err(Error::NoConvergence("one-sided Jacobi SVD"))
}

/// Fill columns of `u` whose singular value vanished with an orthonormal
/// completion drawn from the standard basis. Unfilled columns are all-zero,
/// so Gram-Schmidt against every other column is safe.
fn complete_basis(u: &mut DenseMatrix, needs_fill: &[usize]) {
    let m = u.rows();
    let n = u.cols();
    let mut next_candidate = 0usize;
    for &j in needs_fill {
        loop {
            assert!(next_candidate < m, "basis completion exhausted candidates");
            let mut col = vec![0.0f64; m];
            col[next_candidate] = 1.0;
            next_candidate += 1;
            // Two rounds of Gram-Schmidt for numerical safety.
            for _ in 0..2 {
                for other in 0..n {
                    if other == j {
                        continue;
                    }
                    let mut dot = 0.0;
                    for i in 0..m {
                        dot += col[i] * u.get(i, other);
                    }
                    for i in 0..m {
                        col[i] -= dot * u.get(i, other);
                    }
                }
            }
            let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.5 {
                for i in 0..m {
                    u.set(i, j, col[i] / norm);
                }
                break;
            }
        }
    }
}

fn svd_via_jacobi(m: &DenseMatrix) -> Result<SvdResult> {
    if m.rows() < m.cols() {
        let t = svd_via_jacobi(&m.transpose())?;
        return Ok(SvdResult {
            u: t.vt.transpose(),
            singular_values: t.singular_values,
            vt: t.u.transpose(),
        });
    }
    let n = m.cols();
    let (q, r) = householder_qr(m);
    let mut work = r;
    let mut v = DenseMatrix::identity(n);
    onesided_jacobi(&mut work, &mut v)?;

    let mut sigma: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| work.get(i, j).powi(2)).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sigma[b].partial_cmp(&sigma[a]).unwrap());
    sigma = order.iter().map(|&j| sigma[j]).collect();

    let mut u_r = DenseMatrix::zeros(n, n);
    let mut needs_fill = Vec::new();
    for (new_j, &old_j) in order.iter().enumerate() {
        let s = sigma[new_j];
        if s == 0.0 {
            needs_fill.push(new_j);
            continue;
        }
        for i in 0..n {
            u_r.set(i, new_j, work.get(i, old_j) / s);
        }
    }
    complete_basis(&mut u_r, &needs_fill);

    let vt = DenseMatrix::from_fn(n, n, |i, j| v.get(j, order[i]));
    let u = q.matmul(&u_r);
    Ok(SvdResult {
        u,
        singular_values: sigma,
        vt,
    })
}

fn svd_symmetric(m: &DenseMatrix) -> Result<SvdResult> {
    let (values, vectors) = symmetric_eigen(m)?;
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].abs().partial_cmp(&values[a].abs()).unwrap());
    let sigma: Vec<f64> = order.iter().map(|&i| values[i].abs()).collect();
    let u = DenseMatrix::from_fn(n, n, |i, j| vectors.get(i, order[j]));
    let vt = DenseMatrix::from_fn(n, n, |i, j| {
        let sign = if values[order[i]] < 0.0 { -1.0 } else { 1.0 };
        sign * vectors.get(j, order[i])
    });
    Ok(SvdResult {
        u,
        singular_values: sigma,
        vt,
    })
}

/// Full thin SVD with q = min(rows, cols) factors.
pub fn svd(m: &DenseMatrix) -> Result<SvdResult> {
    if is_exactly_symmetric(m) {
        svd_symmetric(m)
    } else {
        svd_via_jacobi(m)
    }
}

/// Singular values only, sorted nonincreasing.
pub fn singular_values(m: &DenseMatrix) -> Result<Vec<f64>> {
    if is_exactly_symmetric(m) {
        let mut vals = symmetric_eigenvalues(m)?;
        for v in vals.iter_mut() {
            *v = v.abs();
        }
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Ok(vals)
    } else {
        Ok(svd_via_jacobi(m)?.singular_values)
    }
}

/// Top-r SVD factors; a best rank-r approximation in every Schatten norm.
pub fn truncated_svd(m: &DenseMatrix, r: usize) -> Result<SvdResult> {
    let q = m.rows().min(m.cols());
    if r < 1 || r > q {
        return Err(Error::invalid(format!(
            "truncation rank {r} out of range 1..={q}"
        )));
    }
    let full = svd(m)?;
    Ok(SvdResult {
        u: DenseMatrix::from_fn(m.rows(), r, |i, j| full.u.get(i, j)),
        singular_values: full.singular_values[..r].to_vec(),
        vt: DenseMatrix::from_fn(r, m.cols(), |i, j| full.vt.get(i, j)),
    })
}

/// Schatten p-norm: lp norm of the singular values.
pub fn schatten_norm(m: &DenseMatrix, p: SchattenOrder) -> f64 {
    let sv = singular_values(m).expect("singular value iteration failed");
    p.vector_norm(&sv)
}

/// Largest singular value.
pub fn spectral_norm(m: &DenseMatrix) -> f64 {
    schatten_norm(m, SchattenOrder::Inf)
}

/// Best rank-r approximation error in the Schatten p-norm: the lp norm of
/// the singular-value tail beyond index r. Zero once r reaches the rank.
pub fn best_rank_error(m: &DenseMatrix, r: usize, p: SchattenOrder) -> f64 {
    let sv = singular_values(m).expect("singular value iteration failed");
    tail_norm(&sv, r, p)
}

/// lp norm of `values[r..]` for a nonincreasing nonnegative vector.
pub fn tail_norm(values: &[f64], r: usize, p: SchattenOrder) -> f64 {
    if r >= values.len() {
        return 0.0;
    }
    p.vector_norm(&values[r..])
}
