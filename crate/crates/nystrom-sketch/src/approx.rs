//! Reconstruction of psd approximations from a sketch: the shifted,
//! numerically stable fixed-rank route, the full Nystrom approximation,
//! the truncated-center baseline, and an unshifted naive route kept as a
//! stability foil.

use crate::error::{Error, Result};
use crate::factor::{cholesky, triangular_solve_right_transposed};
use crate::matrix::DenseMatrix;
use crate::sketch::NystromSketch;
use crate::svd::{spectral_norm, svd, symmetric_eigen};

/// Relative cutoff for pseudoinverting the center matrix.
const PINV_CUTOFF: f64 = 1e-12;

/// Rank-r psd approximation in factored form: U diag(lambda) U^T.
#[derive(Debug, Clone)]
pub struct FixedRankPsd {
    u: DenseMatrix,
    lambda: Vec<f64>,
}

impl FixedRankPsd {
    pub fn u(&self) -> &DenseMatrix {
        &self.u
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn rank(&self) -> usize {
        self.lambda.len()
    }

    /// Materialize U diag(lambda) U^T; exactly symmetric by construction.
    pub fn reconstruct(&self) -> DenseMatrix {
        let n = self.u.rows();
        let r = self.lambda.len();
        let mut out = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut acc = 0.0;
                for (t, &lam) in self.lambda.iter().enumerate().take(r) {
                    acc += lam * self.u.get(i, t) * self.u.get(j, t);
                }
                out.set(i, j, acc);
                out.set(j, i, acc);
            }
        }
        out
    }
}

/// Shift parameters for the stable reconstruction. `mu` scales the spectral
/// norm of Y into the shift; failed Cholesky factorizations escalate the
/// shift by `retry_factor` up to `max_retries` times.
#[derive(Debug, Clone, Copy)]
pub struct ShiftPolicy {
    pub mu: f64,
    pub max_retries: usize,
    pub retry_factor: f64,
}

impl Default for ShiftPolicy {
    fn default() -> Self {
        ShiftPolicy {
            mu: 2.2e-16,
            max_retries: 3,
            retry_factor: 100.0,
        }
    }
}

impl ShiftPolicy {
    fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) {
            return Err(Error::invalid("shift policy requires mu > 0"));
        }
        if !(self.retry_factor > 1.0) {
            return Err(Error::invalid("shift policy requires retry_factor > 1"));
        }
        Ok(())
    }
}

fn check_rank(r: usize, k: usize) -> Result<()> {
    if r < 1 || r > k {
        return Err(Error::invalid(format!(
            "approximation rank r = {r} must satisfy 1 <= r <= k = {k}"
        )));
    }
    Ok(())
}

/// Omega^T * Y without assuming an explicit payload.
fn center_matrix(s: &NystromSketch) -> Result<DenseMatrix> {
    let yt_omega = s.omega().apply(&s.y().transpose())?;
    Ok(yt_omega.transpose())
}

/// sum_j w_j f_j f_j^T over columns of F; exactly symmetric output.
fn weighted_outer(f: &DenseMatrix, weights: &[f64]) -> DenseMatrix {
    let n = f.rows();
    let k = f.cols();
    debug_assert_eq!(weights.len(), k);
    let mut out = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut acc = 0.0;
            for t in 0..k {
                let w = weights[t];
                if w != 0.0 {
                    acc += w * f.get(i, t) * f.get(j, t);
                }
            }
            out.set(i, j, acc);
            out.set(j, i, acc);
        }
    }
    out
}

/// The stable fixed-rank psd approximation from the sketch.
///
/// Shifts the sketch by nu = mu * ||Y||, factors the shifted center matrix
/// by Cholesky, orthogonalizes through a triangular solve and thin SVD,
/// truncates to rank r, and removes the shift from the squared spectrum.
pub fn fixed_rank_psd(s: &NystromSketch, r: usize, policy: &ShiftPolicy) -> Result<FixedRankPsd> {
    check_rank(r, s.k())?;
    policy.validate()?;

    let y_norm = spectral_norm(s.y());
    if y_norm == 0.0 {
        // Sketch of the zero matrix: the approximation is exactly zero.
        let u = DenseMatrix::from_fn(s.n(), r, |i, j| if i == j { 1.0 } else { 0.0 });
        return Ok(FixedRankPsd {
            u,
            lambda: vec![0.0; r],
        });
    }

    // The shift term needs Omega as an explicit n-by-k block, the same
    // footprint as Y itself.
    let omega_dense = s.omega().materialize_with_cap(usize::MAX)?;
    let base_nu = policy.mu * y_norm;

    let mut nu = base_nu;
    for _attempt in 0..=policy.max_retries {
        let y_shifted = s.y().add_scaled(nu, &omega_dense);
        let b = {
            let yt_omega = s.omega().apply(&y_shifted.transpose())?;
            yt_omega.transpose().symmetrize()
        };
        let c = match cholesky(&b) {
            Ok(c) => c,
            Err(Error::NotPositiveDefinite { .. }) => {
                nu *= policy.retry_factor;
                continue;
            }
            Err(e) => return Err(e),
        };
        // With B = C C^T the least squares step is E = Y_nu C^{-T}, so that
        // E E^T equals the Nystrom approximation of the shifted matrix.
        let e = triangular_solve_right_transposed(&y_shifted, &c)?;
        let thin = svd(&e)?;
        let mut lambda = Vec::with_capacity(r);
        for i in 0..r {
            let sigma = thin.singular_values[i];
            lambda.push((sigma * sigma - nu).max(0.0));
        }
        let u = DenseMatrix::from_fn(s.n(), r, |i, j| thin.u.get(i, j));
        return Ok(FixedRankPsd { u, lambda });
    }
    Err(Error::ReconstructionFailed {
        attempts: policy.max_retries + 1,
    })
}

/// The rank-k Nystrom approximation Y (Omega^T Y)^+ Y^T.
pub fn full_nystrom(s: &NystromSketch) -> Result<DenseMatrix> {
    let b = center_matrix(s)?.symmetrize();
    let (vals, vecs) = symmetric_eigen(&b)?;
    let sigma_max = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let f = s.y().matmul(&vecs);
    let weights: Vec<f64> = vals
        .iter()
        .map(|&v| {
            if v.abs() > PINV_CUTOFF * sigma_max {
                1.0 / v
            } else {
                0.0
            }
        })
        .collect();
    Ok(weighted_outer(&f, &weights))
}

/// The truncated-center baseline Y (best-rank-r of Omega^T Y)^+ Y^T.
pub fn truncated_center_nystrom(s: &NystromSketch, r: usize) -> Result<DenseMatrix> {
    check_rank(r, s.k())?;
    let b = center_matrix(s)?.symmetrize();
    let (vals, vecs) = symmetric_eigen(&b)?;
    // Best rank-r truncation keeps the r largest by magnitude.
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[b].abs().partial_cmp(&vals[a].abs()).unwrap());
    let kept = &order[..r];
    let sigma_max = kept.iter().fold(0.0f64, |a, &i| a.max(vals[i].abs()));
    let f = s.y().matmul(&vecs);
    let mut weights = vec![0.0f64; vals.len()];
    for &i in kept {
        if vals[i].abs() > PINV_CUTOFF * sigma_max {
            weights[i] = 1.0 / vals[i];
        }
    }
    Ok(weighted_outer(&f, &weights))
}

/// Unshifted reconstruction, kept solely as a stability foil.
///
/// Takes the direct pseudoinverse square root of the center matrix, forms
/// X = Y B^{-1/2}, and eigendecomposes the Gram matrix X^T X to obtain the
/// top eigenpairs of X X^T = Y B^+ Y^T. In exact arithmetic this is the
/// same fixed-rank approximation as [`fixed_rank_psd`]; in floating point
/// the Gram squaring plants uniform rounding noise across the modes of T
/// and the unshifted inverse amplifies it by the reciprocal of the center
/// matrix's smallest retained eigenvalue.
pub fn fixed_rank_psd_naive(s: &NystromSketch, r: usize) -> Result<FixedRankPsd> {
    check_rank(r, s.k())?;
    let n = s.n();
    let k = s.k();
    let b = center_matrix(s)?.symmetrize();
    let (vals, vecs) = symmetric_eigen(&b)?;
    // Direct pseudoinverse square root: positive eigenvalues only.
    let inv_roots: Vec<f64> = vals
        .iter()
        .map(|&v| if v > 0.0 { 1.0 / v.sqrt() } else { 0.0 })
        .collect();
    let w_half = {
        let mut m = DenseMatrix::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let mut acc = 0.0;
                for (t, &w) in inv_roots.iter().enumerate() {
                    if w != 0.0 {
                        acc += w * vecs.get(i, t) * vecs.get(j, t);
                    }
                }
                m.set(i, j, acc);
                m.set(j, i, acc);
            }
        }
        m
    };
    let x = s.y().matmul(&w_half);
    let t = x.transpose().matmul(&x).symmetrize();
    let (tvals, tvecs) = symmetric_eigen(&t)?;
    let mut u = DenseMatrix::zeros(n, r);
    let mut lambda = Vec::with_capacity(r);
    let mut needs_fill = Vec::new();
    for j in 0..r {
        let lam = tvals[j].max(0.0);
        lambda.push(lam);
        if tvals[j] > 0.0 {
            let scale = 1.0 / tvals[j].sqrt();
            for i in 0..n {
                let mut acc = 0.0;
                for c in 0..k {
                    acc += x.get(i, c) * tvecs.get(c, j);
                }
                u.set(i, j, acc * scale);
            }
        } else {
            needs_fill.push(j);
        }
    }
    complete_columns(&mut u, &needs_fill);
    Ok(FixedRankPsd { u, lambda })
}

/// Gram-Schmidt fill of all-zero columns against the rest.
fn complete_columns(u: &mut DenseMatrix, fill: &[usize]) {
    let m = u.rows();
    let n = u.cols();
    let mut candidate = 0usize;
    for &j in fill {
        loop {
            assert!(candidate < m, "completion exhausted the basis");
            let mut col = vec![0.0f64; m];
            col[candidate] = 1.0;
            candidate += 1;
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::svd::{best_rank_error, schatten_norm, SchattenOrder};
    use crate::test_matrix::{Payload, TestMatrix, TestMatrixKind};

    fn explicit_omega(n: usize, k: usize, data: &[f64]) -> TestMatrix {
        TestMatrix::from_parts(
            TestMatrixKind::Gaussian,
            n,
            k,
            0,
            Payload::Explicit(DenseMatrix::from_vec(n, k, data.to_vec()).unwrap()),
        )
        .unwrap()
    }

    fn hand_sketch() -> NystromSketch {
        // A = diag(4,1), Omega = [1;1]: Y = [4;1], Omega^T Y = 5, and the
        // Nystrom approximation is Y Y^T / 5 = [[3.2, 0.8], [0.8, 0.2]].
        let omega = explicit_omega(2, 1, &[1.0, 1.0]);
        NystromSketch::init(&DenseMatrix::from_diag(&[4.0, 1.0]), omega).unwrap()
    }

    fn hand_expected() -> DenseMatrix {
        DenseMatrix::from_vec(2, 2, vec![3.2, 0.8, 0.8, 0.2]).unwrap()
    }

    #[test]
    fn fixed_rank_hand_oracle() {
        let s = hand_sketch();
        let f = fixed_rank_psd(&s, 1, &ShiftPolicy::default()).unwrap();
        assert!(f.reconstruct().sub(&hand_expected()).max_abs() < 1e-8);
        assert!(f.u.orthonormality_defect() < 1e-8);
    }

    #[test]
    fn full_nystrom_hand_oracle() {
        let s = hand_sketch();
        let a = full_nystrom(&s).unwrap();
        assert!(a.sub(&hand_expected()).max_abs() < 1e-10);
    }

    #[test]
    fn naive_hand_oracle() {
        let s = hand_sketch();
        let f = fixed_rank_psd_naive(&s, 1).unwrap();
        assert!(f.reconstruct().sub(&hand_expected()).max_abs() < 1e-8);
    }

    #[test]
    fn truncated_center_equals_full_at_r_k() {
        let s = hand_sketch();
        let t = truncated_center_nystrom(&s, 1).unwrap();
        let f = full_nystrom(&s).unwrap();
        assert!(t.sub(&f).max_abs() < 1e-10);
    }

    #[test]
    fn exact_rank_input_is_recovered() {
        // A of exact rank 2; a sketch with k >= 2 recovers it.
        let n = 8;
        let g = DenseMatrix::from_fn(n, 2, |i, j| ((i * 2 + j) as f64 * 0.817).sin() + 0.2);
        let a = g.matmul(&g.transpose()).symmetrize();
        let omega = TestMatrix::draw_gaussian(n, 3, 5).unwrap();
        let s = NystromSketch::init(&a, omega).unwrap();
        let f = fixed_rank_psd(&s, 2, &ShiftPolicy::default()).unwrap();
        let err = schatten_norm(&a.sub(&f.reconstruct()), SchattenOrder::One);
        let scale = schatten_norm(&a, SchattenOrder::One);
        assert!(err <= 1e-8 * scale, "relative error {}", err / scale);
    }

    #[test]
    fn zero_matrix_yields_zero_factors() {
        let omega = TestMatrix::draw_gaussian(4, 2, 7).unwrap();
        let s = NystromSketch::init(&DenseMatrix::zeros(4, 4), omega).unwrap();
        let f = fixed_rank_psd(&s, 2, &ShiftPolicy::default()).unwrap();
        assert!(f.lambda.iter().all(|&l| l == 0.0));
        assert!(f.reconstruct().max_abs() == 0.0);
        assert!(full_nystrom(&s).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn full_nystrom_recovers_a_when_k_equals_n() {
        let n = 6;
        let g = DenseMatrix::from_fn(n, n, |i, j| ((i + 2 * j) as f64 * 0.31).cos());
        let a = g.matmul(&g.transpose()).symmetrize();
        let omega = TestMatrix::draw_gaussian(n, n, 3).unwrap();
        let s = NystromSketch::init(&a, omega).unwrap();
        let nys = full_nystrom(&s).unwrap();
        let rel =
            schatten_norm(&a.sub(&nys), SchattenOrder::One) / schatten_norm(&a, SchattenOrder::One);
        assert!(rel < 1e-8, "relative error {rel}");
    }

    #[test]
    fn naive_matches_stable_on_well_conditioned_input() {
        // At r = k the truncation is trivial, so the routes must agree even
        // on the identity, whose truncated approximations are otherwise
        // non-unique (degenerate spectrum).
        let n = 5;
        let omega = TestMatrix::draw_gaussian(n, 3, 2).unwrap();
        let s = NystromSketch::init(&DenseMatrix::identity(n), omega).unwrap();
        let stable = fixed_rank_psd(&s, 3, &ShiftPolicy::default()).unwrap();
        let naive = fixed_rank_psd_naive(&s, 3).unwrap();
        assert!(stable.reconstruct().sub(&naive.reconstruct()).max_abs() < 1e-8);
        // Distinct eigenvalues make the rank-2 truncation unique.
        let a = DenseMatrix::from_diag(&[5.0, 4.0, 3.0, 2.0, 1.0]);
        let omega = TestMatrix::draw_gaussian(n, 3, 4).unwrap();
        let s = NystromSketch::init(&a, omega).unwrap();
        let stable = fixed_rank_psd(&s, 2, &ShiftPolicy::default()).unwrap();
        let naive = fixed_rank_psd_naive(&s, 2).unwrap();
        assert!(stable.reconstruct().sub(&naive.reconstruct()).max_abs() < 1e-8);
    }

    #[test]
    fn rank_bounds_are_checked() {
        let s = hand_sketch();
        assert!(fixed_rank_psd(&s, 0, &ShiftPolicy::default()).is_err());
        assert!(fixed_rank_psd(&s, 2, &ShiftPolicy::default()).is_err());
        assert!(truncated_center_nystrom(&s, 2).is_err());
        assert!(fixed_rank_psd_naive(&s, 0).is_err());
    }

    #[test]
    fn shift_policy_is_validated() {
        let s = hand_sketch();
        let bad_mu = ShiftPolicy {
            mu: 0.0,
            ..ShiftPolicy::default()
        };
        assert!(fixed_rank_psd(&s, 1, &bad_mu).is_err());
        let bad_factor = ShiftPolicy {
            retry_factor: 1.0,
            ..ShiftPolicy::default()
        };
        assert!(fixed_rank_psd(&s, 1, &bad_factor).is_err());
    }

    #[test]
    fn negative_definite_input_exhausts_retries() {
        // The streaming contract promises a psd accumulated matrix; feeding
        // a negative definite one keeps the center matrix indefinite at
        // every shift escalation and surfaces the reconstruction error.
        let omega = TestMatrix::draw_gaussian(4, 2, 3).unwrap();
        let mut s = NystromSketch::init_zero(4, omega).unwrap();
        s.update(1.0, -1.0, &DenseMatrix::identity(4)).unwrap();
        match fixed_rank_psd(&s, 2, &ShiftPolicy::default()) {
            Err(Error::ReconstructionFailed { attempts: 4 }) => {}
            other => panic!("expected ReconstructionFailed, got {other:?}"),
        }
    }

    #[test]
    fn reconstruct_edge_cases() {
        let f = FixedRankPsd {
            u: DenseMatrix::from_vec(3, 1, vec![1.0, 0.0, 0.0]).unwrap(),
            lambda: vec![5.0],
        };
        let m = f.reconstruct();
        assert_eq!(m.get(0, 0), 5.0);
        assert_eq!(m.get(1, 1), 0.0);
        let zero = FixedRankPsd {
            u: DenseMatrix::identity(3),
            lambda: vec![0.0; 3],
        };
        assert_eq!(zero.reconstruct().max_abs(), 0.0);
        // Exact symmetry of the materialization.
        let g = DenseMatrix::from_fn(4, 2, |i, j| ((i + j) as f64).sin());
        let q = crate::factor::qr_orthonormalize(&g).unwrap();
        let f = FixedRankPsd {
            u: q,
            lambda: vec![2.0, 0.5],
        };
        let m = f.reconstruct();
        assert_eq!(m, m.transpose());
    }

    #[test]
    fn lambda_is_sorted_and_nonnegative() {
        let n = 10;
        let a = DenseMatrix::from_diag(&(0..n).map(|i| 1.0 / (i + 1) as f64).collect::<Vec<_>>());
        let omega = TestMatrix::draw_gaussian(n, 6, 11).unwrap();
        let s = NystromSketch::init(&a, omega).unwrap();
        let f = fixed_rank_psd(&s, 5, &ShiftPolicy::default()).unwrap();
        for w in f.lambda.windows(2) {
            assert!(w[0] >= w[1]);
        }
        assert!(f.lambda.iter().all(|&l| l >= 0.0));
    }

    #[test]
    fn truncation_consistency_with_full_nystrom() {
        // fixed_rank_psd should match the best rank-r truncation of the
        // full Nystrom approximation up to the shift perturbation.
        let n = 12;
        let g = DenseMatrix::from_fn(n, n, |i, j| ((i * 3 + j) as f64 * 0.17).sin());
        let a = g.matmul(&g.transpose()).symmetrize();
        let omega = TestMatrix::draw_gaussian(n, 6, 23).unwrap();
        let s = NystromSketch::init(&a, omega).unwrap();
        let r = 3;
        let f = fixed_rank_psd(&s, r, &ShiftPolicy::default()).unwrap();
        let nys = full_nystrom(&s).unwrap();
        let best = crate::svd::truncated_svd(&nys, r).unwrap().reconstruct();
        let rel = schatten_norm(&f.reconstruct().sub(&best), SchattenOrder::One)
            / schatten_norm(&nys, SchattenOrder::One);
        assert!(rel < 1e-6, "relative gap {rel}");
        // And the truncation error itself obeys best-rank optimality.
        let direct = best_rank_error(&nys, r, SchattenOrder::One);
        let via_f = schatten_norm(&nys.sub(&f.reconstruct()), SchattenOrder::One);
        assert!(via_f >= direct - 1e-9);
    }
}
