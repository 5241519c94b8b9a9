//! Structural identities of the Nystrom reconstruction, checked against
//! explicit oracles that never touch the reconstruction pipeline.

use rand::Rng;

use nystrom_sketch::rng::substream;
use nystrom_sketch::{
    best_rank_error, fixed_rank_psd, full_nystrom, schatten_norm, symmetric_eigen, DenseMatrix,
    NystromSketch, SchattenOrder, ShiftPolicy, TestMatrix,
};

fn random_psd(n: usize, seed: u64) -> DenseMatrix {
    // Wishart with a fat aspect ratio keeps the spectrum well conditioned.
    let mut rng = substream(seed, &[1]);
    let g = DenseMatrix::from_fn(n, n + 5, |_, _| rng.sample(rand_distr::StandardNormal));
    g.matmul(&g.transpose()).symmetrize().scale(1.0 / n as f64)
}

fn psd_sqrt(a: &DenseMatrix) -> DenseMatrix {
    let (vals, vecs) = symmetric_eigen(a).unwrap();
    let roots: Vec<f64> = vals.iter().map(|&v| v.max(0.0).sqrt()).collect();
    let n = a.rows();
    DenseMatrix::from_fn(n, n, |i, j| {
        (0..n)
            .map(|t| roots[t] * vecs.get(i, t) * vecs.get(j, t))
            .sum()
    })
}

fn pseudo_inverse_sym(m: &DenseMatrix) -> DenseMatrix {
    let (vals, vecs) = symmetric_eigen(m).unwrap();
    let top = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let n = m.rows();
    DenseMatrix::from_fn(n, n, |i, j| {
        (0..n)
            .filter(|&t| vals[t].abs() > 1e-12 * top)
            .map(|t| vecs.get(i, t) * vecs.get(j, t) / vals[t])
            .sum()
    })
}

fn rel_s1(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    schatten_norm(&a.sub(b), SchattenOrder::One) / schatten_norm(a, SchattenOrder::One).max(1e-300)
}

/// The Nystrom approximation equals A^{1/2} P A^{1/2} with P the orthogonal
/// projector onto range(A^{1/2} Omega).
#[test]
fn projector_representation() {
    for trial in 0..20u64 {
        let n = 8 + (trial as usize % 12);
        let k = 2 + (trial as usize % 5);
        let a = random_psd(n, 100 + trial);
        let omega = TestMatrix::draw_gaussian(n, k, 200 + trial).unwrap();
        let sketch = NystromSketch::init(&a, omega.clone()).unwrap();
        let nys = full_nystrom(&sketch).unwrap();

        let half = psd_sqrt(&a);
        let g = half.matmul(&omega.materialize().unwrap());
        let center = omega
            .materialize()
            .unwrap()
            .transpose()
            .matmul(&a.matmul(&omega.materialize().unwrap()))
            .symmetrize();
        let p = g
            .matmul(&pseudo_inverse_sym(&center))
            .matmul(&g.transpose());
        let oracle = half.matmul(&p).matmul(&half);

        let rel = rel_s1(&oracle, &nys);
        assert!(rel < 1e-7, "trial {trial}: relative gap {rel}");
    }
}

/// The reconstruction depends on Omega only through its range.
#[test]
fn range_invariance() {
    for trial in 0..20u64 {
        let n = 10 + (trial as usize % 8);
        let k = 3 + (trial as usize % 4);
        let a = random_psd(n, 300 + trial);
        // Same payload substream: the orthonormal draw spans the same range.
        let g = TestMatrix::draw_gaussian(n, k, 400 + trial).unwrap();
        let q = TestMatrix::draw_orthonormal(n, k, 400 + trial).unwrap();
        let nys_g = full_nystrom(&NystromSketch::init(&a, g).unwrap()).unwrap();
        let nys_q = full_nystrom(&NystromSketch::init(&a, q).unwrap()).unwrap();
        let rel = rel_s1(&nys_g, &nys_q);
        assert!(rel < 1e-7, "trial {trial}: relative gap {rel}");
    }
}

/// Pairwise agreement of the full fixed-rank pipeline between a Gaussian
/// draw and its orthonormalization.
#[test]
fn distribution_equivalence_pairwise() {
    for trial in 0..10u64 {
        let n = 16;
        let k = 6;
        let r = 3;
        let a = random_psd(n, 500 + trial);
        let g = TestMatrix::draw_gaussian(n, k, 600 + trial).unwrap();
        let q = TestMatrix::draw_orthonormal(n, k, 600 + trial).unwrap();
        let fg = fixed_rank_psd(
            &NystromSketch::init(&a, g).unwrap(),
            r,
            &ShiftPolicy::default(),
        )
        .unwrap();
        let fq = fixed_rank_psd(
            &NystromSketch::init(&a, q).unwrap(),
            r,
            &ShiftPolicy::default(),
        )
        .unwrap();
        let rel = rel_s1(&fg.reconstruct(), &fq.reconstruct());
        assert!(rel < 1e-6, "trial {trial}: relative gap {rel}");
    }
}

/// Reconstruction output is psd: smallest eigenvalue above -1e-10 * largest.
#[test]
fn psd_output() {
    for trial in 0..20u64 {
        let n = 12;
        let a = random_psd(n, 700 + trial);
        let omega = TestMatrix::draw_gaussian(n, 5, 800 + trial).unwrap();
        let s = NystromSketch::init(&a, omega).unwrap();
        let f = fixed_rank_psd(&s, 3, &ShiftPolicy::default()).unwrap();
        let (vals, _) = symmetric_eigen(&f.reconstruct()).unwrap();
        let top = vals[0].max(1e-300);
        assert!(
            *vals.last().unwrap() >= -1e-10 * top,
            "trial {trial}: min eigenvalue {:?}",
            vals.last()
        );
        assert!(f.u().orthonormality_defect() <= 1e-8);
    }
}

/// Schatten-1 error of the fixed-rank approximation is nonincreasing in r.
#[test]
fn error_monotone_in_rank() {
    for trial in 0..10u64 {
        let n = 14;
        let k = 7;
        let a = random_psd(n, 900 + trial);
        let omega = TestMatrix::draw_gaussian(n, k, 1000 + trial).unwrap();
        let s = NystromSketch::init(&a, omega).unwrap();
        let mut prev = f64::INFINITY;
        for r in 1..=k {
            let f = fixed_rank_psd(&s, r, &ShiftPolicy::default()).unwrap();
            let err = schatten_norm(&a.sub(&f.reconstruct()), SchattenOrder::One);
            assert!(
                err <= prev * (1.0 + 1e-9) + 1e-12,
                "trial {trial}, r={r}: {err} > {prev}"
            );
            prev = err;
        }
    }
}

/// Reversed Eckart-Young: for rank-r B,
/// ||A - B||_inf <= sigma_{r+1}(A) + (||A - B||_1 - tail1_{r+1}(A)).
#[test]
fn reversed_eckart_young() {
    for trial in 0..20u64 {
        let n = 10;
        let r = 3;
        let a = random_psd(n, 1100 + trial);
        let omega = TestMatrix::draw_gaussian(n, 5, 1200 + trial).unwrap();
        let s = NystromSketch::init(&a, omega).unwrap();
        let b = fixed_rank_psd(&s, r, &ShiftPolicy::default())
            .unwrap()
            .reconstruct();
        let diff = a.sub(&b);
        let lhs = schatten_norm(&diff, SchattenOrder::Inf);
        let sigma_r1 = {
            let sv = nystrom_sketch::singular_values(&a).unwrap();
            sv.get(r).copied().unwrap_or(0.0)
        };
        let rhs = sigma_r1
            + (schatten_norm(&diff, SchattenOrder::One)
                - best_rank_error(&a, r, SchattenOrder::One));
        assert!(lhs <= rhs + 1e-9, "trial {trial}: {lhs} > {rhs}");
    }
}

/// The truncated-center baseline trails the proposed truncation on a
/// rapidly decaying spectrum.
#[test]
fn truncated_center_trails_on_fast_decay() {
    use nystrom_sketch::{truncated_center_nystrom, SyntheticSpec};
    let spec = SyntheticSpec::new(nystrom_sketch::Family::ExpDecayFast, 200, 10, 0).unwrap();
    let a = spec.generate().unwrap();
    let den = best_rank_error(&a, 10, SchattenOrder::One);
    let mut stable_sum = 0.0;
    let mut center_sum = 0.0;
    for trial in 0..10u64 {
        let omega = TestMatrix::draw_gaussian(200, 50, 1500 + trial).unwrap();
        let s = NystromSketch::init(&a, omega).unwrap();
        let f = fixed_rank_psd(&s, 10, &ShiftPolicy::default()).unwrap();
        stable_sum += schatten_norm(&a.sub(&f.reconstruct()), SchattenOrder::One) / den;
        let c = truncated_center_nystrom(&s, 10).unwrap();
        center_sum += schatten_norm(&a.sub(&c), SchattenOrder::One) / den;
    }
    assert!(
        stable_sum < center_sum,
        "stable {stable_sum} not below truncated-center {center_sum}"
    );
}

/// Fixed-rank projection bound: truncating any approximation Ahat to rank r
/// costs at most sigma-tail(r) + 2 ||A - Ahat||_p in every Schatten norm.
#[test]
fn fixed_rank_projection_bound() {
    for trial in 0..20u64 {
        let n = 10;
        let r = 3;
        let a = random_psd(n, 1300 + trial);
        let omega = TestMatrix::draw_gaussian(n, 5, 1400 + trial).unwrap();
        let s = NystromSketch::init(&a, omega).unwrap();
        let ahat = full_nystrom(&s).unwrap();
        let truncated = nystrom_sketch::truncated_svd(&ahat, r)
            .unwrap()
            .reconstruct();
        for p in SchattenOrder::ALL {
            let lhs = schatten_norm(&a.sub(&truncated), p);
            let rhs = best_rank_error(&a, r, p) + 2.0 * schatten_norm(&a.sub(&ahat), p);
            assert!(lhs <= rhs + 1e-9, "trial {trial}, p={p:?}: {lhs} > {rhs}");
        }
    }
}
