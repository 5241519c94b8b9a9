//! Orthonormal type-II discrete cosine transform and its transpose.
//!
//! Power-of-two lengths use the recursive split of the transform into two
//! half-length transforms; other lengths fall back to direct evaluation
//! with a shared cosine table. Both directions are exact inverses of each
//! other up to rounding, so the transform matrix is orthogonal.

/// Orthonormal DCT-II operator for a fixed length.
pub(crate) struct Dct {
    n: usize,
    /// cos(pi * t / (2n)) for t in 0..4n; used by the direct path.
    costab: Vec<f64>,
    /// Orthonormal scaling: s[0] = sqrt(1/n), s[j] = sqrt(2/n).
    scale: Vec<f64>,
}

impl Dct {
    pub fn new(n: usize) -> Self {
        assert!(n > 0);
        let costab = if n.is_power_of_two() && n > 1 {
            Vec::new()
        } else {
            (0..4 * n)
                .map(|t| (std::f64::consts::PI * t as f64 / (2.0 * n as f64)).cos())
                .collect()
        };
        let mut scale = vec![(2.0 / n as f64).sqrt(); n];
        scale[0] = (1.0 / n as f64).sqrt();
        Dct { n, costab, scale }
    }

    /// y = D x (orthonormal DCT-II), in place.
    pub fn forward(&self, x: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        if self.n == 1 {
            // 1x1 orthonormal transform is the identity.
            return;
        }
        if self.costab.is_empty() {
            let mut tmp = vec![0.0f64; self.n];
            fwd_recursive(x, &mut tmp);
        } else {
            let mut out = vec![0.0f64; self.n];
            let modulus = 4 * self.n;
            for (j, o) in out.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (i, &xi) in x.iter().enumerate() {
                    acc += xi * self.costab[((2 * i + 1) * j) % modulus];
                }
                *o = acc;
            }
            x.copy_from_slice(&out);
        }
        for (xi, s) in x.iter_mut().zip(&self.scale) {
            *xi *= s;
        }
    }

    /// y = D^T x (orthonormal DCT-III, the inverse), in place.
    pub fn transpose(&self, x: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        if self.n == 1 {
            return;
        }
        if self.costab.is_empty() {
            // D = S M, so D^T = D^{-1} = M^{-1} S^{-1}.
            for (xi, s) in x.iter_mut().zip(&self.scale) {
                *xi /= s;
            }
            let mut tmp = vec![0.0f64; self.n];
            inv_recursive(x, &mut tmp);
        } else {
            // (D^T x)[i] = sum_j s_j x[j] cos(pi (2i+1) j / (2n)).
            let w: Vec<f64> = x.iter().zip(&self.scale).map(|(v, s)| v * s).collect();
            let modulus = 4 * self.n;
            for (i, xi) in x.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (j, &wj) in w.iter().enumerate() {
                    acc += wj * self.costab[((2 * i + 1) * j) % modulus];
                }
                *xi = acc;
            }
        }
    }
}

/// Unnormalized DCT-II: y[j] = sum_i x[i] cos(pi (2i+1) j / (2n)).
fn fwd_recursive(x: &mut [f64], tmp: &mut [f64]) {
    let n = x.len();
    if n == 1 {
        return;
    }
    let half = n / 2;
    for i in 0..half {
        let a = x[i];
        let b = x[n - 1 - i];
        tmp[i] = a + b;
        let angle = std::f64::consts::PI * (2 * i + 1) as f64 / (2.0 * n as f64);
        tmp[half + i] = (a - b) / (2.0 * angle.cos());
    }
    {
        let (t_lo, t_hi) = tmp.split_at_mut(half);
        let (x_lo, x_hi) = x.split_at_mut(half);
        fwd_recursive(t_lo, x_lo);
        fwd_recursive(t_hi, x_hi);
    }
    for i in 0..half - 1 {
        x[2 * i] = tmp[i];
        x[2 * i + 1] = tmp[half + i] + tmp[half + i + 1];
    }
    x[n - 2] = tmp[half - 1];
    x[n - 1] = tmp[n - 1];
}

/// Exact inverse of `fwd_recursive`.
fn inv_recursive(y: &mut [f64], tmp: &mut [f64]) {
    let n = y.len();
    if n == 1 {
        return;
    }
    let half = n / 2;
    for i in 0..half {
        tmp[i] = y[2 * i];
    }
    tmp[n - 1] = y[n - 1];
    for i in (0..half - 1).rev() {
        tmp[half + i] = y[2 * i + 1] - tmp[half + i + 1];
    }
    {
        let (t_lo, t_hi) = tmp.split_at_mut(half);
        let (y_lo, y_hi) = y.split_at_mut(half);
        inv_recursive(t_lo, y_lo);
        inv_recursive(t_hi, y_hi);
    }
    for i in 0..half {
        let sum = tmp[i];
        let angle = std::f64::consts::PI * (2 * i + 1) as f64 / (2.0 * n as f64);
        let diff = tmp[half + i] * 2.0 * angle.cos();
        y[i] = 0.5 * (sum + diff);
        y[n - 1 - i] = 0.5 * (sum - diff);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct_dct2(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let mut out = vec![0.0; n];
        for (j, o) in out.iter_mut().enumerate() {
            let s = if j == 0 {
                (1.0 / n as f64).sqrt()
            } else {
                (2.0 / n as f64).sqrt()
            };
            let mut acc = 0.0;
            for (i, &xi) in x.iter().enumerate() {
                acc += xi
                    * (std::f64::consts::PI * (2 * i + 1) as f64 * j as f64 / (2.0 * n as f64))
                        .cos();
            }
            *o = s * acc;
        }
        out
    }

    #[test]
    fn forward_matches_direct_formula() {
        for n in [1usize, 2, 3, 8, 16, 24, 31, 32] {
            let dct = Dct::new(n);
            let x: Vec<f64> = (0..n)
                .map(|i| (i as f64 * 0.37 - 1.0).sin() + 0.25)
                .collect();
            let mut got = x.clone();
            dct.forward(&mut got);
            let expect = direct_dct2(&x);
            for (g, e) in got.iter().zip(&expect) {
                assert!((g - e).abs() < 1e-11, "n={n}: {g} vs {e}");
            }
        }
    }

    #[test]
    fn transpose_inverts_forward() {
        for n in [1usize, 2, 4, 7, 16, 20, 64] {
            let dct = Dct::new(n);
            let x: Vec<f64> = (0..n).map(|i| ((i * i) as f64).cos()).collect();
            let mut y = x.clone();
            dct.forward(&mut y);
            dct.transpose(&mut y);
            for (a, b) in y.iter().zip(&x) {
                assert!((a - b).abs() < 1e-11, "n={n}");
            }
        }
    }

    #[test]
    fn materialized_matrix_is_orthogonal() {
        for n in [2usize, 5, 8, 12, 32] {
            let dct = Dct::new(n);
            // Columns of D: forward transforms of the standard basis.
            let mut cols = Vec::new();
            for p in 0..n {
                let mut e = vec![0.0; n];
                e[p] = 1.0;
                dct.forward(&mut e);
                cols.push(e);
            }
            for a in 0..n {
                for b in 0..n {
                    let dot: f64 = (0..n).map(|i| cols[a][i] * cols[b][i]).sum();
                    let target = if a == b { 1.0 } else { 0.0 };
                    assert!((dot - target).abs() < 1e-11, "n={n} ({a},{b}): {dot}");
                }
            }
        }
    }

    #[test]
    fn transpose_matches_materialized_transpose() {
        for n in [3usize, 8, 13, 16] {
            let dct = Dct::new(n);
            let x: Vec<f64> = (0..n).map(|i| 1.0 / (1.0 + i as f64)).collect();
            let mut got = x.clone();
            dct.transpose(&mut got);
            // D^T x via explicit columns of D.
            let mut expect = vec![0.0; n];
            for p in 0..n {
                let mut col = vec![0.0; n];
                col[p] = 1.0;
                dct.forward(&mut col);
                expect[p] = (0..n).map(|i| col[i] * x[i]).sum();
            }
            for (g, e) in got.iter().zip(&expect) {
                assert!((g - e).abs() < 1e-11, "n={n}");
            }
        }
    }
}
