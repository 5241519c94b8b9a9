//! Synthetic psd input families: low rank plus Wishart noise, polynomial
//! spectral decay, and exponential spectral decay, each at three parameter
//! levels. Decay families are exactly diagonal, so their spectra are known
//! in closed form.

use rand::Rng;

use crate::bounds::SpectrumView;
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::rng::{substream, tag};
use crate::svd::symmetric_eigenvalues;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    LowRankLowNoise,
    LowRankMedNoise,
    LowRankHiNoise,
    PolyDecaySlow,
    PolyDecayMed,
    PolyDecayFast,
    ExpDecaySlow,
    ExpDecayMed,
    ExpDecayFast,
}

impl Family {
    pub const ALL: [Family; 9] = [
        Family::LowRankLowNoise,
        Family::LowRankMedNoise,
        Family::LowRankHiNoise,
        Family::PolyDecaySlow,
        Family::PolyDecayMed,
        Family::PolyDecayFast,
        Family::ExpDecaySlow,
        Family::ExpDecayMed,
        Family::ExpDecayFast,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Family::LowRankLowNoise => "LowRankLowNoise",
            Family::LowRankMedNoise => "LowRankMedNoise",
            Family::LowRankHiNoise => "LowRankHiNoise",
            Family::PolyDecaySlow => "PolyDecaySlow",
            Family::PolyDecayMed => "PolyDecayMed",
            Family::PolyDecayFast => "PolyDecayFast",
            Family::ExpDecaySlow => "ExpDecaySlow",
            Family::ExpDecayMed => "ExpDecayMed",
            Family::ExpDecayFast => "ExpDecayFast",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Family::ALL
            .iter()
            .copied()
            .find(|f| f.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::invalid(format!("unknown matrix family: {s:?}")))
    }

    /// Noise level xi for the low-rank families.
    fn xi(self) -> Option<f64> {
        match self {
            Family::LowRankLowNoise => Some(1e-4),
            Family::LowRankMedNoise => Some(1e-2),
            Family::LowRankHiNoise => Some(1e-1),
            _ => None,
        }
    }

    /// Polynomial decay exponent p.
    fn poly_p(self) -> Option<f64> {
        match self {
            Family::PolyDecaySlow => Some(0.5),
            Family::PolyDecayMed => Some(1.0),
            Family::PolyDecayFast => Some(2.0),
            _ => None,
        }
    }

    /// Exponential decay rate q.
    fn exp_q(self) -> Option<f64> {
        match self {
            Family::ExpDecaySlow => Some(0.1),
            Family::ExpDecayMed => Some(0.25),
            Family::ExpDecayFast => Some(1.0),
            _ => None,
        }
    }
}

/// Recipe for one synthetic input matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub family: Family,
    pub n: usize,
    pub effective_rank: usize,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(family: Family, n: usize, effective_rank: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        if effective_rank > n {
            return Err(Error::invalid(format!(
                "effective rank {effective_rank} exceeds dimension {n}"
            )));
        }
        Ok(SyntheticSpec {
            family,
            n,
            effective_rank,
            seed,
        })
    }

    /// Diagonal of the decay families; None for the noisy low-rank ones.
    fn decay_diagonal(&self) -> Option<Vec<f64>> {
        let n = self.n;
        let big_r = self.effective_rank;
        if let Some(p) = self.family.poly_p() {
            let mut d = vec![1.0; big_r.min(n)];
            for j in 2..=(n - big_r + 1) {
                d.push((j as f64).powf(-p));
            }
            d.truncate(n);
            return Some(d);
        }
        if let Some(q) = self.family.exp_q() {
            let mut d = vec![1.0; big_r.min(n)];
            for j in 1..=(n - big_r) {
                d.push(10.0f64.powf(-(j as f64) * q));
            }
            d.truncate(n);
            return Some(d);
        }
        None
    }

    /// Generate the input matrix.
    pub fn generate(&self) -> Result<DenseMatrix> {
        if let Some(d) = self.decay_diagonal() {
            return Ok(DenseMatrix::from_diag(&d));
        }
        let xi = self.family.xi().expect("family is low-rank + noise");
        let n = self.n;
        let mut rng = substream(self.seed, &[tag("wishart"), n as u64]);
        let mut g = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                g.set(i, j, rng.sample::<f64, _>(rand_distr::StandardNormal));
            }
        }
        // W = G G^T has the Wishart(n, n) distribution over the reals.
        let w = g.matmul(&g.transpose()).symmetrize();
        let mut a = w.scale(xi / n as f64);
        for i in 0..self.effective_rank {
            let v = a.get(i, i) + 1.0;
            a.set(i, i, v);
        }
        Ok(a)
    }

    /// Exact spectrum for the diagonal families; numerical eigenvalues of
    /// the generated instance otherwise.
    pub fn exact_spectrum(&self) -> Result<SpectrumView> {
        if let Some(d) = self.decay_diagonal() {
            return SpectrumView::new(d);
        }
        let a = self.generate()?;
        let mut vals = symmetric_eigenvalues(&a)?;
        // Clamp the tiny negative rounding noise of a psd spectrum.
        for v in vals.iter_mut() {
            *v = v.max(0.0);
        }
        SpectrumView::new(vals)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::svd::{schatten_norm, SchattenOrder};

    #[test]
    fn poly_decay_med_hand_values() {
        let spec = SyntheticSpec::new(Family::PolyDecayMed, 5, 2, 0).unwrap();
        let a = spec.generate().unwrap();
        let expect = [1.0, 1.0, 0.5, 1.0 / 3.0, 0.25];
        for (i, &e) in expect.iter().enumerate() {
            assert!((a.get(i, i) - e).abs() < 1e-15);
        }
    }

    #[test]
    fn exp_decay_fast_hand_values() {
        let spec = SyntheticSpec::new(Family::ExpDecayFast, 4, 1, 0).unwrap();
        let a = spec.generate().unwrap();
        let expect = [1.0, 0.1, 0.01, 0.001];
        for (i, &e) in expect.iter().enumerate() {
            assert!((a.get(i, i) - e).abs() < 1e-15 * e.max(1e-3));
        }
    }

    #[test]
    fn decay_families_are_exactly_diagonal() {
        for family in [Family::PolyDecaySlow, Family::ExpDecayMed] {
            let spec = SyntheticSpec::new(family, 20, 5, 3).unwrap();
            let a = spec.generate().unwrap();
            for i in 0..20 {
                for j in 0..20 {
                    if i != j {
                        assert_eq!(a.get(i, j), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn low_rank_hi_noise_is_psd() {
        let spec = SyntheticSpec::new(Family::LowRankHiNoise, 30, 5, 9).unwrap();
        let a = spec.generate().unwrap();
        let vals = symmetric_eigenvalues(&a).unwrap();
        let top = vals[0];
        assert!(
            vals.iter().all(|&v| v >= -1e-10 * top),
            "min {:?}",
            vals.last()
        );
    }

    #[test]
    fn low_rank_deterministic_under_seed() {
        let spec = SyntheticSpec::new(Family::LowRankMedNoise, 12, 3, 5).unwrap();
        assert_eq!(spec.generate().unwrap(), spec.generate().unwrap());
        let other = SyntheticSpec::new(Family::LowRankMedNoise, 12, 3, 6).unwrap();
        assert_ne!(spec.generate().unwrap(), other.generate().unwrap());
    }

    #[test]
    fn exact_spectrum_matches_definition() {
        let spec = SyntheticSpec::new(Family::PolyDecayFast, 1000, 10, 0).unwrap();
        let s = spec.exact_spectrum().unwrap();
        assert_eq!(s.len(), 1000);
        for i in 0..10 {
            assert_eq!(s.eigenvalues()[i], 1.0);
        }
        assert!((s.eigenvalues()[10] - 0.25).abs() < 1e-15);
        assert!((s.eigenvalues()[999] - (991.0f64).powi(-2)).abs() < 1e-18);
    }

    #[test]
    fn exact_spectrum_matches_numerical_svd() {
        let spec = SyntheticSpec::new(Family::ExpDecayMed, 40, 8, 0).unwrap();
        let a = spec.generate().unwrap();
        let s = spec.exact_spectrum().unwrap();
        let sv = crate::svd::singular_values(&a).unwrap();
        for (e, g) in s.eigenvalues().iter().zip(&sv) {
            assert!((e - g).abs() < 1e-10);
        }
    }

    #[test]
    fn low_rank_spectrum_top_values_near_one() {
        let spec = SyntheticSpec::new(Family::LowRankLowNoise, 25, 4, 2).unwrap();
        let s = spec.exact_spectrum().unwrap();
        for i in 0..4 {
            let v = s.eigenvalues()[i];
            assert!((v - 1.0).abs() < 0.05, "eigenvalue {v}");
        }
        assert!(s.eigenvalues()[4] < 0.1);
    }

    #[test]
    fn effective_rank_bound_is_checked() {
        assert!(SyntheticSpec::new(Family::PolyDecayMed, 5, 6, 0).is_err());
        assert!(SyntheticSpec::new(Family::PolyDecayMed, 0, 0, 0).is_err());
    }

    #[test]
    fn trace_matches_spectrum_sum() {
        let spec = SyntheticSpec::new(Family::ExpDecaySlow, 60, 10, 0).unwrap();
        let a = spec.generate().unwrap();
        let s = spec.exact_spectrum().unwrap();
        let trace = schatten_norm(&a, SchattenOrder::One);
        let sum: f64 = s.eigenvalues().iter().sum();
        assert!((trace - sum).abs() < 1e-10 * sum);
    }
}
