//! Closed-form evaluators for the expected-error bounds, driven by the
//! exact spectrum of the input matrix.
//!
//! The field constant alpha is 1 for real scalars and 0 for complex ones;
//! it is a parameter here so the formulas stay field-generic even though
//! this crate computes over the reals.

use crate::error::{Error, Result};

/// Nonincreasing nonnegative eigenvalues of a psd input matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumView {
    eigenvalues: Vec<f64>,
}

impl SpectrumView {
    pub fn new(eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::invalid("spectrum must be nonempty"));
        }
        if eigenvalues.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::invalid("spectrum entries must be finite and >= 0"));
        }
        if eigenvalues.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::invalid("spectrum must be nonincreasing"));
        }
        Ok(SpectrumView { eigenvalues })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Schatten-1 tail beyond rank rho: sum of eigenvalues after the first rho.
    pub fn tail1(&self, rho: usize) -> f64 {
        if rho >= self.eigenvalues.len() {
            return 0.0;
        }
        self.eigenvalues[rho..].iter().sum()
    }

    /// The (r+1)-th eigenvalue, zero past the end.
    pub fn value_after(&self, r: usize) -> f64 {
        self.eigenvalues.get(r).copied().unwrap_or(0.0)
    }
}

fn check_thm1_args(spec: &SpectrumView, r: usize, k: usize, alpha: f64) -> Result<f64> {
    if r < 1 {
        return Err(Error::invalid("rank r must be at least 1"));
    }
    if k > spec.len() {
        return Err(Error::invalid(format!(
            "sketch size k = {k} exceeds dimension {}",
            spec.len()
        )));
    }
    let denom = k as f64 - r as f64 - alpha;
    if denom <= 0.0 {
        return Err(Error::invalid(format!(
            "bound requires k - r - alpha > 0 (k = {k}, r = {r}, alpha = {alpha})"
        )));
    }
    Ok(denom)
}

/// Expected Schatten-1 error bound for the fixed-rank approximation:
/// (1 + r / (k - r - alpha)) * tail1(r).
pub fn thm1_s1_bound(spec: &SpectrumView, r: usize, k: usize, alpha: f64) -> Result<f64> {
    let denom = check_thm1_args(spec, r, k, alpha)?;
    Ok((1.0 + r as f64 / denom) * spec.tail1(r))
}

/// Expected Schatten-inf error bound for the fixed-rank approximation:
/// sigma_{r+1} + (r / (k - r - alpha)) * tail1(r).
pub fn thm1_sinf_bound(spec: &SpectrumView, r: usize, k: usize, alpha: f64) -> Result<f64> {
    let denom = check_thm1_args(spec, r, k, alpha)?;
    Ok(spec.value_after(r) + (r as f64 / denom) * spec.tail1(r))
}

/// The bracketed tradeoff term (1 + rho / (k - rho - alpha)) * tail1(rho).
/// At rho = 0 the factor is exactly 1 regardless of the denominator.
fn bracketed(spec: &SpectrumView, rho: usize, k: usize, alpha: f64) -> f64 {
    if rho == 0 {
        return spec.tail1(0);
    }
    let denom = k as f64 - rho as f64 - alpha;
    (1.0 + rho as f64 / denom) * spec.tail1(rho)
}

/// Exhaustive minimization of the bracketed term over natural rho with
/// k - rho - alpha > 0 (rho = 0 is always feasible). Smallest rho on ties.
fn minimize_bracketed(spec: &SpectrumView, k: usize, alpha: f64) -> (f64, usize) {
    let mut best = (bracketed(spec, 0, k, alpha), 0usize);
    let mut rho = 1usize;
    while (rho as f64) < k as f64 - alpha && rho <= spec.len() {
        let val = bracketed(spec, rho, k, alpha);
        if val < best.0 {
            best = (val, rho);
        }
        rho += 1;
    }
    best
}

/// Spectral-decay Schatten-1 bound: tail1(r) + 2 min_rho bracketed(rho).
/// Returns the bound and the minimizing rho.
pub fn thm2_s1_bound(spec: &SpectrumView, r: usize, k: usize, alpha: f64) -> Result<(f64, usize)> {
    if (k as f64) - alpha < 1.0 {
        return Err(Error::invalid(format!(
            "bound requires k - alpha >= 1 (k = {k}, alpha = {alpha})"
        )));
    }
    let (min_val, rho) = minimize_bracketed(spec, k, alpha);
    Ok((spec.tail1(r) + 2.0 * min_val, rho))
}

/// Spectral-decay Schatten-inf bound: sigma_{r+1} + 2 min_rho bracketed(rho).
pub fn thm2_sinf_bound(
    spec: &SpectrumView,
    r: usize,
    k: usize,
    alpha: f64,
) -> Result<(f64, usize)> {
    if (k as f64) - alpha < 1.0 {
        return Err(Error::invalid(format!(
            "bound requires k - alpha >= 1 (k = {k}, alpha = {alpha})"
        )));
    }
    let (min_val, rho) = minimize_bracketed(spec, k, alpha);
    Ok((spec.value_after(r) + 2.0 * min_val, rho))
}

/// Expected Schatten-1 error bound for the full Nystrom approximation:
/// min_rho bracketed(rho), with no additive leading term.
pub fn nystrom_s1_bound(spec: &SpectrumView, k: usize, alpha: f64) -> Result<(f64, usize)> {
    if k < 1 {
        return Err(Error::invalid("sketch size k must be at least 1"));
    }
    Ok(minimize_bracketed(spec, k, alpha))
}

/// Smallest sketch size guaranteeing (1 + eps) relative Schatten-1 error:
/// ceil((1 + 1/eps) r + alpha).
pub fn sketch_size_for_epsilon(r: usize, eps: f64, alpha: f64) -> Result<usize> {
    if !(eps > 0.0) {
        return Err(Error::invalid("epsilon must be positive"));
    }
    if r < 1 {
        return Err(Error::invalid("rank r must be at least 1"));
    }
    Ok(((1.0 + 1.0 / eps) * r as f64 + alpha).ceil() as usize)
}
