//! Streaming sketch and fixed-rank approximation of positive-semidefinite
//! matrices.
//!
//! A psd matrix presented as a stream of linear updates is tracked through
//! the sketch Y = A * Omega for a fixed random test matrix Omega. From the
//! sketch alone, [`approx::fixed_rank_psd`] reconstructs a numerically
//! stable rank-r psd approximation; [`bounds`] evaluates the matching
//! expected-error bounds; [`synth`] generates the benchmark input families.

pub mod approx;
pub mod bounds;
mod dct;
pub mod error;
pub mod factor;
pub mod matrix;
pub mod rng;
pub mod sketch;
pub mod svd;
pub mod synth;
pub mod test_matrix;

pub use approx::{fixed_rank_psd, fixed_rank_psd_naive, full_nystrom, truncated_center_nystrom};
pub use approx::{FixedRankPsd, ShiftPolicy};
pub use bounds::{
    nystrom_s1_bound, sketch_size_for_epsilon, thm1_s1_bound, thm1_sinf_bound, thm2_s1_bound,
    thm2_sinf_bound, SpectrumView,
};
pub use error::{Error, Result};
pub use factor::{cholesky, qr_orthonormalize, triangular_solve_right};
pub use matrix::DenseMatrix;
pub use sketch::NystromSketch;
pub use svd::{
    best_rank_error, schatten_norm, singular_values, spectral_norm, svd, symmetric_eigen,
    symmetric_eigenvalues, truncated_svd, SchattenOrder, SvdResult,
};
pub use synth::{Family, SyntheticSpec};
pub use test_matrix::{TestMatrix, TestMatrixKind, DEFAULT_MATERIALIZE_CAP};
