//! Random test matrices: Gaussian, orthonormalized Gaussian, and the
//! structured subsampled scrambled cosine transform (SSFT).
//!
//! An SSFT is the composition `P1 * D * P2 * D * R` of two uniform signed
//! permutations, two orthonormal DCT-II transforms, and a restriction to k
//! uniformly chosen coordinates. It is stored implicitly in Theta(n) scalars
//! and applied in two transform passes per row.

use rand::Rng;

use crate::dct::Dct;
use crate::error::{Error, Result};
use crate::factor::qr_orthonormalize;
use crate::matrix::DenseMatrix;
use crate::rng::{substream, tag};

/// Default dimension cap for materializing structured test matrices.
pub const DEFAULT_MATERIALIZE_CAP: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestMatrixKind {
    Gaussian,
    Orthonormal,
    Ssft,
}

impl TestMatrixKind {
    pub const ALL: [TestMatrixKind; 3] = [
        TestMatrixKind::Gaussian,
        TestMatrixKind::Orthonormal,
        TestMatrixKind::Ssft,
    ];

    pub fn label(self) -> &'static str {
        match self {
            TestMatrixKind::Gaussian => "gaussian",
            TestMatrixKind::Orthonormal => "orthonormal",
            TestMatrixKind::Ssft => "ssft",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" => Ok(TestMatrixKind::Gaussian),
            "orthonormal" => Ok(TestMatrixKind::Orthonormal),
            "ssft" => Ok(TestMatrixKind::Ssft),
            other => Err(Error::invalid(format!("unknown distribution: {other:?}"))),
        }
    }
}

/// A signed permutation: entry (i, perm[i]) holds sign[i].
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SignedPermutation {
    pub perm: Vec<usize>,
    pub sign: Vec<f64>,
}

impl SignedPermutation {
    fn draw(n: usize, rng: &mut impl Rng) -> Self {
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            perm.swap(i, j);
        }
        let sign = (0..n)
            .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
            .collect();
        SignedPermutation { perm, sign }
    }

    /// y = P x (gather).
    fn apply_left(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..x.len() {
            out[i] = self.sign[i] * x[self.perm[i]];
        }
    }

    /// y^T = x^T P (scatter).
    fn apply_right(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..x.len() {
            out[self.perm[i]] = self.sign[i] * x[i];
        }
    }

    fn is_valid(&self, n: usize) -> bool {
        if self.perm.len() != n || self.sign.len() != n {
            return false;
        }
        let mut seen = vec![false; n];
        for &p in &self.perm {
            if p >= n || seen[p] {
                return false;
            }
            seen[p] = true;
        }
        self.sign.iter().all(|&s| s == 1.0 || s == -1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Payload {
    Explicit(DenseMatrix),
    Structured {
        perm1: SignedPermutation,
        perm2: SignedPermutation,
        coords: Vec<usize>,
    },
}

/// The random test matrix of a sketch; immutable once drawn.
#[derive(Debug, Clone, PartialEq)]
pub struct TestMatrix {
    kind: TestMatrixKind,
    n: usize,
    k: usize,
    seed: u64,
    pub(crate) payload: Payload,
}

fn check_dims(n: usize, k: usize) -> Result<()> {
    if k < 1 || k > n {
        return Err(Error::invalid(format!(
            "sketch size k = {k} must satisfy 1 <= k <= n = {n}"
        )));
    }
    Ok(())
}

fn gaussian_payload(n: usize, k: usize, seed: u64) -> DenseMatrix {
    let mut rng = substream(seed, &[tag("payload")]);
    let mut data = Vec::with_capacity(n * k);
    for _ in 0..n * k {
        data.push(rng.sample::<f64, _>(rand_distr::StandardNormal));
    }
    DenseMatrix::from_vec_unchecked(n, k, data)
}

impl TestMatrix {
    /// i.i.d. standard normal entries.
    pub fn draw_gaussian(n: usize, k: usize, seed: u64) -> Result<Self> {
        check_dims(n, k)?;
        Ok(TestMatrix {
            kind: TestMatrixKind::Gaussian,
            n,
            k,
            seed,
            payload: Payload::Explicit(gaussian_payload(n, k, seed)),
        })
    }

    /// Orthonormal basis of a Gaussian draw (same substream as
    /// [`TestMatrix::draw_gaussian`], so the ranges coincide).
    pub fn draw_orthonormal(n: usize, k: usize, seed: u64) -> Result<Self> {
        check_dims(n, k)?;
        let g = gaussian_payload(n, k, seed);
        let q = qr_orthonormalize(&g)?;
        Ok(TestMatrix {
            kind: TestMatrixKind::Orthonormal,
            n,
            k,
            seed,
            payload: Payload::Explicit(q),
        })
    }

    /// Structured test matrix in Theta(n) storage.
    pub fn draw_ssft(n: usize, k: usize, seed: u64) -> Result<Self> {
        check_dims(n, k)?;
        let perm1 = SignedPermutation::draw(n, &mut substream(seed, &[tag("perm1")]));
        let perm2 = SignedPermutation::draw(n, &mut substream(seed, &[tag("perm2")]));
        let mut rng = substream(seed, &[tag("coords")]);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = rng.gen_range(i..n);
            pool.swap(i, j);
        }
        let coords = pool[..k].to_vec();
        Ok(TestMatrix {
            kind: TestMatrixKind::Ssft,
            n,
            k,
            seed,
            payload: Payload::Structured {
                perm1,
                perm2,
                coords,
            },
        })
    }

    /// Rebuild a test matrix from stored parts (snapshot resume, oracles).
    pub(crate) fn from_parts(
        kind: TestMatrixKind,
        n: usize,
        k: usize,
        seed: u64,
        payload: Payload,
    ) -> Result<Self> {
        check_dims(n, k)?;
        let tm = TestMatrix {
            kind,
            n,
            k,
            seed,
            payload,
        };
        if !tm.validate_structure() {
            return Err(Error::invalid("inconsistent test-matrix payload"));
        }
        Ok(tm)
    }

    pub fn kind(&self) -> TestMatrixKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of scalars held by the payload (indices count as scalars).
    pub fn payload_scalar_count(&self) -> usize {
        match &self.payload {
            Payload::Explicit(m) => m.rows() * m.cols(),
            Payload::Structured { coords, .. } => 4 * self.n + coords.len(),
        }
    }

    /// x^T * Omega for a length-n vector.
    pub fn apply_vector(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: format!("vector of length {}", self.n),
                got: format!("length {}", x.len()),
            });
        }
        match &self.payload {
            Payload::Explicit(omega) => {
                let mut out = vec![0.0f64; self.k];
                for (i, &xi) in x.iter().enumerate() {
                    if xi == 0.0 {
                        continue;
                    }
                    for (j, o) in out.iter_mut().enumerate() {
                        *o += xi * omega.get(i, j);
                    }
                }
                Ok(out)
            }
            Payload::Structured {
                perm1,
                perm2,
                coords,
            } => {
                let dct = Dct::new(self.n);
                let mut buf = vec![0.0f64; self.n];
                let mut scratch = vec![0.0f64; self.n];
                perm1.apply_right(x, &mut buf);
                dct.transpose(&mut buf);
                perm2.apply_right(&buf, &mut scratch);
                dct.transpose(&mut scratch);
                Ok(coords.iter().map(|&c| scratch[c]).collect())
            }
        }
    }

    /// M * Omega; the sketch-forming product of Y = A * Omega.
    pub fn apply(&self, m: &DenseMatrix) -> Result<DenseMatrix> {
        if m.cols() != self.n {
            return Err(Error::DimensionMismatch {
                expected: format!("{} columns", self.n),
                got: format!("{} columns", m.cols()),
            });
        }
        match &self.payload {
            Payload::Explicit(omega) => Ok(m.matmul(omega)),
            Payload::Structured { .. } => {
                let mut out = DenseMatrix::zeros(m.rows(), self.k);
                for i in 0..m.rows() {
                    let row = self.apply_vector(m.row(i))?;
                    out.row_mut(i).copy_from_slice(&row);
                }
                Ok(out)
            }
        }
    }

    /// Explicit n-by-k matrix with `apply(m) == m * materialize()`.
    pub fn materialize(&self) -> Result<DenseMatrix> {
        self.materialize_with_cap(DEFAULT_MATERIALIZE_CAP)
    }

    pub fn materialize_with_cap(&self, cap: usize) -> Result<DenseMatrix> {
        if self.n > cap {
            return Err(Error::MaterializeCap { n: self.n, cap });
        }
        match &self.payload {
            Payload::Explicit(omega) => Ok(omega.clone()),
            Payload::Structured {
                perm1,
                perm2,
                coords,
            } => {
                let dct = Dct::new(self.n);
                let mut out = DenseMatrix::zeros(self.n, self.k);
                let mut col = vec![0.0f64; self.n];
                let mut buf = vec![0.0f64; self.n];
                for (c, &p) in coords.iter().enumerate() {
                    col.iter_mut().for_each(|v| *v = 0.0);
                    col[p] = 1.0;
                    dct.forward(&mut col);
                    perm2.apply_left(&col, &mut buf);
                    dct.forward(&mut buf);
                    perm1.apply_left(&buf, &mut col);
                    for i in 0..self.n {
                        out.set(i, c, col[i]);
                    }
                }
                Ok(out)
            }
        }
    }

    pub(crate) fn validate_structure(&self) -> bool {
        match &self.payload {
            Payload::Explicit(m) => m.rows() == self.n && m.cols() == self.k,
            Payload::Structured {
                perm1,
                perm2,
                coords,
            } => {
                let mut seen = vec![false; self.n];
                let coords_ok = coords.len() == self.k
                    && coords.iter().all(|&c| {
                        if c >= self.n || seen[c] {
                            false
                        } else {
                            seen[c] = true;
                            true
                        }
                    });
                perm1.is_valid(self.n) && perm2.is_valid(self.n) && coords_ok
            }
        }
    }
}
