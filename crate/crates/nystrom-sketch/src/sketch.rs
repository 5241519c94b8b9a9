//! The streaming sketch: a test matrix Omega and the product Y = A * Omega,
//! maintained under linear updates without ever storing A.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::test_matrix::{Payload, SignedPermutation, TestMatrix, TestMatrixKind};

/// Relative tolerance for the symmetry check on sketched matrices.
const SYMMETRY_TOL: f64 = 1e-10;

/// Sketch state (Omega, Y). Owning both keeps the pair in sync; Y always
/// equals the accumulated matrix times Omega.
#[derive(Debug, Clone, PartialEq)]
pub struct NystromSketch {
    omega: TestMatrix,
    y: DenseMatrix,
}

impl NystromSketch {
    /// Sketch a known symmetric psd matrix: Y = A * Omega.
    pub fn init(a: &DenseMatrix, omega: TestMatrix) -> Result<Self> {
        if !a.is_square() || a.rows() != omega.n() {
            return Err(Error::DimensionMismatch {
                expected: format!("{n}x{n} input", n = omega.n()),
                got: format!("{}x{}", a.rows(), a.cols()),
            });
        }
        if !a.is_symmetric_within(SYMMETRY_TOL) {
            return Err(Error::invalid("sketched matrix must be symmetric"));
        }
        let y = omega.apply(a)?;
        Ok(NystromSketch { omega, y })
    }

    /// Start from A = 0 without forming any n-by-n matrix.
    pub fn init_zero(n: usize, omega: TestMatrix) -> Result<Self> {
        if n != omega.n() {
            return Err(Error::DimensionMismatch {
                expected: format!("n = {}", omega.n()),
                got: format!("n = {n}"),
            });
        }
        let y = DenseMatrix::zeros(n, omega.k());
        Ok(NystromSketch { omega, y })
    }

    /// Apply the linear update A <- theta1 * A + theta2 * H to the sketch:
    /// Y <- theta1 * Y + theta2 * H * Omega.
    pub fn update(&mut self, theta1: f64, theta2: f64, h: &DenseMatrix) -> Result<()> {
        if !h.is_square() || h.rows() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: format!("{n}x{n} innovation", n = self.n()),
                got: format!("{}x{}", h.rows(), h.cols()),
            });
        }
        if !h.is_symmetric_within(SYMMETRY_TOL) {
            return Err(Error::invalid("innovation must be symmetric"));
        }
        let h_omega = self.omega.apply(&h.symmetrize())?;
        self.y = self.y.scale(theta1).add_scaled(theta2, &h_omega);
        Ok(())
    }

    /// Rank-one update A <- theta1 * A + theta2 * h h^T in O(nk) plus the
    /// transform cost, without forming h h^T.
    pub fn update_rank1(&mut self, theta1: f64, theta2: f64, h: &[f64]) -> Result<()> {
        if h.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: format!("vector of length {}", self.n()),
                got: format!("length {}", h.len()),
            });
        }
        let w = self.omega.apply_vector(h)?;
        let k = self.k();
        for i in 0..self.n() {
            let hi = theta2 * h[i];
            let row = self.y.row_mut(i);
            for j in 0..k {
                row[j] = theta1 * row[j] + hi * w[j];
            }
        }
        Ok(())
    }

    /// Exact count of scalars held by the sketch (payload plus Y).
    pub fn storage_cost(&self) -> usize {
        self.omega.payload_scalar_count() + self.n() * self.k()
    }

    pub fn omega(&self) -> &TestMatrix {
        &self.omega
    }

    pub fn y(&self) -> &DenseMatrix {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.omega.n()
    }

    pub fn k(&self) -> usize {
        self.omega.k()
    }

    // ── Snapshot format ──
    //
    // Line-oriented text with f64 values as hexadecimal bit patterns, so a
    // round trip is bit-exact. Enough state to resume a stream.

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("nystrom-sketch v1\n");
        out.push_str(&format!("kind {}\n", self.omega.kind().label()));
        out.push_str(&format!("n {}\n", self.n()));
        out.push_str(&format!("k {}\n", self.k()));
        out.push_str(&format!("seed {}\n", self.omega.seed()));
        match &self.omega.payload {
            Payload::Explicit(m) => {
                out.push_str("payload");
                for v in m.as_slice() {
                    out.push_str(&format!(" {:016x}", v.to_bits()));
                }
                out.push('\n');
            }
            Payload::Structured {
                perm1,
                perm2,
                coords,
            } => {
                for (name, sp) in [("perm1", perm1), ("perm2", perm2)] {
                    out.push_str(name);
                    for &p in &sp.perm {
                        out.push_str(&format!(" {p}"));
                    }
                    out.push('\n');
                    out.push_str(&format!("sign{}", &name[4..]));
                    for &s in &sp.sign {
                        out.push_str(if s >= 0.0 { " 1" } else { " -1" });
                    }
                    out.push('\n');
                }
                out.push_str("coords");
                for &c in coords {
                    out.push_str(&format!(" {c}"));
                }
                out.push('\n');
            }
        }
        out.push('y');
        for v in self.y.as_slice() {
            out.push_str(&format!(" {:016x}", v.to_bits()));
        }
        out.push('\n');
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Serialization(msg.to_string());
        let mut fields: std::collections::HashMap<&str, Vec<&str>> = Default::default();
        let mut lines = text.lines();
        match lines.next() {
            Some("nystrom-sketch v1") => {}
            _ => return Err(bad("missing or unsupported header")),
        }
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let mut toks = line.split_whitespace();
            let key = toks.next().ok_or_else(|| bad("empty line token"))?;
            fields.insert(key, toks.collect());
        }
        let scalar = |key: &str| -> Result<u64> {
            let v = fields
                .get(key)
                .and_then(|v| v.first())
                .ok_or_else(|| bad(&format!("missing field {key}")))?;
            v.parse::<u64>()
                .map_err(|_| bad(&format!("bad value for {key}")))
        };
        let kind = TestMatrixKind::parse(
            fields
                .get("kind")
                .and_then(|v| v.first())
                .ok_or_else(|| bad("missing kind"))?,
        )?;
        let n = scalar("n")? as usize;
        let k = scalar("k")? as usize;
        let seed = scalar("seed")?;

        let parse_floats = |key: &str, count: usize| -> Result<Vec<f64>> {
            let toks = fields
                .get(key)
                .ok_or_else(|| bad(&format!("missing field {key}")))?;
            if toks.len() != count {
                return Err(bad(&format!(
                    "field {key}: expected {count} values, got {}",
                    toks.len()
                )));
            }
            toks.iter()
                .map(|t| {
                    u64::from_str_radix(t, 16)
                        .map(f64::from_bits)
                        .map_err(|_| bad(&format!("bad hex float in {key}")))
                })
                .collect()
        };
        let parse_indices = |key: &str, count: usize| -> Result<Vec<usize>> {
            let toks = fields
                .get(key)
                .ok_or_else(|| bad(&format!("missing field {key}")))?;
            if toks.len() != count {
                return Err(bad(&format!(
                    "field {key}: expected {count} values, got {}",
                    toks.len()
                )));
            }
            toks.iter()
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|_| bad(&format!("bad index in {key}")))
                })
                .collect()
        };

        let payload = match kind {
            TestMatrixKind::Gaussian | TestMatrixKind::Orthonormal => {
                let data = parse_floats("payload", n * k)?;
                Payload::Explicit(DenseMatrix::from_vec(n, k, data)?)
            }
            TestMatrixKind::Ssft => {
                let parse_signs = |key: &str| -> Result<Vec<f64>> {
                    let toks = fields
                        .get(key)
                        .ok_or_else(|| bad(&format!("missing field {key}")))?;
                    if toks.len() != n {
                        return Err(bad(&format!("field {key}: wrong length")));
                    }
                    toks.iter()
                        .map(|t| match *t {
                            "1" => Ok(1.0),
                            "-1" => Ok(-1.0),
                            _ => Err(bad(&format!("bad sign in {key}"))),
                        })
                        .collect()
                };
                Payload::Structured {
                    perm1: SignedPermutation {
                        perm: parse_indices("perm1", n)?,
                        sign: parse_signs("sign1")?,
                    },
                    perm2: SignedPermutation {
                        perm: parse_indices("perm2", n)?,
                        sign: parse_signs("sign2")?,
                    },
                    coords: parse_indices("coords", k)?,
                }
            }
        };
        let omega = TestMatrix::from_parts(kind, n, k, seed, payload)?;
        let y = DenseMatrix::from_vec(n, k, parse_floats("y", n * k)?)?;
        Ok(NystromSketch { omega, y })
    }
}
