//! Experiment configuration: a flat key = value file with comma-separated
//! lists, plus the textual matrix file format for user-supplied inputs.

use std::fmt;
use std::path::{Path, PathBuf};

use nystrom_sketch::{DenseMatrix, Family, SchattenOrder, TestMatrixKind};

/// Reconstruction method under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Shifted, numerically stable fixed-rank approximation.
    Stable,
    /// Truncated-center baseline.
    TruncatedCenter,
    /// Unshifted pseudoinverse route (stability foil).
    Naive,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Stable, Method::TruncatedCenter, Method::Naive];

    pub fn label(self) -> &'static str {
        match self {
            Method::Stable => "stable",
            Method::TruncatedCenter => "truncated-center",
            Method::Naive => "naive",
        }
    }

    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        match s.trim() {
            "stable" => Ok(Method::Stable),
            "truncated-center" => Ok(Method::TruncatedCenter),
            "naive" => Ok(Method::Naive),
            other => Err(ConfigError::new(format!("unknown method: {other:?}"))),
        }
    }
}

/// Input matrix: a synthetic family or a file on disk.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixSource {
    Synthetic(Family),
    File(PathBuf),
}

#[derive(Debug)]
pub struct ConfigError {
    msg: String,
}

impl ConfigError {
    pub fn new(msg: impl Into<String>) -> Self {
        ConfigError { msg: msg.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.msg)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub matrix: MatrixSource,
    pub n: usize,
    pub effective_rank: usize,
    /// Noise seed for the low-rank families. None redraws the input per
    /// trial; decay families ignore it entirely.
    pub matrix_seed: Option<u64>,
    pub rank: usize,
    pub t_values: Vec<usize>,
    pub methods: Vec<Method>,
    pub distributions: Vec<TestMatrixKind>,
    pub p_norms: Vec<SchattenOrder>,
    pub trials: usize,
    pub base_seed: u64,
    /// Field constant in the bound denominators; 1 over the reals.
    pub alpha: f64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.trials < 1 {
            return Err(ConfigError::new("trials must be at least 1"));
        }
        if self.t_values.is_empty() {
            return Err(ConfigError::new("at least one T value is required"));
        }
        let min_t = *self.t_values.iter().min().unwrap();
        if self.rank > min_t {
            return Err(ConfigError::new(format!(
                "rank r = {} exceeds the smallest sketch size T = {min_t}",
                self.rank
            )));
        }
        if self.rank < 1 {
            return Err(ConfigError::new("rank r must be at least 1"));
        }
        if self.methods.is_empty() || self.distributions.is_empty() || self.p_norms.is_empty() {
            return Err(ConfigError::new(
                "methods, distributions, and p must be nonempty",
            ));
        }
        Ok(())
    }

    pub fn matrix_name(&self) -> String {
        match &self.matrix {
            MatrixSource::Synthetic(f) => f.label().to_string(),
            MatrixSource::File(p) => p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "file".to_string()),
        }
    }

    /// Parse the flat `key = value` grammar. Lists are comma separated and
    /// `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut matrix = None;
        let mut n = None;
        let mut big_r = None;
        let mut matrix_seed = None;
        let mut rank = None;
        let mut t_values = None;
        let mut methods = vec![Method::Stable];
        let mut distributions = vec![TestMatrixKind::Gaussian];
        let mut p_norms = vec![SchattenOrder::One];
        let mut trials = 20usize;
        let mut base_seed = 0u64;
        let mut alpha = 1.0f64;

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ConfigError::new(format!("line {}: expected key = value", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            let parse_usize = |v: &str| {
                v.parse::<usize>().map_err(|_| {
                    ConfigError::new(format!("line {}: bad integer {v:?}", lineno + 1))
                })
            };
            match key {
                "matrix" => {
                    matrix = Some(if let Some(path) = value.strip_prefix("file:") {
                        MatrixSource::File(PathBuf::from(path.trim()))
                    } else {
                        MatrixSource::Synthetic(
                            Family::parse(value).map_err(|e| ConfigError::new(e.to_string()))?,
                        )
                    });
                }
                "n" => n = Some(parse_usize(value)?),
                "R" => big_r = Some(parse_usize(value)?),
                "matrix_seed" => {
                    matrix_seed = Some(value.parse::<u64>().map_err(|_| {
                        ConfigError::new(format!("line {}: bad seed {value:?}", lineno + 1))
                    })?)
                }
                "r" => rank = Some(parse_usize(value)?),
                "T" => {
                    t_values = Some(
                        value
                            .split(',')
                            .map(|v| parse_usize(v.trim()))
                            .collect::<Result<Vec<_>, _>>()?,
                    )
                }
                "methods" => {
                    methods = value
                        .split(',')
                        .map(Method::parse)
                        .collect::<Result<Vec<_>, _>>()?
                }
                "distributions" => {
                    distributions = value
                        .split(',')
                        .map(|v| {
                            TestMatrixKind::parse(v).map_err(|e| ConfigError::new(e.to_string()))
                        })
                        .collect::<Result<Vec<_>, _>>()?
                }
                "p" => {
                    p_norms = value
                        .split(',')
                        .map(|v| {
                            SchattenOrder::parse(v).map_err(|e| ConfigError::new(e.to_string()))
                        })
                        .collect::<Result<Vec<_>, _>>()?
                }
                "trials" => trials = parse_usize(value)?,
                "base_seed" => {
                    base_seed = value.parse::<u64>().map_err(|_| {
                        ConfigError::new(format!("line {}: bad seed {value:?}", lineno + 1))
                    })?
                }
                "alpha" => {
                    alpha = value.parse::<f64>().map_err(|_| {
                        ConfigError::new(format!("line {}: bad alpha {value:?}", lineno + 1))
                    })?
                }
                other => {
                    return Err(ConfigError::new(format!(
                        "line {}: unknown key {other:?}",
                        lineno + 1
                    )))
                }
            }
        }

        let cfg = ExperimentConfig {
            matrix: matrix.ok_or_else(|| ConfigError::new("missing key: matrix"))?,
            n: n.ok_or_else(|| ConfigError::new("missing key: n"))?,
            effective_rank: big_r.unwrap_or(0),
            matrix_seed,
            rank: rank.ok_or_else(|| ConfigError::new("missing key: r"))?,
            t_values: t_values.ok_or_else(|| ConfigError::new("missing key: T"))?,
            methods,
            distributions,
            p_norms,
            trials,
            base_seed,
            alpha,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Load a psd matrix from the textual format: first line n, then n lines of
/// n space-separated reals. Symmetry is validated on load.
pub fn load_matrix_file(path: &Path) -> Result<DenseMatrix, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new(format!("cannot read {}: {e}", path.display())))?;
    parse_matrix_text(&text).map_err(|e| ConfigError::new(format!("{}: {}", path.display(), e.msg)))
}

pub fn parse_matrix_text(text: &str) -> Result<DenseMatrix, ConfigError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let n: usize = lines
        .next()
        .ok_or_else(|| ConfigError::new("empty matrix file"))?
        .trim()
        .parse()
        .map_err(|_| ConfigError::new("first line must be the dimension n"))?;
    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
        let line = lines
            .next()
            .ok_or_else(|| ConfigError::new(format!("missing row {}", i + 1)))?;
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| ConfigError::new(format!("row {}: bad number {t:?}", i + 1)))
            })
            .collect::<Result<_, _>>()?;
        if row.len() != n {
            return Err(ConfigError::new(format!(
                "row {}: expected {n} entries, got {}",
                i + 1,
                row.len()
            )));
        }
        data.extend(row);
    }
    let m = DenseMatrix::from_vec(n, n, data).map_err(|e| ConfigError::new(e.to_string()))?;
    if !m.is_symmetric_within(1e-10) {
        return Err(ConfigError::new("matrix file is not symmetric"));
    }
    Ok(m)
}

/// Write a matrix in the same textual format.
pub fn matrix_to_text(m: &DenseMatrix) -> String {
    let mut out = format!("{}\n", m.rows());
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:.17e}")).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# sample experiment
matrix = ExpDecayMed
n = 100
R = 10
r = 10
T = 12, 16, 24
methods = stable,truncated-center
distributions = gaussian, ssft
p = 1,inf
trials = 5
base_seed = 7
";

    #[test]
    fn parses_sample_config() {
        let cfg = ExperimentConfig::parse(SAMPLE).unwrap();
        assert_eq!(cfg.matrix, MatrixSource::Synthetic(Family::ExpDecayMed));
        assert_eq!(cfg.n, 100);
        assert_eq!(cfg.t_values, vec![12, 16, 24]);
        assert_eq!(cfg.methods, vec![Method::Stable, Method::TruncatedCenter]);
        assert_eq!(cfg.p_norms, vec![SchattenOrder::One, SchattenOrder::Inf]);
        assert_eq!(cfg.trials, 5);
        assert_eq!(cfg.base_seed, 7);
        assert_eq!(cfg.alpha, 1.0);
        assert_eq!(cfg.matrix_seed, None);
    }

    #[test]
    fn rejects_rank_exceeding_t() {
        let bad = SAMPLE.replace("r = 10", "r = 13");
        assert!(ExperimentConfig::parse(&bad).is_err());
    }

    #[test]
    fn rejects_unknown_keys_and_bad_lines() {
        assert!(ExperimentConfig::parse("wat = 1").is_err());
        assert!(ExperimentConfig::parse("just a line").is_err());
        let bad = SAMPLE.replace("methods = stable,truncated-center", "methods = fancy");
        assert!(ExperimentConfig::parse(&bad).is_err());
    }

    #[test]
    fn matrix_text_round_trip() {
        let m = DenseMatrix::from_vec(2, 2, vec![1.5, -0.25, -0.25, 3.0]).unwrap();
        let text = matrix_to_text(&m);
        let back = parse_matrix_text(&text).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn matrix_text_rejects_asymmetric() {
        let text = "2\n1.0 2.0\n0.0 1.0\n";
        assert!(parse_matrix_text(text).is_err());
    }

    #[test]
    fn file_source_parses() {
        let cfg_text = SAMPLE.replace("matrix = ExpDecayMed", "matrix = file:/tmp/input.mat");
        let cfg = ExperimentConfig::parse(&cfg_text).unwrap();
        assert_eq!(
            cfg.matrix,
            MatrixSource::File(PathBuf::from("/tmp/input.mat"))
        );
    }
}
