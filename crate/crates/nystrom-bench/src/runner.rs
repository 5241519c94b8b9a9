//! Experiment execution: sweep sketch sizes, average relative errors over
//! independent trials, and attach the closed-form bounds.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use nystrom_sketch::rng::{derive_seed, tag};
use nystrom_sketch::{
    fixed_rank_psd, fixed_rank_psd_naive, schatten_norm, thm1_s1_bound, thm1_sinf_bound,
    thm2_s1_bound, thm2_sinf_bound, truncated_center_nystrom, DenseMatrix, Family, NystromSketch,
    SchattenOrder, ShiftPolicy, SpectrumView, SyntheticSpec, TestMatrix, TestMatrixKind,
};

use crate::config::{load_matrix_file, ConfigError, ExperimentConfig, MatrixSource, Method};

/// Relative cutoff below which the best-rank-r denominator of the error
/// metric counts as zero; the error is then reported relative to ||A||_p.
const DEGENERATE_DENOMINATOR: f64 = 1e-12;

/// One row of benchmark output.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub matrix_name: String,
    pub method: Method,
    pub distribution: TestMatrixKind,
    pub n: usize,
    pub effective_rank: usize,
    pub r: usize,
    pub k: usize,
    pub t: usize,
    pub p: SchattenOrder,
    pub trial_index: usize,
    pub rel_err: Option<f64>,
    pub mean_rel_err: Option<f64>,
    pub std_rel_err: Option<f64>,
    pub thm1_bound: Option<f64>,
    pub thm2_bound: Option<f64>,
    pub failed: bool,
}

fn method_code(m: Method) -> u64 {
    match m {
        Method::Stable => 1,
        Method::TruncatedCenter => 2,
        Method::Naive => 3,
    }
}

fn dist_code(d: TestMatrixKind) -> u64 {
    match d {
        TestMatrixKind::Gaussian => 1,
        TestMatrixKind::Orthonormal => 2,
        TestMatrixKind::Ssft => 3,
    }
}

/// Per-trial test-matrix seed: a pure function of the configuration cell,
/// so reordering the sweep cannot change any individual trial.
pub fn trial_seed(
    base_seed: u64,
    t: usize,
    method: Method,
    dist: TestMatrixKind,
    trial: usize,
) -> u64 {
    derive_seed(
        base_seed,
        &[
            tag("trial"),
            t as u64,
            method_code(method),
            dist_code(dist),
            trial as u64,
        ],
    )
}

struct InputInstance {
    matrix: DenseMatrix,
    spectrum: SpectrumView,
}

fn numeric_spectrum(a: &DenseMatrix) -> Result<SpectrumView, ConfigError> {
    let mut vals =
        nystrom_sketch::symmetric_eigenvalues(a).map_err(|e| ConfigError::new(e.to_string()))?;
    for v in vals.iter_mut() {
        *v = v.max(0.0);
    }
    SpectrumView::new(vals).map_err(|e| ConfigError::new(e.to_string()))
}

fn synthetic_instance(
    family: Family,
    n: usize,
    big_r: usize,
    seed: u64,
) -> Result<InputInstance, ConfigError> {
    let spec =
        SyntheticSpec::new(family, n, big_r, seed).map_err(|e| ConfigError::new(e.to_string()))?;
    let matrix = spec
        .generate()
        .map_err(|e| ConfigError::new(e.to_string()))?;
    let spectrum = spec
        .exact_spectrum()
        .map_err(|e| ConfigError::new(e.to_string()))?;
    Ok(InputInstance { matrix, spectrum })
}

fn is_noise_family(f: Family) -> bool {
    matches!(
        f,
        Family::LowRankLowNoise | Family::LowRankMedNoise | Family::LowRankHiNoise
    )
}

/// The inputs for every trial index. Decay families and files are a single
/// shared instance; unseeded noise families redraw per trial.
enum Inputs {
    Shared(InputInstance),
    PerTrial(Vec<InputInstance>),
}

impl Inputs {
    fn for_trial(&self, trial: usize) -> &InputInstance {
        match self {
            Inputs::Shared(i) => i,
            Inputs::PerTrial(v) => &v[trial],
        }
    }
}

fn prepare_inputs(cfg: &ExperimentConfig) -> Result<Inputs, ConfigError> {
    match &cfg.matrix {
        MatrixSource::File(path) => {
            let matrix = load_matrix_file(path)?;
            if matrix.rows() != cfg.n {
                return Err(ConfigError::new(format!(
                    "config n = {} does not match matrix file dimension {}",
                    cfg.n,
                    matrix.rows()
                )));
            }
            let spectrum = numeric_spectrum(&matrix)?;
            Ok(Inputs::Shared(InputInstance { matrix, spectrum }))
        }
        MatrixSource::Synthetic(family) => {
            if is_noise_family(*family) && cfg.matrix_seed.is_none() {
                // Fresh noise draw per trial, shared across the sweep cells
                // of that trial so method comparisons stay paired.
                let instances = (0..cfg.trials)
                    .map(|t| {
                        synthetic_instance(
                            *family,
                            cfg.n,
                            cfg.effective_rank,
                            derive_seed(cfg.base_seed, &[tag("matrix"), t as u64]),
                        )
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Inputs::PerTrial(instances))
            } else {
                Ok(Inputs::Shared(synthetic_instance(
                    *family,
                    cfg.n,
                    cfg.effective_rank,
                    cfg.matrix_seed.unwrap_or(0),
                )?))
            }
        }
    }
}

/// Relative error of Eq-(10) form with a guarded denominator: when the
/// optimal rank-r error is numerically zero the error is reported relative
/// to ||A||_p instead.
fn relative_error(num: f64, den: f64, norm_a: f64) -> f64 {
    if den <= DEGENERATE_DENOMINATOR * norm_a.max(1e-300) {
        num / norm_a.max(1e-300)
    } else {
        num / den - 1.0
    }
}

struct ItemOutput {
    rel: Vec<Option<f64>>,
    failed: bool,
}

fn run_item(
    cfg: &ExperimentConfig,
    input: &InputInstance,
    t: usize,
    method: Method,
    dist: TestMatrixKind,
    trial: usize,
) -> Result<ItemOutput, ConfigError> {
    let seed = trial_seed(cfg.base_seed, t, method, dist, trial);
    let omega = match dist {
        TestMatrixKind::Gaussian => TestMatrix::draw_gaussian(cfg.n, t, seed),
        TestMatrixKind::Orthonormal => TestMatrix::draw_orthonormal(cfg.n, t, seed),
        TestMatrixKind::Ssft => TestMatrix::draw_ssft(cfg.n, t, seed),
    }
    .map_err(|e| ConfigError::new(e.to_string()))?;
    let sketch =
        NystromSketch::init(&input.matrix, omega).map_err(|e| ConfigError::new(e.to_string()))?;
    let approx = match method {
        Method::Stable => {
            fixed_rank_psd(&sketch, cfg.rank, &ShiftPolicy::default()).map(|f| f.reconstruct())
        }
        Method::TruncatedCenter => truncated_center_nystrom(&sketch, cfg.rank),
        Method::Naive => fixed_rank_psd_naive(&sketch, cfg.rank).map(|f| f.reconstruct()),
    };
    match approx {
        Ok(ahat) => {
            let diff = input.matrix.sub(&ahat);
            let rel = cfg
                .p_norms
                .iter()
                .map(|&p| {
                    let num = schatten_norm(&diff, p);
                    let den =
                        nystrom_sketch::svd::tail_norm(input.spectrum.eigenvalues(), cfg.rank, p);
                    let norm_a = p.vector_norm(input.spectrum.eigenvalues());
                    Some(relative_error(num, den, norm_a))
                })
                .collect();
            Ok(ItemOutput { rel, failed: false })
        }
        Err(_) => Ok(ItemOutput {
            rel: vec![None; cfg.p_norms.len()],
            failed: true,
        }),
    }
}

fn bound_for(
    spectrum: &SpectrumView,
    p: SchattenOrder,
    r: usize,
    k: usize,
    alpha: f64,
) -> (Option<f64>, Option<f64>) {
    match p {
        SchattenOrder::One => (
            thm1_s1_bound(spectrum, r, k, alpha).ok(),
            thm2_s1_bound(spectrum, r, k, alpha).ok().map(|(v, _)| v),
        ),
        SchattenOrder::Inf => (
            thm1_sinf_bound(spectrum, r, k, alpha).ok(),
            thm2_sinf_bound(spectrum, r, k, alpha).ok().map(|(v, _)| v),
        ),
        SchattenOrder::Two => (None, None),
    }
}

/// Run the full sweep. `threads = 1` executes sequentially; more threads
/// split the trial grid, and the output is identical either way because
/// every record slot is a pure function of its grid cell.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    threads: usize,
) -> Result<Vec<TrialRecord>, ConfigError> {
    cfg.validate()?;
    let inputs = prepare_inputs(cfg)?;
    let matrix_name = cfg.matrix_name();

    struct Item {
        t: usize,
        method: Method,
        dist: TestMatrixKind,
        trial: usize,
    }
    let mut items = Vec::new();
    for &t in &cfg.t_values {
        for &method in &cfg.methods {
            for &dist in &cfg.distributions {
                for trial in 0..cfg.trials {
                    items.push(Item {
                        t,
                        method,
                        dist,
                        trial,
                    });
                }
            }
        }
    }

    let outputs: Vec<ItemOutput> = if threads <= 1 {
        items
            .iter()
            .map(|it| {
                run_item(
                    cfg,
                    inputs.for_trial(it.trial),
                    it.t,
                    it.method,
                    it.dist,
                    it.trial,
                )
            })
            .collect::<Result<Vec<_>, _>>()?
    } else {
        let next = AtomicUsize::new(0);
        let (tx, rx) = mpsc::channel::<(usize, Result<ItemOutput, ConfigError>)>();
        std::thread::scope(|scope| {
            for _ in 0..threads {
                let tx = tx.clone();
                let next = &next;
                let items = &items;
                let inputs = &inputs;
                scope.spawn(move || loop {
                    let idx = next.fetch_add(1, Ordering::Relaxed);
                    if idx >= items.len() {
                        break;
                    }
                    let it = &items[idx];
                    let out = run_item(
                        cfg,
                        inputs.for_trial(it.trial),
                        it.t,
                        it.method,
                        it.dist,
                        it.trial,
                    );
                    if tx.send((idx, out)).is_err() {
                        break;
                    }
                });
            }
        });
        drop(tx);
        let mut slots: Vec<Option<ItemOutput>> = (0..items.len()).map(|_| None).collect();
        for (idx, out) in rx {
            slots[idx] = Some(out?);
        }
        slots
            .into_iter()
            .map(|s| s.ok_or_else(|| ConfigError::new("missing work item result")))
            .collect::<Result<Vec<_>, _>>()?
    };

    // Assemble records in canonical order and attach aggregates.
    let mut records = Vec::with_capacity(items.len() * cfg.p_norms.len());
    let mut item_idx = 0;
    for &t in &cfg.t_values {
        for &method in &cfg.methods {
            for &dist in &cfg.distributions {
                let cell_start = item_idx;
                for trial in 0..cfg.trials {
                    let out = &outputs[cell_start + trial];
                    for (pi, &p) in cfg.p_norms.iter().enumerate() {
                        let spectrum = &inputs.for_trial(trial).spectrum;
                        let (thm1, thm2) = bound_for(spectrum, p, cfg.rank, t, cfg.alpha);
                        records.push(TrialRecord {
                            matrix_name: matrix_name.clone(),
                            method,
                            distribution: dist,
                            n: cfg.n,
                            effective_rank: cfg.effective_rank,
                            r: cfg.rank,
                            k: t,
                            t,
                            p,
                            trial_index: trial,
                            rel_err: out.rel[pi],
                            mean_rel_err: None,
                            std_rel_err: None,
                            thm1_bound: thm1,
                            thm2_bound: thm2,
                            failed: out.failed,
                        });
                    }
                }
                item_idx += cfg.trials;
            }
        }
    }

    attach_aggregates(&mut records, cfg.p_norms.len(), cfg.trials);
    Ok(records)
}

/// Mean and sample standard deviation over the non-failed trials of each
/// (T, method, distribution, p) cell, written back into every row.
fn attach_aggregates(records: &mut [TrialRecord], p_count: usize, trials: usize) {
    let cell = p_count * trials;
    let mut start = 0;
    while start < records.len() {
        for pi in 0..p_count {
            let values: Vec<f64> = (0..trials)
                .filter_map(|tr| records[start + tr * p_count + pi].rel_err)
                .collect();
            let (mean, std) = if values.is_empty() {
                (None, None)
            } else {
                let m = values.iter().sum::<f64>() / values.len() as f64;
                let s = if values.len() < 2 {
                    0.0
                } else {
                    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>()
                        / (values.len() - 1) as f64)
                        .sqrt()
                };
                (Some(m), Some(s))
            };
            for tr in 0..trials {
                let rec = &mut records[start + tr * p_count + pi];
                rec.mean_rel_err = mean;
                rec.std_rel_err = std;
            }
        }
        start += cell;
    }
}

/// The snapshot preset: ExpDecayMed with the documented T sweep.
pub fn golden_preset() -> ExperimentConfig {
    ExperimentConfig {
        matrix: MatrixSource::Synthetic(Family::ExpDecayMed),
        n: 500,
        effective_rank: 10,
        matrix_seed: None,
        rank: 10,
        t_values: vec![12, 16, 24, 32, 48],
        methods: vec![Method::Stable, Method::TruncatedCenter],
        distributions: vec![TestMatrixKind::Gaussian, TestMatrixKind::Ssft],
        p_norms: vec![SchattenOrder::One],
        trials: 20,
        base_seed: 42,
        alpha: 1.0,
    }
}

/// The stability comparison preset: the stable route against the naive one.
pub fn stability_preset(n: usize, k: usize, trials: usize, base_seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        matrix: MatrixSource::Synthetic(Family::ExpDecayFast),
        n,
        effective_rank: 10,
        matrix_seed: None,
        rank: 10,
        t_values: vec![k],
        methods: vec![Method::Stable, Method::Naive],
        distributions: vec![TestMatrixKind::Gaussian],
        p_norms: vec![SchattenOrder::One],
        trials,
        base_seed,
        alpha: 1.0,
    }
}

/// Mean relative error of one (T, method, distribution, p) cell.
pub fn cell_mean(
    records: &[TrialRecord],
    t: usize,
    method: Method,
    dist: TestMatrixKind,
    p: SchattenOrder,
) -> Option<f64> {
    records
        .iter()
        .find(|r| r.t == t && r.method == method && r.distribution == dist && r.p == p)
        .and_then(|r| r.mean_rel_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> ExperimentConfig {
        ExperimentConfig {
            matrix: MatrixSource::Synthetic(Family::ExpDecayFast),
            n: 40,
            effective_rank: 5,
            matrix_seed: None,
            rank: 5,
            t_values: vec![8, 12],
            methods: vec![Method::Stable, Method::TruncatedCenter],
            distributions: vec![TestMatrixKind::Gaussian],
            p_norms: vec![SchattenOrder::One, SchattenOrder::Inf],
            trials: 3,
            base_seed: 11,
            alpha: 1.0,
        }
    }

    #[test]
    fn record_count_and_order() {
        let cfg = tiny_config();
        let records = run_experiment(&cfg, 1).unwrap();
        // T x method x distribution x trial x p.
        assert_eq!(records.len(), 2 * 2 * 3 * 2);
        // Canonical order: T, method, distribution, trial, p.
        assert_eq!(records[0].t, 8);
        assert_eq!(records[0].method, Method::Stable);
        assert_eq!(records[0].trial_index, 0);
        assert_eq!(records[0].p, SchattenOrder::One);
        assert_eq!(records[1].p, SchattenOrder::Inf);
        assert_eq!(records[2].trial_index, 1);
        let last = records.last().unwrap();
        assert_eq!(last.t, 12);
        assert_eq!(last.method, Method::TruncatedCenter);
        assert_eq!(last.trial_index, 2);
    }

    #[test]
    fn threaded_equals_sequential() {
        let cfg = tiny_config();
        let seq = run_experiment(&cfg, 1).unwrap();
        let par = run_experiment(&cfg, 4).unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn trial_seed_is_order_free() {
        let a = trial_seed(3, 12, Method::Stable, TestMatrixKind::Gaussian, 4);
        let b = trial_seed(3, 12, Method::Stable, TestMatrixKind::Gaussian, 4);
        assert_eq!(a, b);
        let c = trial_seed(3, 12, Method::Naive, TestMatrixKind::Gaussian, 4);
        assert_ne!(a, c);
    }

    #[test]
    fn sweep_reordering_preserves_each_trial() {
        let cfg = tiny_config();
        let mut reordered = cfg.clone();
        reordered.t_values.reverse();
        reordered.methods.reverse();
        let a = run_experiment(&cfg, 1).unwrap();
        let b = run_experiment(&reordered, 1).unwrap();
        for rec in &a {
            let twin = b
                .iter()
                .find(|x| {
                    x.t == rec.t
                        && x.method == rec.method
                        && x.distribution == rec.distribution
                        && x.p == rec.p
                        && x.trial_index == rec.trial_index
                })
                .unwrap();
            assert_eq!(rec.rel_err, twin.rel_err);
        }
    }

    #[test]
    fn aggregates_are_cell_constant() {
        let cfg = tiny_config();
        let records = run_experiment(&cfg, 1).unwrap();
        for r in &records {
            let m = cell_mean(&records, r.t, r.method, r.distribution, r.p);
            assert_eq!(r.mean_rel_err, m);
            assert!(r.rel_err.is_some());
            assert!(!r.failed);
            assert!(r.rel_err.unwrap() >= -1e-12);
        }
    }

    #[test]
    fn bounds_attached_where_applicable() {
        let cfg = tiny_config();
        let records = run_experiment(&cfg, 1).unwrap();
        for r in &records {
            match r.p {
                SchattenOrder::One | SchattenOrder::Inf => {
                    // k - r - alpha > 0 holds for T in {8, 12} with r = 5? For
                    // T = 8: 8 - 5 - 1 = 2 > 0, so both bounds exist.
                    assert!(r.thm1_bound.is_some());
                    assert!(r.thm2_bound.is_some());
                }
                SchattenOrder::Two => {
                    assert!(r.thm1_bound.is_none());
                    assert!(r.thm2_bound.is_none());
                }
            }
        }
    }

    #[test]
    fn exact_rank_input_reports_tiny_error() {
        // Rank-5 input sketched at T >= 5 recovers exactly; the degenerate
        // denominator convention reports the error relative to ||A||.
        let dir = std::env::temp_dir().join("nystrom_bench_rank_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("rank5.mat");
        let g = DenseMatrix::from_fn(30, 5, |i, j| ((i * 5 + j) as f64 * 0.37).sin() + 0.1);
        let a = g.matmul(&g.transpose()).symmetrize();
        std::fs::write(&path, crate::config::matrix_to_text(&a)).unwrap();
        let cfg = ExperimentConfig {
            matrix: MatrixSource::File(path),
            n: 30,
            effective_rank: 5,
            matrix_seed: None,
            rank: 5,
            t_values: vec![6],
            methods: vec![Method::Stable],
            distributions: vec![TestMatrixKind::Gaussian],
            p_norms: vec![SchattenOrder::One],
            trials: 1,
            base_seed: 5,
            alpha: 1.0,
        };
        let records = run_experiment(&cfg, 1).unwrap();
        assert_eq!(records.len(), 1);
        let rel = records[0].rel_err.unwrap();
        assert!(rel <= 1e-8, "rel_err {rel}");
    }
}
