//! CSV emission and parsing for trial records.
//!
//! Floats are written with 17 significant digits in scientific notation,
//! which round-trips every f64 exactly and is locale independent.

use std::path::Path;

use nystrom_sketch::{SchattenOrder, TestMatrixKind};

use crate::config::{ConfigError, Method};
use crate::runner::TrialRecord;

pub const CSV_HEADER: &str = "matrix_name,method,distribution,n,R,r,k,T,p,trial_index,rel_err,mean_rel_err,std_rel_err,thm1_bound,thm2_bound,failed";

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_float(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

pub fn records_to_csv(records: &[TrialRecord]) -> String {
    let mut out = String::with_capacity(64 + records.len() * 128);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.matrix_name,
            r.method.label(),
            r.distribution.label(),
            r.n,
            r.effective_rank,
            r.r,
            r.k,
            r.t,
            r.p.label(),
            r.trial_index,
            opt_float(r.rel_err),
            opt_float(r.mean_rel_err),
            opt_float(r.std_rel_err),
            opt_float(r.thm1_bound),
            opt_float(r.thm2_bound),
            if r.failed { 1 } else { 0 },
        ));
    }
    out
}

pub fn emit_csv(records: &[TrialRecord], path: &Path) -> Result<(), ConfigError> {
    std::fs::write(path, records_to_csv(records))
        .map_err(|e| ConfigError::new(format!("cannot write {}: {e}", path.display())))
}

pub fn parse_csv(text: &str) -> Result<Vec<TrialRecord>, ConfigError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        _ => return Err(ConfigError::new("missing or unexpected CSV header")),
    }
    let parse_opt = |s: &str, what: &str| -> Result<Option<f64>, ConfigError> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse::<f64>()
                .map(Some)
                .map_err(|_| ConfigError::new(format!("bad {what}: {s:?}")))
        }
    };
    let mut records = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 16 {
            return Err(ConfigError::new(format!(
                "line {}: expected 16 columns, got {}",
                lineno + 2,
                cols.len()
            )));
        }
        let parse_usize = |s: &str, what: &str| -> Result<usize, ConfigError> {
            s.parse::<usize>()
                .map_err(|_| ConfigError::new(format!("bad {what}: {s:?}")))
        };
        records.push(TrialRecord {
            matrix_name: cols[0].to_string(),
            method: Method::parse(cols[1])?,
            distribution: TestMatrixKind::parse(cols[2])
                .map_err(|e| ConfigError::new(e.to_string()))?,
            n: parse_usize(cols[3], "n")?,
            effective_rank: parse_usize(cols[4], "R")?,
            r: parse_usize(cols[5], "r")?,
            k: parse_usize(cols[6], "k")?,
            t: parse_usize(cols[7], "T")?,
            p: SchattenOrder::parse(cols[8]).map_err(|e| ConfigError::new(e.to_string()))?,
            trial_index: parse_usize(cols[9], "trial_index")?,
            rel_err: parse_opt(cols[10], "rel_err")?,
            mean_rel_err: parse_opt(cols[11], "mean_rel_err")?,
            std_rel_err: parse_opt(cols[12], "std_rel_err")?,
            thm1_bound: parse_opt(cols[13], "thm1_bound")?,
            thm2_bound: parse_opt(cols[14], "thm2_bound")?,
            failed: match cols[15] {
                "0" => false,
                "1" => true,
                other => return Err(ConfigError::new(format!("bad failed flag: {other:?}"))),
            },
        });
    }
    Ok(records)
}

/// A companion gnuplot script that plots mean error against the storage
/// parameter T for every (method, distribution) series at p = 1.
pub fn gnuplot_script(records: &[TrialRecord], csv_name: &str) -> String {
    let mut series: Vec<(Method, TestMatrixKind)> = Vec::new();
    for r in records {
        if r.p == SchattenOrder::One && !series.contains(&(r.method, r.distribution)) {
            series.push((r.method, r.distribution));
        }
    }
    let mut out = String::new();
    out.push_str(&format!("# companion plot for {csv_name}\n"));
    out.push_str(
        "set logscale y\nset xlabel 'T'\nset ylabel 'Schatten-1 relative error'\nset key outside\n",
    );
    for (i, (m, d)) in series.iter().enumerate() {
        out.push_str(&format!("$series{i} << EOD\n"));
        let mut seen = Vec::new();
        for r in records {
            if r.method == *m
                && r.distribution == *d
                && r.p == SchattenOrder::One
                && !seen.contains(&r.t)
            {
                if let Some(mean) = r.mean_rel_err {
                    out.push_str(&format!("{} {}\n", r.t, format_float(mean)));
                }
                seen.push(r.t);
            }
        }
        out.push_str("EOD\n");
    }
    out.push_str("plot ");
    let clauses: Vec<String> = series
        .iter()
        .enumerate()
        .map(|(i, (m, d))| {
            format!(
                "$series{i} using 1:2 with linespoints title '{} / {}'",
                m.label(),
                d.label()
            )
        })
        .collect();
    out.push_str(&clauses.join(", "));
    out.push('\n');
    out
}
