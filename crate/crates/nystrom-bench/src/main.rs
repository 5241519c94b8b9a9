use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use nystrom_bench::config::{load_matrix_file, ExperimentConfig, Method};
use nystrom_bench::csvout::{emit_csv, format_float, gnuplot_script, records_to_csv};
use nystrom_bench::runner::{cell_mean, golden_preset, run_experiment, stability_preset};
use nystrom_sketch::{
    fixed_rank_psd, nystrom_s1_bound, thm1_s1_bound, thm1_sinf_bound, thm2_s1_bound,
    thm2_sinf_bound, Family, NystromSketch, SchattenOrder, ShiftPolicy, SpectrumView,
    SyntheticSpec, TestMatrix, TestMatrixKind,
};

const USAGE: &str = "\
usage: nystrom-bench <command> [flags]

commands:
  run        run an experiment sweep and emit CSV
             --config <path> | --preset golden
             [--out <path>] [--seed <u64>] [--threads <n>] [--trials <n>] [--gnuplot]
  spectrum   print the exact spectrum of a synthetic family
             --family <name> --n <n> --R <R> [--matrix-seed <u64>] [--count <m>]
  bounds     evaluate the error bounds for a spectrum
             (--family <name> --n <n> --R <R> [--matrix-seed <u64>] | --matrix-file <path>)
             --r <r> --k <k> [--alpha <a>]
  approx     one-shot approximation of a matrix file
             --matrix-file <path> --r <r> --k <k> [--dist <name>] [--seed <u64>] [--out <path>]
  stability  compare the stable and naive reconstructions
             [--n <n>] [--k <k>] [--trials <n>] [--seed <u64>]

families: LowRankLowNoise LowRankMedNoise LowRankHiNoise PolyDecaySlow PolyDecayMed
          PolyDecayFast ExpDecaySlow ExpDecayMed ExpDecayFast
distributions: gaussian orthonormal ssft
";

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    eprintln!("{USAGE}");
    ExitCode::from(2)
}

fn runtime_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::FAILURE
}

struct Flags {
    values: Vec<(String, String)>,
    switches: Vec<String>,
}

impl Flags {
    /// Flags of the form `--name value`, plus valueless switches.
    fn parse(args: &[String], switches: &[&str]) -> Result<Flags, String> {
        let mut values = Vec::new();
        let mut found = Vec::new();
        let mut i = 0;
        while i < args.len() {
            let arg = &args[i];
            let name = arg
                .strip_prefix("--")
                .ok_or_else(|| format!("unexpected argument {arg:?}"))?;
            if switches.contains(&name) {
                found.push(name.to_string());
                i += 1;
                continue;
            }
            let value = args
                .get(i + 1)
                .ok_or_else(|| format!("flag --{name} needs a value"))?;
            values.push((name.to_string(), value.clone()));
            i += 2;
        }
        Ok(Flags {
            values,
            switches: found,
        })
    }

    fn get(&self, name: &str) -> Option<&str> {
        self.values
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_str())
    }

    fn has_switch(&self, name: &str) -> bool {
        self.switches.iter().any(|s| s == name)
    }

    fn unknown(&self, allowed: &[&str]) -> Option<String> {
        self.values
            .iter()
            .map(|(n, _)| n.clone())
            .chain(self.switches.iter().cloned())
            .find(|n| !allowed.contains(&n.as_str()))
    }

    fn parse_num<T: std::str::FromStr>(&self, name: &str) -> Result<Option<T>, String> {
        match self.get(name) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| format!("bad value for --{name}: {v:?}")),
        }
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(command) = args.first() else {
        return usage_error("missing command");
    };
    let rest = &args[1..];
    match command.as_str() {
        "run" => cmd_run(rest),
        "spectrum" => cmd_spectrum(rest),
        "bounds" => cmd_bounds(rest),
        "approx" => cmd_approx(rest),
        "stability" => cmd_stability(rest),
        "--help" | "-h" | "help" => {
            println!("{USAGE}");
            ExitCode::SUCCESS
        }
        other => usage_error(&format!("unknown command {other:?}")),
    }
}

fn cmd_run(args: &[String]) -> ExitCode {
    let flags = match Flags::parse(args, &["gnuplot"]) {
        Ok(f) => f,
        Err(e) => return usage_error(&e),
    };
    if let Some(f) = flags.unknown(&[
        "config", "preset", "out", "seed", "threads", "trials", "gnuplot",
    ]) {
        return usage_error(&format!("unknown flag --{f}"));
    }
    let mut cfg: ExperimentConfig = match (flags.get("config"), flags.get("preset")) {
        (Some(path), None) => {
            let text = match std::fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => return runtime_error(&format!("cannot read {path}: {e}")),
            };
            match ExperimentConfig::parse(&text) {
                Ok(c) => c,
                Err(e) => return runtime_error(&format!("{path}: {e}")),
            }
        }
        (None, Some("golden")) => golden_preset(),
        (None, Some(other)) => return usage_error(&format!("unknown preset {other:?}")),
        _ => return usage_error("run needs exactly one of --config or --preset"),
    };
    match flags.parse_num::<u64>("seed") {
        Ok(Some(seed)) => cfg.base_seed = seed,
        Ok(None) => {}
        Err(e) => return usage_error(&e),
    }
    match flags.parse_num::<usize>("trials") {
        Ok(Some(trials)) => cfg.trials = trials,
        Ok(None) => {}
        Err(e) => return usage_error(&e),
    }
    let threads = match flags.parse_num::<usize>("threads") {
        Ok(t) => t.unwrap_or(1).max(1),
        Err(e) => return usage_error(&e),
    };

    let start = Instant::now();
    let records = match run_experiment(&cfg, threads) {
        Ok(r) => r,
        Err(e) => return runtime_error(&e.to_string()),
    };
    eprintln!(
        "ran {} records ({} trials per cell) in {:.2} s",
        records.len(),
        cfg.trials,
        start.elapsed().as_secs_f64()
    );

    match flags.get("out") {
        Some(path) => {
            let path = PathBuf::from(path);
            if let Err(e) = emit_csv(&records, &path) {
                return runtime_error(&e.to_string());
            }
            if flags.has_switch("gnuplot") {
                let script_path = path.with_extension("gnuplot");
                let name = path
                    .file_name()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                if let Err(e) = std::fs::write(&script_path, gnuplot_script(&records, &name)) {
                    return runtime_error(&format!("cannot write {}: {e}", script_path.display()));
                }
            }
        }
        None => print!("{}", records_to_csv(&records)),
    }
    ExitCode::SUCCESS
}

fn parse_spectrum_source(flags: &Flags) -> Result<SpectrumView, String> {
    if let Some(path) = flags.get("matrix-file") {
        let m = load_matrix_file(Path::new(path)).map_err(|e| e.to_string())?;
        let mut vals = nystrom_sketch::symmetric_eigenvalues(&m).map_err(|e| e.to_string())?;
        for v in vals.iter_mut() {
            *v = v.max(0.0);
        }
        return SpectrumView::new(vals).map_err(|e| e.to_string());
    }
    let family = flags
        .get("family")
        .ok_or("need --family (or --matrix-file)")?;
    let family = Family::parse(family).map_err(|e| e.to_string())?;
    let n = flags
        .parse_num::<usize>("n")?
        .ok_or("need --n with --family")?;
    let big_r = flags
        .parse_num::<usize>("R")?
        .ok_or("need --R with --family")?;
    let seed = flags.parse_num::<u64>("matrix-seed")?.unwrap_or(0);
    let spec = SyntheticSpec::new(family, n, big_r, seed).map_err(|e| e.to_string())?;
    spec.exact_spectrum().map_err(|e| e.to_string())
}

fn cmd_spectrum(args: &[String]) -> ExitCode {
    let flags = match Flags::parse(args, &[]) {
        Ok(f) => f,
        Err(e) => return usage_error(&e),
    };
    if let Some(f) = flags.unknown(&["family", "n", "R", "matrix-seed", "count", "matrix-file"]) {
        return usage_error(&format!("unknown flag --{f}"));
    }
    let spectrum = match parse_spectrum_source(&flags) {
        Ok(s) => s,
        Err(e) => return runtime_error(&e),
    };
    let count = match flags.parse_num::<usize>("count") {
        Ok(c) => c.unwrap_or(spectrum.len()),
        Err(e) => return usage_error(&e),
    };
    for v in spectrum.eigenvalues().iter().take(count) {
        println!("{}", format_float(*v));
    }
    ExitCode::SUCCESS
}

fn cmd_bounds(args: &[String]) -> ExitCode {
    let flags = match Flags::parse(args, &[]) {
        Ok(f) => f,
        Err(e) => return usage_error(&e),
    };
    if let Some(f) = flags.unknown(&[
        "family",
        "n",
        "R",
        "matrix-seed",
        "matrix-file",
        "r",
        "k",
        "alpha",
    ]) {
        return usage_error(&format!("unknown flag --{f}"));
    }
    let spectrum = match parse_spectrum_source(&flags) {
        Ok(s) => s,
        Err(e) => return runtime_error(&e),
    };
    let (r, k) = match (flags.parse_num::<usize>("r"), flags.parse_num::<usize>("k")) {
        (Ok(Some(r)), Ok(Some(k))) => (r, k),
        (Err(e), _) | (_, Err(e)) => return usage_error(&e),
        _ => return usage_error("bounds needs --r and --k"),
    };
    let alpha = match flags.parse_num::<f64>("alpha") {
        Ok(a) => a.unwrap_or(1.0),
        Err(e) => return usage_error(&e),
    };
    match thm1_s1_bound(&spectrum, r, k, alpha) {
        Ok(v) => println!("thm1_s1 {}", format_float(v)),
        Err(e) => println!("thm1_s1 unavailable ({e})"),
    }
    match thm1_sinf_bound(&spectrum, r, k, alpha) {
        Ok(v) => println!("thm1_sinf {}", format_float(v)),
        Err(e) => println!("thm1_sinf unavailable ({e})"),
    }
    match thm2_s1_bound(&spectrum, r, k, alpha) {
        Ok((v, rho)) => println!("thm2_s1 {} (rho = {rho})", format_float(v)),
        Err(e) => println!("thm2_s1 unavailable ({e})"),
    }
    match thm2_sinf_bound(&spectrum, r, k, alpha) {
        Ok((v, rho)) => println!("thm2_sinf {} (rho = {rho})", format_float(v)),
        Err(e) => println!("thm2_sinf unavailable ({e})"),
    }
    match nystrom_s1_bound(&spectrum, k, alpha) {
        Ok((v, rho)) => println!("nystrom_s1 {} (rho = {rho})", format_float(v)),
        Err(e) => println!("nystrom_s1 unavailable ({e})"),
    }
    ExitCode::SUCCESS
}

fn cmd_approx(args: &[String]) -> ExitCode {
    let flags = match Flags::parse(args, &[]) {
        Ok(f) => f,
        Err(e) => return usage_error(&e),
    };
    if let Some(f) = flags.unknown(&["matrix-file", "r", "k", "dist", "seed", "out"]) {
        return usage_error(&format!("unknown flag --{f}"));
    }
    let Some(path) = flags.get("matrix-file") else {
        return usage_error("approx needs --matrix-file");
    };
    let (r, k) = match (flags.parse_num::<usize>("r"), flags.parse_num::<usize>("k")) {
        (Ok(Some(r)), Ok(Some(k))) => (r, k),
        (Err(e), _) | (_, Err(e)) => return usage_error(&e),
        _ => return usage_error("approx needs --r and --k"),
    };
    let dist = match flags.get("dist") {
        None => TestMatrixKind::Orthonormal,
        Some(d) => match TestMatrixKind::parse(d) {
            Ok(d) => d,
            Err(e) => return usage_error(&e.to_string()),
        },
    };
    let seed = match flags.parse_num::<u64>("seed") {
        Ok(s) => s.unwrap_or(0),
        Err(e) => return usage_error(&e),
    };
    let a = match load_matrix_file(Path::new(path)) {
        Ok(a) => a,
        Err(e) => return runtime_error(&e.to_string()),
    };
    let n = a.rows();
    let omega = match dist {
        TestMatrixKind::Gaussian => TestMatrix::draw_gaussian(n, k, seed),
        TestMatrixKind::Orthonormal => TestMatrix::draw_orthonormal(n, k, seed),
        TestMatrixKind::Ssft => TestMatrix::draw_ssft(n, k, seed),
    };
    let omega = match omega {
        Ok(o) => o,
        Err(e) => return runtime_error(&e.to_string()),
    };
    let sketch = match NystromSketch::init(&a, omega) {
        Ok(s) => s,
        Err(e) => return runtime_error(&e.to_string()),
    };
    let f = match fixed_rank_psd(&sketch, r, &ShiftPolicy::default()) {
        Ok(f) => f,
        Err(e) => return runtime_error(&e.to_string()),
    };
    let mut out = String::new();
    out.push_str(&format!("n {n}\nr {r}\n"));
    out.push_str("lambda");
    for l in f.lambda() {
        out.push_str(&format!(" {}", format_float(*l)));
    }
    out.push('\n');
    for i in 0..n {
        let row: Vec<String> = (0..r).map(|j| format_float(f.u().get(i, j))).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    match flags.get("out") {
        Some(dest) => {
            if let Err(e) = std::fs::write(dest, out) {
                return runtime_error(&format!("cannot write {dest}: {e}"));
            }
        }
        None => print!("{out}"),
    }
    ExitCode::SUCCESS
}

fn cmd_stability(args: &[String]) -> ExitCode {
    let flags = match Flags::parse(args, &[]) {
        Ok(f) => f,
        Err(e) => return usage_error(&e),
    };
    if let Some(f) = flags.unknown(&["n", "k", "trials", "seed", "threads"]) {
        return usage_error(&format!("unknown flag --{f}"));
    }
    let n = match flags.parse_num::<usize>("n") {
        Ok(v) => v.unwrap_or(500),
        Err(e) => return usage_error(&e),
    };
    let k = match flags.parse_num::<usize>("k") {
        Ok(v) => v.unwrap_or(40),
        Err(e) => return usage_error(&e),
    };
    let trials = match flags.parse_num::<usize>("trials") {
        Ok(v) => v.unwrap_or(20),
        Err(e) => return usage_error(&e),
    };
    let seed = match flags.parse_num::<u64>("seed") {
        Ok(v) => v.unwrap_or(0),
        Err(e) => return usage_error(&e),
    };
    let threads = match flags.parse_num::<usize>("threads") {
        Ok(v) => v.unwrap_or(1).max(1),
        Err(e) => return usage_error(&e),
    };
    let cfg = stability_preset(n, k, trials, seed);
    let start = Instant::now();
    let records = match run_experiment(&cfg, threads) {
        Ok(r) => r,
        Err(e) => return runtime_error(&e.to_string()),
    };
    eprintln!(
        "ran {} records in {:.2} s",
        records.len(),
        start.elapsed().as_secs_f64()
    );
    let stable = cell_mean(
        &records,
        k,
        Method::Stable,
        TestMatrixKind::Gaussian,
        SchattenOrder::One,
    );
    let naive = cell_mean(
        &records,
        k,
        Method::Naive,
        TestMatrixKind::Gaussian,
        SchattenOrder::One,
    );
    match (stable, naive) {
        (Some(s), Some(nv)) => {
            println!("stable mean Schatten-1 relative error {}", format_float(s));
            println!("naive  mean Schatten-1 relative error {}", format_float(nv));
            let ratio = nv / s.max(1e-300);
            println!("naive / stable error ratio {:.3e}", ratio);
            ExitCode::SUCCESS
        }
        _ => runtime_error("stability run produced no aggregate"),
    }
}
