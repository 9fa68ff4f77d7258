use maslovflow_cli::Report;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("maslovflow-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_maslovflow")).args(args).output().unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn report(args: &[&str]) -> (i32, Report) {
    let r = run(args);
    assert!(r.code != 2, "{}", r.stderr);
    (r.code, serde_json::from_str(&r.stdout).unwrap_or_else(|e| panic!("{e}: {}", r.stdout)))
}

fn value(r: &Report) -> i64 {
    r.result["value"].as_i64().unwrap()
}

fn rows(csv: &str) -> Vec<(f64, f64, usize)> {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("lambda,mu,multiplicity"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect()
}

const VERTICAL_1: &str = r#"{"kind": "constant", "basis": [[0], [1]]}"#;
const HORIZONTAL_1: &str = r#"{"kind": "constant", "basis": [[1], [0]]}"#;

fn pair(g1: &str, g2: &str, extra: &str) -> String {
    format!(r#"{{"gamma1": {g1}, "gamma2": {g2}{extra}}}"#)
}

#[test]
fn normalization_configs() {
    for (file, expected) in [("normalization.json", 1), ("normalization_prime.json", -1)] {
        let cfg = bundled(file);
        let cfg = cfg.to_str().unwrap();
        let (code, m) = report(&["maslov", "--config", cfg]);
        assert_eq!((code, value(&m)), (0, expected));
        let (code, s) = report(&["sflow", "--config", cfg]);
        assert_eq!((code, value(&s)), (0, expected));
        assert!(s.result["partition"].as_array().unwrap().len() >= 2);
        assert_eq!(s.effective.solver.steps, 256);
    }
}

#[test]
fn transversal_constant_pair_is_zero() {
    let cfg = scratch("transversal.json", &pair(HORIZONTAL_1, VERTICAL_1, ""));
    let (code, m) = report(&["maslov", "--config", cfg.to_str().unwrap()]);
    assert_eq!((code, value(&m)), (0, 0));
    assert!(m.result["crossings"].as_array().unwrap().is_empty());
}

#[test]
fn concatenation_adds_separate_runs() {
    let first = r#"{"kind": "gamma_nor", "n": 1}"#;
    let second = r#"{"kind": "rotation", "base": [[1], [0]], "theta": [[0, 0], [1, 2.0]]}"#;
    let index = |g1: &str, name: &str| {
        let cfg = scratch(name, &pair(g1, VERTICAL_1, ""));
        value(&report(&["maslov", "--config", cfg.to_str().unwrap()]).1)
    };
    let whole = index(&format!(r#"{{"kind": "concat", "pieces": [{first}, {second}]}}"#), "concat.json");
    let (a, b) = (index(first, "first.json"), index(second, "second.json"));
    assert_eq!(whole, a + b);
    assert_eq!((a, b), (1, 1));
}

#[test]
fn failed_expectation_exits_one() {
    let cfg = scratch("wrong.json", &pair(r#"{"kind": "gamma_nor", "n": 1}"#, VERTICAL_1, r#", "expect": 0"#));
    let (code, r) = report(&["maslov", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(!r.passed);
}

#[test]
fn config_errors_exit_two() {
    let unknown = scratch("unknown.json", "{\n  \"gamma1\": {\"kind\": \"gamma_nor\", \"n\": 1},\n  \"steps\": 3\n}");
    let r = run(&["maslov", "--config", unknown.to_str().unwrap()]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("steps") && r.stderr.contains("line 3"), "{}", r.stderr);

    let mismatch = scratch("mismatch.json", &pair(r#"{"kind": "gamma_nor", "n": 2}"#, VERTICAL_1, ""));
    let r = run(&["sflow", "--config", mismatch.to_str().unwrap()]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("n = 2"), "{}", r.stderr);

    let r = run(&["maslov", "--config", "/nonexistent/config.json"]);
    assert_eq!(r.code, 2);

    let cfg = bundled("spectra_nor.json");
    let r = run(&["spectra", "--config", cfg.to_str().unwrap(), "--window", &format!("{},1", -PI / 2.0)]);
    assert_eq!(r.code, 2, "{}", r.stderr);
    assert!(r.stderr.contains("eigenvalue"), "{}", r.stderr);
}

#[test]
fn reports_and_csv_are_deterministic() {
    let cfg = bundled("spectra_nor.json");
    let cfg = cfg.to_str().unwrap();
    let strip = |s: &str| s.lines().filter(|l| !l.contains("timing_seconds")).collect::<Vec<_>>().join("\n");
    let a = run(&["sflow", "--config", cfg]);
    let b = run(&["sflow", "--config", cfg]);
    assert_eq!(strip(&a.stdout), strip(&b.stdout));
    let c1 = run(&["spectra", "--config", cfg]).stdout;
    let c2 = run(&["spectra", "--config", cfg]).stdout;
    assert_eq!(c1, c2);

    let small = bundled("suite_small.json");
    let r1: Report = serde_json::from_str(&run(&["verify", "axioms", "--config", small.to_str().unwrap()]).stdout).unwrap();
    let r2: Report = serde_json::from_str(&run(&["verify", "axioms", "--config", small.to_str().unwrap()]).stdout).unwrap();
    assert_eq!(r1.without_timing(), r2.without_timing());
    let r3: Report = serde_json::from_str(&run(&["verify", "axioms", "--config", small.to_str().unwrap(), "--seed", "8"]).stdout).unwrap();
    assert_ne!(r1.result, r3.result);
    assert_eq!(r3.effective.seed, 8);
}

#[test]
fn doubled_resolution_keeps_the_integer() {
    let cfg = bundled("hamiltonian.json");
    let cfg = cfg.to_str().unwrap();
    let (_, coarse) = report(&["sflow", "--config", cfg]);
    let (_, fine) = report(&["sflow", "--config", cfg, "--steps", "512"]);
    assert_eq!(value(&coarse), value(&fine));
    assert_eq!(fine.inputs.solver.steps, 512);
}

#[test]
fn spectra_follow_the_closed_form_branches() {
    let cfg = scratch("branches.json", &pair(r#"{"kind": "gamma_nor", "n": 1}"#, VERTICAL_1, ""));
    let csv_path = std::env::temp_dir().join(format!("maslovflow-branches-{}.csv", std::process::id()));
    let r = run(&["spectra", "--config", cfg.to_str().unwrap(), "--window=-3,3", "--csv", csv_path.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert!(csv.ends_with('\n'));
    let rows = rows(&csv);
    let lambdas: Vec<f64> = rows.iter().map(|r| r.0).collect();
    assert!(lambdas.windows(2).all(|w| w[0] <= w[1]));
    assert!(lambdas.contains(&1.0));
    for &(lambda, mu, mult) in &rows {
        // distance from mu to c + pi Z
        let off = |c: f64| ((mu - c) / PI - ((mu - c) / PI).round()).abs() * PI;
        // for n = 1 the branch pi/2 + pi Z (multiplicity n - 1) is empty
        assert!(off(PI * lambda - PI / 2.0) < 1e-7, "lambda={lambda} mu={mu}");
        assert_eq!(mult, 1, "lambda={lambda} mu={mu}");
    }
    // every branch point inside the window is present
    for k in 0..=100 {
        let lambda = k as f64 / 100.0;
        let at: Vec<f64> = rows.iter().filter(|r| (r.0 - lambda).abs() < 1e-12).map(|r| r.1).collect();
        for j in -2..=2 {
            let c = PI * lambda - PI / 2.0 + PI * j as f64;
            if c.abs() < 3.0 - 1e-6 {
                assert!(at.iter().any(|m| (m - c).abs() < 1e-7), "missing {c} at {lambda}");
            }
        }
    }
}

#[test]
fn empty_window_gives_header_only_csv() {
    let cfg = scratch("empty.json", &pair(HORIZONTAL_1, VERTICAL_1, r#", "solver": {"window": [-1, 1], "lambda_samples": 5}"#));
    let r = run(&["spectra", "--config", cfg.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.stdout, "lambda,mu,multiplicity\n");
}

#[test]
fn scalar_shift_moves_the_csv() {
    let nor = r#"{"kind": "gamma_nor", "n": 1}"#;
    let shift = r#", "potential": {"n": 1, "terms": [{"lambda_power": 0, "t_power": 0, "matrix": [[0.1, 0], [0, 0.1]]}]}"#;
    let samples = r#""lambda_samples": 21"#;
    let base = scratch("base.json", &pair(nor, VERTICAL_1, &format!(r#", "solver": {{"window": [-3, 3], {samples}}}"#)));
    let moved = scratch("moved.json", &pair(nor, VERTICAL_1, &format!(r#"{shift}, "solver": {{"window": [-2.9, 3.1], {samples}}}"#)));
    let a = rows(&run(&["spectra", "--config", base.to_str().unwrap()]).stdout);
    let b = rows(&run(&["spectra", "--config", moved.to_str().unwrap()]).stdout);
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!((x.0, x.2), (y.0, y.2));
        assert!((y.1 - x.1 - 0.1).abs() < 1e-7, "{x:?} vs {y:?}");
    }
}

#[test]
fn verify_single_instances_and_suites() {
    for (which, file) in [("clm", "hamiltonian.json"), ("hamiltonian", "hamiltonian.json"), ("alpha-beta", "alpha_beta.json"), ("morse", "morse.json")] {
        let cfg = bundled(file);
        let (code, r) = report(&["verify", which, "--config", cfg.to_str().unwrap()]);
        assert_eq!(code, 0, "{which}: {:?}", r.result);
        assert!(r.passed);
    }
    let small = bundled("suite_small.json");
    let (code, r) = report(&["verify", "gap", "--config", small.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(r.result["checks"].as_array().unwrap().len(), 5);

    let out = std::env::temp_dir().join(format!("maslovflow-report-{}.json", std::process::id()));
    let r = run(&["verify", "axioms", "--config", small.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!((r.code, r.stdout.as_str()), (0, ""));
    let written: Report = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(written.command, "verify axioms");
}

#[test]
fn bad_reparametrization_is_a_config_error() {
    let cfg = bundled("alpha_beta.json");
    let mut text = std::fs::read_to_string(cfg).unwrap();
    text = text.replace(r#""beta": [[0.0, 0.5], [1.0, 1.0]]"#, r#""beta": [[0.0, 0.4], [1.0, 1.0]]"#);
    let bad = scratch("bad_ab.json", &text);
    let r = run(&["verify", "alpha-beta", "--config", bad.to_str().unwrap()]);
    assert_eq!(r.code, 2, "{}", r.stderr);
}
