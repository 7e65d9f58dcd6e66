use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use parma::cli::parse_acov_csv;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_parma"))
}

fn write_model(dir: &Path, name: &str, json: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, json).unwrap();
    path
}

const WHITE_NOISE: &str = r#"{"period": 1, "p": 0, "q": 0, "sigma2": [2.0]}"#;
const PAR1: &str = r#"{"period": 2, "p": 1, "q": 0, "phi": [[0.5], [0.8]], "sigma2": [1.0, 1.0]}"#;
const ARMA11: &str =
    r#"{"period": 1, "p": 1, "q": 1, "phi": [[0.5]], "theta": [[0.4]], "sigma2": [1.0]}"#;
const PMA1: &str =
    r#"{"period": 2, "p": 0, "q": 1, "theta": [[0.3], [0.7]], "sigma2": [1.0, 1.0]}"#;
const EXPLOSIVE: &str = r#"{"period": 1, "p": 1, "q": 0, "phi": [[1.1]], "sigma2": [1.0]}"#;

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn validate_reports_causality() {
    let dir = tempfile::tempdir().unwrap();
    let wn = write_model(dir.path(), "wn.json", WHITE_NOISE);
    let (code, out, _) = run(&["validate", "--model", wn.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.contains("spectral_radius: 0\n"), "{out}");
    assert!(out.contains("causal: true"));

    let bad = write_model(dir.path(), "bad.json", EXPLOSIVE);
    let (code, out, _) = run(&["validate", "--model", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(out.contains("spectral_radius: 1.1"), "{out}");
    assert!(out.contains("causal: false"));
}

#[test]
fn validate_names_offending_field() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_model(
        dir.path(),
        "m.json",
        r#"{"period": 2, "p": 1, "q": 0, "phi": [[0.5, 0.1], [0.8]], "sigma2": [1.0, 1.0]}"#,
    );
    let (code, _, err) = run(&["validate", "--model", m.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("dimension mismatch in `phi`"), "{err}");

    let m = write_model(
        dir.path(),
        "u.json",
        r#"{"period": 1, "p": 0, "q": 0, "sigma2": [1.0], "mu": 0}"#,
    );
    let (code, _, err) = run(&["validate", "--model", m.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("mu"), "{err}");

    let (code, _, _) = run(&["validate", "--model", "/nonexistent/model.json"]);
    assert_eq!(code, 1);
    let (code, _, _) = run(&["validate"]);
    assert_eq!(code, 1);
    let (code, _, _) = run(&["frobnicate"]);
    assert_eq!(code, 1);
}

#[test]
fn psi_prints_weights() {
    let dir = tempfile::tempdir().unwrap();
    let wn = write_model(dir.path(), "wn.json", WHITE_NOISE);
    let (code, out, _) = run(&["psi", "--model", wn.to_str().unwrap(), "--max-k", "1"]);
    assert_eq!(code, 0);
    assert_eq!(out, "season,k,psi\n1,0,1\n1,1,0\n");

    let m = write_model(dir.path(), "arma.json", ARMA11);
    let (_, out, _) = run(&["psi", "--model", m.to_str().unwrap(), "--max-k", "2"]);
    let psi: Vec<f64> = out
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(psi.len(), 3);
    for (got, want) in psi.iter().zip([1.0, 0.1, 0.05]) {
        assert!((got - want).abs() < 1e-15);
    }

    let m = write_model(dir.path(), "pma.json", PMA1);
    let (_, out, _) = run(&["psi", "--model", m.to_str().unwrap(), "--max-k", "1"]);
    assert_eq!(out, "season,k,psi\n1,0,1\n1,1,-0.3\n2,0,1\n2,1,-0.7\n");
}

#[test]
fn acov_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let wn = write_model(dir.path(), "wn.json", WHITE_NOISE);
    let out_path = dir.path().join("wn.csv");
    let (code, _, _) = run(&[
        "acov",
        "--model",
        wn.to_str().unwrap(),
        "--max-lag",
        "1",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(
        fs::read_to_string(&out_path).unwrap(),
        "season,lag,gamma\n1,0,2\n1,1,0\n"
    );

    let m = write_model(dir.path(), "par1.json", PAR1);
    let out_path = dir.path().join("par1.csv");
    let (code, stdout, _) = run(&[
        "acov",
        "--model",
        m.to_str().unwrap(),
        "--max-lag",
        "1",
        "--out",
        out_path.to_str().unwrap(),
        "--check-oracle",
        "1e-10",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("oracle check passed"));
    let records = parse_acov_csv(&fs::read_to_string(&out_path).unwrap()).unwrap();
    let keys: Vec<(usize, usize)> = records.iter().map(|r| (r.season, r.lag)).collect();
    assert_eq!(keys, vec![(1, 0), (1, 1), (2, 0), (2, 1)]);
    for (r, want) in records
        .iter()
        .zip([1.4880952, 0.9761905, 1.9523810, 1.1904762])
    {
        assert!((r.gamma - want).abs() < 1e-6);
    }
}

#[test]
fn acov_refuses_non_causal_models() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_model(dir.path(), "bad.json", EXPLOSIVE);
    let out_path = dir.path().join("bad.csv");
    let (code, _, err) = run(&[
        "acov",
        "--model",
        bad.to_str().unwrap(),
        "--max-lag",
        "3",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("not causal"));
    assert!(!out_path.exists());
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_model(dir.path(), "par1.json", PAR1);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let (code, _, _) = run(&[
            "simulate",
            "--model",
            m.to_str().unwrap(),
            "--periods",
            "3",
            "--seed",
            "7",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
    }
    let text = fs::read(&a).unwrap();
    assert_eq!(text, fs::read(&b).unwrap());
    let text = String::from_utf8(text).unwrap();
    let mut lines = text.lines();
    let meta = lines.next().unwrap();
    assert!(
        meta.starts_with("# seed=7 rng=chacha8-stream/ziggurat-normal"),
        "{meta}"
    );
    assert_eq!(lines.next().unwrap(), "cycle,season,y");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6);
    assert!(rows[0].starts_with("1,1,"));
    assert!(rows[5].starts_with("3,2,"));

    let bad = write_model(dir.path(), "bad.json", EXPLOSIVE);
    let (code, _, _) = run(&[
        "simulate",
        "--model",
        bad.to_str().unwrap(),
        "--periods",
        "3",
        "--seed",
        "7",
        "--out",
        dir.path().join("c.csv").to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&[
        "simulate",
        "--model",
        m.to_str().unwrap(),
        "--periods",
        "0",
        "--seed",
        "7",
        "--out",
        dir.path().join("d.csv").to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
}

#[test]
fn verify_checks_both_routes() {
    let dir = tempfile::tempdir().unwrap();
    let wn = write_model(dir.path(), "wn.json", WHITE_NOISE);
    let (code, out, _) = run(&[
        "verify",
        "--model",
        wn.to_str().unwrap(),
        "--max-lag",
        "5",
        "--tol",
        "1e-10",
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("max_residual: 0\n"));

    let m = write_model(dir.path(), "par1.json", PAR1);
    let (code, out, _) = run(&[
        "verify",
        "--model",
        m.to_str().unwrap(),
        "--max-lag",
        "10",
        "--tol",
        "1e-8",
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("status: ok"));

    let bad = write_model(dir.path(), "bad.json", EXPLOSIVE);
    let (code, _, _) = run(&[
        "verify",
        "--model",
        bad.to_str().unwrap(),
        "--max-lag",
        "2",
        "--tol",
        "1e-8",
    ]);
    assert_eq!(code, 2);

    // 0.9999 per step: the truncated sum either stalls or misses the tolerance
    let near = write_model(
        dir.path(),
        "near.json",
        r#"{"period": 1, "p": 1, "q": 0, "phi": [[0.9999]], "sigma2": [1.0]}"#,
    );
    let (code, _, _) = run(&[
        "verify",
        "--model",
        near.to_str().unwrap(),
        "--max-lag",
        "2",
        "--tol",
        "1e-12",
    ]);
    assert!(code == 0 || code == 3, "exit {code}");
}

#[test]
fn help_exits_cleanly() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("acov"));
}
