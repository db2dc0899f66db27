use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fractal-onb")).args(args).output().expect("binary runs")
}

fn run_config(cmd: &str, cfg: &str, extra: &[&str]) -> Output {
    let path = config(cfg);
    let mut args = vec![cmd, "--config", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn check_pair_exit_codes() {
    let ok = run_config("check-pair", "cantor.toml", &[]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(json(&ok)["pass"], true);
    assert_eq!(run_config("check-pair", "cantor_thirds.toml", &[]).status.code(), Some(0));

    let bad = run_config("check-pair", "cantor_thirds_fails.toml", &[]);
    assert_eq!(bad.status.code(), Some(2));
    let defect = json(&bad)["defect"].as_f64().unwrap();
    assert!(defect > 0.1, "{defect}");
    // cycles are only defined for a spectral pair
    assert_eq!(run_config("find-cycles", "cantor_thirds_fails.toml", &[]).status.code(), Some(2));
}

#[test]
fn usage_and_config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let no_l = dir.path().join("no_l.toml");
    std::fs::write(&no_l, "R = 4\nB = [0, 2]\n").unwrap();
    let out = run(&["check-pair", "--config", no_l.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("L"));

    assert_eq!(run(&["check-pair"]).status.code(), Some(1));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
    let missing = run(&["check-pair", "--config", "/definitely/not/here.toml"]);
    assert_eq!(missing.status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn cantor_cycles_are_zero() {
    let out = run_config("find-cycles", "cantor.toml", &[]);
    assert_eq!(out.status.code(), Some(0));
    let cycles = json(&out)["cycles"].as_array().unwrap().clone();
    assert_eq!(cycles.len(), 1);
    assert_eq!(cycles[0]["points"][0].as_f64(), Some(0.0));
}

#[test]
fn cantor_basis_is_orthonormal() {
    let out = run_config("gen-basis", "cantor.toml", &["--max-len", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["elements"], 32);
    assert_eq!(report["gram"]["pass"], true);
    assert!(report["gram"]["max_off_diagonal"].as_f64().unwrap() < 1e-10);
    let freqs: Vec<f64> = report["integer_frequencies"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(&freqs[..4], &[0.0, 1.0, 4.0, 5.0]);
}

#[test]
fn walsh_writes_sixteen_plots() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config("walsh", "walsh4.toml", &["--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let svg = std::fs::read_to_string(dir.path().join("walsh.svg")).unwrap();
    assert_eq!(svg.matches("<path").count(), 16);
    let csv = std::fs::read_to_string(dir.path().join("walsh.csv")).unwrap();
    assert!(csv.starts_with("# fractal-onb v1\n"));
    assert_eq!(csv.lines().count(), 2 + 16 * 16);
}

#[test]
fn transform_round_trip_and_length_check() {
    let dir = tempfile::tempdir().unwrap();
    let signal = dir.path().join("signal.csv");
    let text: String = (0..16).map(|k| format!("{}\n", (k as f64).sin())).collect();
    std::fs::write(&signal, format!("value\n{text}")).unwrap();
    let out = run_config("transform", "walsh4.toml", &["--input", signal.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["max_roundtrip_error"].as_f64().unwrap() < 1e-12);

    std::fs::write(&signal, "1\n2\n3\n").unwrap();
    let bad = run_config("transform", "walsh4.toml", &["--input", signal.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn reruns_are_byte_identical() {
    for (cmd, cfg) in [("sample", "cantor.toml"), ("gen-basis", "cantor.toml"), ("walsh", "haar2.json")] {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        for d in [&a, &b] {
            let out = run_config(cmd, cfg, &["--seed", "7", "--samples", "2000", "--max-len", "3", "--out", d.path().to_str().unwrap()]);
            assert_eq!(out.status.code(), Some(0), "{cmd}");
        }
        let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert!(!names.is_empty());
        for name in names {
            let x = std::fs::read(a.path().join(&name)).unwrap();
            let y = std::fs::read(b.path().join(&name)).unwrap();
            assert_eq!(x, y, "{cmd}: {name:?} differs");
        }
    }
}

#[test]
fn flags_override_config_and_csv_goes_to_stdout() {
    let out = run_config("sample", "cantor.toml", &["--samples", "10", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 12);
    let none = run_config("verify-cuntz", "cantor.toml", &["--format", "csv"]);
    assert_eq!(none.status.code(), Some(1));
}

#[test]
fn verify_cuntz_and_transfer_pass_on_cantor() {
    let v = run_config("verify-cuntz", "cantor.toml", &["--grid", "128"]);
    assert_eq!(v.status.code(), Some(0));
    assert_eq!(json(&v)["report"]["pass"], true);
    let t = run_config("transfer", "cantor.toml", &["--iters", "20"]);
    assert_eq!(t.status.code(), Some(0));
    let d = json(&t)["distance_to_one"].as_array().unwrap().last().unwrap().as_f64().unwrap();
    assert!(d < 1e-10, "{d}");
}

#[test]
fn non_unitary_matrix_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "N = 2\nrows = [[[1, 0], [1, 0]], [[1, 0], [-1, 0]]]\n").unwrap();
    let out = run(&["walsh", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
