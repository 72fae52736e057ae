use std::process::{Command, Output};

fn shapeinv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shapeinv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn oscillator_spectrum_rows() {
    let o = shapeinv(&["spectrum", "--model", "oscillator", "--omega", "1", "--m-max", "3", "--format", "csv"]);
    assert!(o.status.success());
    let rows: Vec<Vec<f64>> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows, vec![vec![0.0, 0.0, 2.0], vec![1.0, 2.0, 4.0], vec![2.0, 4.0, 6.0], vec![3.0, 6.0, 8.0]]);
}

#[test]
fn morse_spectrum_is_clipped() {
    let o = shapeinv(&["spectrum", "--model", "morse", "--alpha", "1", "--D", "2", "--m-max", "5", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["levels"].as_array().unwrap().len(), 3);
    assert!(stderr(&o).contains("clipped"));
}

#[test]
fn exit_codes_and_error_prefix() {
    let o = shapeinv(&["spectrum"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[config]:"));

    let o = shapeinv(&["spectrum", "--model", "morse", "--alpha", "-1"]);
    assert_eq!(o.status.code(), Some(2));

    let o = shapeinv(&["groundstate", "--model", "kinetic"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("error[divergence]:"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("h.json");
    std::fs::write(&bad, r#"{"n_max": 2, "a": [1.0, 1.0, 1.0], "b": [2.0, 2.0, 0.0]}"#).unwrap();
    let o = shapeinv(&["factorize", "--input", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("negativity at n="));

    let o = shapeinv(&["verify", "--model", "oscillator", "--perturb", "n=5"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).lines().any(|l| l.contains("epsilon1_n_independence") && l.ends_with("FAIL")));
}

#[test]
fn factorize_roundtrip_and_offset() {
    let o = shapeinv(&["factorize", "--model", "oscillator", "-N", "20", "--roundtrip"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["roundtrip_residual"].as_f64().unwrap() <= 1e-9);

    // H + 0.5 factorized about 0.5 gives the same chain
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.json");
    let a: Vec<f64> = (0..=200).map(|n| 2.0 * n as f64 + 1.5 + 0.5).collect();
    let b: Vec<f64> = (0..=200).map(|n| ((n as f64 + 1.0) * (n as f64 + 1.5)).sqrt()).collect();
    std::fs::write(&path, serde_json::json!({"n_max": 200, "a": a, "b": b}).to_string()).unwrap();
    let o = shapeinv(&["factorize", "--input", path.to_str().unwrap(), "--eps0", "0.5", "-N", "10"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let c_sq: Vec<f64> = serde_json::from_value(v["c_sq"].clone()).unwrap();
    for (n, c) in c_sq.iter().enumerate() {
        assert!((c - (n as f64 + 1.5)).abs() < 1e-9, "n={n}: {c}");
    }
}

#[test]
fn config_file_and_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"model": {"model": "oscillator", "l": 0, "omega": 1.0, "lambda": 1.3}, "N": 80}"#).unwrap();
    let out = dir.path().join("psi.csv");
    let o = shapeinv(&[
        "groundstate",
        "--config",
        cfg.to_str().unwrap(),
        "--compare-closed-form",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("x,value,closed_form\n"));
    for line in text.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert!((v[1] - v[2]).abs() <= 1e-7);
    }
}

#[test]
fn inverse_from_spectrum_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("levels.txt");
    std::fs::write(&path, "0 1 4 9 16 25 36\n").unwrap();
    let file = path.to_str().unwrap();
    let o = shapeinv(&["inverse", "--spectrum-file", file, "--c0-sq", "10", "--d1-sq", "10", "-M", "5", "--validate"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["spectrum_deviation"].as_f64().unwrap() < 1e-12);
    // d_{j+1}² = (j+1)(d1² + 1) - (j+1)² goes negative for small d1²
    let o = shapeinv(&["inverse", "--spectrum-file", file, "--c0-sq", "10", "--d1-sq", "1", "-M", "5"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn hierarchy_flags_perturbed_model() {
    let clean = shapeinv(&["hierarchy", "--model", "morse", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&clean.stdout).unwrap();
    assert_eq!(v["flagged"], false);
    assert_eq!(v["levels"].as_array().unwrap().len(), 8);
    let bad = shapeinv(&["hierarchy", "--model", "morse", "--perturb", "n=5", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&bad.stdout).unwrap();
    assert_eq!(v["flagged"], true);
}

#[test]
fn coherent_vacuum_and_json_report() {
    let o = shapeinv(&["coherent", "--model", "oscillator", "--z-re", "0", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["real"][0], 1.0);
    assert!(v["real"].as_array().unwrap()[1..].iter().all(|x| x == 0.0));

    let o = shapeinv(&["verify", "--model", "kinetic", "--json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], true);
}
