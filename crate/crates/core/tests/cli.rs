use std::f64::consts::TAU;
use std::process::{Command, Output};

use serde_json::Value;

fn trigpred(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trigpred"))
        .args(["--grid-size", "4096"])
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn family(name: &str, params: &str) -> String {
    format!(r#"{{"density": {{"family": "{name}", "params": {{{params}}}}}}}"#)
}

fn close(v: &Value, want: f64, tol: f64) {
    let got = v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"));
    assert!((got - want).abs() <= tol, "{got} vs {want}");
}

#[test]
fn interpolation_with_cross_error() {
    let mun = family("ex4.11", r#""n": 7"#);
    let mu0 = family("ex4.11", "");
    let v = json_of(&trigpred(&["interp", "--measure", &mun, "--p", "2", "--cross", &mu0]));
    close(&v["distance"], 3f64.sqrt(), 1e-9);
    close(&v["cross_error"], 4.0 / 3f64.sqrt(), 1e-9);
}

#[test]
fn l1_classification_is_reported() {
    let v = json_of(&trigpred(&["interp", "--measure", &family("constant", r#""c": 2"#), "--p", "1"]));
    assert!(v["l1_classification"].is_string());
    close(&v["distance"], 2.0, 1e-12);
}

#[test]
fn szego_coefficients() {
    let m = family("cos", r#""a": 2"#);
    let out = trigpred(&["--series-order", "4", "szego", "--measure", &m]);
    let v = json_of(&out);
    close(&v["distance"], (2.0 + 3f64.sqrt()) / 2.0, 1e-8);
    let b = v["outer_coefficients"].as_array().unwrap();
    assert_eq!(b.len(), 4);
    close(&b[1][0], ((2.0 - 3f64.sqrt()) / 2.0).sqrt(), 1e-8);
}

#[test]
fn measure_from_file_with_atoms() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mu.json");
    let doc = r#"{"density": {"family": "constant", "params": {"c": 1}}, "atoms": [{"location": 0, "mass": 0.15915494309189535}]}"#;
    std::fs::write(&path, doc).unwrap();
    let v = json_of(&trigpred(&["finite", "--measure", path.to_str().unwrap(), "--freqs", "1", "--p", "2"]));
    close(&v["coeffs"][0][0], 1.0 / (1.0 + TAU), 1e-9);
    close(&v["distance"], (2.0 + TAU) / (1.0 + TAU), 1e-9);
}

#[test]
fn finite_augmentation_matches_direct_solve() {
    let m = family("cos", r#""a": 3, "b": 1.5, "k": 2"#);
    let aug = json_of(&trigpred(&["finite", "--measure", &m, "--freqs", "1,-2", "--p", "2", "--augment", "3"]));
    let direct = json_of(&trigpred(&["finite", "--measure", &m, "--freqs", "1,-2,3", "--p", "2"]));
    close(&aug["augmented"]["distance"], direct["distance"].as_f64().unwrap(), 1e-10);
    let lp = json_of(&trigpred(&["finite", "--measure", &m, "--freqs", "1,-2", "--p", "1.5"]));
    assert_eq!(lp["converged"], Value::Bool(true));
}

#[test]
fn periodic_distance_and_double_sum() {
    let m = family("ex7.5a", r#""n": 8"#);
    let v = json_of(&trigpred(&["periodic", "--measure", &m, "--q", "2", "--x", "1", "--p", "2"]));
    close(&v["distance"], 1.0 / std::f64::consts::PI, 1e-9);
    close(&v["distance_double_sum"], 1.0 / std::f64::consts::PI, 1e-9);
}

#[test]
fn msteps_outputs_and_condition_failure() {
    let m = family("cos", r#""a": 2"#);
    let v = json_of(&trigpred(&["msteps", "--measure", &m, "--m", "2", "--p", "3"]));
    close(&v["distance"], 2.0, 1e-8);
    assert_eq!(v["truncation_root_free"], Value::Bool(true));

    // w = exp(4 cos γ) has outer function exp(2z); 1 + 2z vanishes at −1/2.
    let n = 4096;
    let samples: Vec<f64> = (0..n).map(|k| (4.0 * ((k as f64 + 0.5) * TAU / n as f64).cos()).exp()).collect();
    let doc = serde_json::json!({"density": {"samples": samples}}).to_string();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.json");
    std::fs::write(&path, doc).unwrap();
    let out = trigpred(&["msteps", "--measure", path.to_str().unwrap(), "--m", "2", "--p", "3"]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let ok = trigpred(&["msteps", "--measure", path.to_str().unwrap(), "--m", "2", "--p", "2"]);
    close(&json_of(&ok)["distance"], 5.0, 1e-8);
}

#[test]
fn input_errors_exit_with_two() {
    for args in [
        vec!["interp", "--measure", "{not json", "--p", "2"],
        vec!["interp", "--measure", r#"{"density": {"family": "nope"}}"#, "--p", "2"],
        vec!["interp", "--measure", r#"{"density": {"family": "ex3.6c"}}"#, "--p", "2"],
        vec!["stability", "sweep", "--family", "ex7.5a", "--n", "1:4", "--problem", "interp", "--p", "2"],
        vec!["stability", "sweep", "--family", "ex4.11", "--n", "4:1", "--problem", "interp", "--p", "2"],
        vec!["periodic", "--measure", r#"{"density": {"family": "ex4.11"}}"#, "--q", "3", "--x", "1", "--p", "2"],
    ] {
        let out = trigpred(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.is_empty());
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    }
}

#[test]
fn sweep_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let json_path = dir.path().join("report.json");
    let csv_path = dir.path().join("report.csv");
    let out = trigpred(&[
        "stability", "sweep", "--family", "ex4.11", "--n", "4:16:4", "--problem", "interp", "--p", "2",
        "--out", json_path.to_str().unwrap(), "--csv", csv_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
    assert_eq!(v["verdicts"]["r1"], "fails");
    assert_eq!(v["verdicts"]["r2"], "fails");
    close(&v["rows"][0]["distance"], 3f64.sqrt(), 1e-9);
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.lines().nth(1).unwrap().starts_with("4,1.73205,"));
}

#[test]
fn sweep_degenerate_columns() {
    // φ_n ≡ 1 because w_n^{-1} is not integrable
    let v = json_of(&trigpred(&["stability", "sweep", "--family", "ex3.6a", "--n", "2,4", "--problem", "interp", "--p", "2"]));
    close(&v["rows"][0]["cross_n0"], 0.0, 0.0);
    // μ_0 is not absolutely continuous with respect to μ_n
    let v = json_of(&trigpred(&["stability", "sweep", "--family", "ex3.2a", "--n", "2,4", "--problem", "interp", "--p", "2"]));
    assert_eq!(v["rows"][1]["cross_n0"], "N/A");
    assert_eq!(v["verdicts"]["r2"], "not-applicable");
}

#[test]
fn custom_document_sweep() {
    let doc = r#"{"mu0": {"density": {"family": "constant", "params": {"c": 1}}},
                  "members": [{"n": 2, "measure": {"density": {"family": "cos", "params": {"a": 1.5}}}}]}"#;
    let v = json_of(&trigpred(&[
        "stability", "sweep", "--family", "custom-json", "--document", doc, "--n", "2", "--problem", "msteps",
        "--m", "1", "--p", "2",
    ]));
    close(&v["target"], 1.0, 1e-12);
}

#[test]
fn dinf_roundtrip_and_families() {
    let v = json_of(&trigpred(&["dinf"]));
    close(&v["d_inf_mu0"], 0.0, 1e-6);
    close(&v["d_inf_mun"], 1.0, 1e-6);
    let v = json_of(&trigpred(&["--seed", "7", "roundtrip", "--count", "20", "--len", "16"]));
    assert!(v["max_error"].as_f64().unwrap() < 1e-9);
    let v = json_of(&trigpred(&["families"]));
    assert!(v.as_array().unwrap().iter().any(|f| f == "custom-json"));
}
