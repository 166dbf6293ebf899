use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use trigpred_ffi::*;

fn from_json(doc: &str, grid: usize) -> (TpStatus, *mut TpMeasure) {
    let c = CString::new(doc).unwrap();
    let mut m = ptr::null_mut();
    let s = unsafe { tp_measure_from_json(c.as_ptr(), grid, &mut m) };
    (s, m)
}

fn last_error() -> String {
    let p = tp_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn interpolation_pair() {
    let (s0, mu0) = from_json(r#"{"density": {"family": "ex4.11"}}"#, 1024);
    let (s1, mun) = from_json(r#"{"density": {"family": "ex4.11", "params": {"n": 5}}}"#, 1024);
    assert_eq!((s0, s1), (TpStatus::Ok, TpStatus::Ok));
    let mut d = 0.0;
    let mut c = 0.0;
    unsafe {
        assert_eq!(tp_interp_distance(mun, 2.0, &mut d), TpStatus::Ok);
        assert_eq!(tp_interp_cross_error(mun, mu0, 2.0, &mut c), TpStatus::Ok);
        tp_measure_free(mu0);
        tp_measure_free(mun);
    }
    assert!((d - 3f64.sqrt()).abs() < 1e-9);
    assert!((c - 4.0 / 3f64.sqrt()).abs() < 1e-9);
}

#[test]
fn samples_with_atom_and_finite_solve() {
    let samples = vec![1.0; 256];
    let loc = [0.0];
    let mass = [1.0 / std::f64::consts::TAU];
    let mut m = ptr::null_mut();
    let mut n = 0usize;
    let mut total = 0.0;
    let freqs = [1i64];
    let (mut re, mut im, mut dist) = ([0.0], [0.0], 0.0);
    unsafe {
        assert_eq!(tp_measure_from_samples(samples.as_ptr(), 256, loc.as_ptr(), mass.as_ptr(), 1, &mut m), TpStatus::Ok);
        assert_eq!(tp_measure_grid_size(m, &mut n), TpStatus::Ok);
        assert_eq!(tp_measure_total_mass(m, &mut total), TpStatus::Ok);
        assert_eq!(tp_finite_p2(m, freqs.as_ptr(), 1, re.as_mut_ptr(), im.as_mut_ptr(), &mut dist), TpStatus::Ok);
        tp_measure_free(m);
    }
    let tau = std::f64::consts::TAU;
    assert_eq!(n, 256);
    assert!((total - (1.0 + 1.0 / tau)).abs() < 1e-12);
    assert!((re[0] - 1.0 / (1.0 + tau)).abs() < 1e-9 && im[0].abs() < 1e-12);
    assert!((dist - (2.0 + tau) / (1.0 + tau)).abs() < 1e-9);
}

#[test]
fn msteps_and_periodic() {
    let (_, mu) = from_json(r#"{"density": {"family": "cos", "params": {"a": 2}}}"#, 1024);
    let (_, gap) = from_json(r#"{"density": {"family": "ex7.5a", "params": {"n": 8}}}"#, 1024);
    let (mut d2, mut cross, mut per) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(tp_mstep_distance(mu, 2, &mut d2), TpStatus::Ok);
        assert_eq!(tp_mstep_cross_error(mu, mu, 1, 1.5, &mut cross), TpStatus::Ok);
        assert_eq!(tp_periodic_distance(gap, 2, 1, 2.0, &mut per), TpStatus::Ok);
        let mut c = 0.0;
        assert_eq!(tp_periodic_cross_error(mu, gap, 2, 1, 2.0, &mut c), TpStatus::Ok);
        tp_measure_free(mu);
        tp_measure_free(gap);
    }
    assert!((d2 - 2.0).abs() < 1e-8);
    assert!((cross - (2.0 + 3f64.sqrt()) / 2.0).abs() < 1e-8);
    assert!((per - 1.0 / std::f64::consts::PI).abs() < 1e-9);
}

#[test]
fn errors_are_reported() {
    let (s, m) = from_json("{", 1024);
    assert_eq!(s, TpStatus::InvalidInput);
    assert!(m.is_null());
    assert!(last_error().contains("JSON"));

    let (s, _) = from_json(r#"{"density": {"family": "cos", "params": {"a": 1}}}"#, 1000);
    assert_eq!(s, TpStatus::InvalidInput);

    let mut out = 0.0;
    assert_eq!(unsafe { tp_interp_distance(ptr::null(), 2.0, &mut out) }, TpStatus::NullArgument);
    assert_eq!(unsafe { tp_measure_from_json(ptr::null(), 64, &mut ptr::null_mut()) }, TpStatus::NullArgument);

    let (_, haar) = from_json(r#"{"density": {"family": "constant", "params": {"c": 1}}}"#, 1024);
    let (_, gap) = from_json(r#"{"density": {"family": "ex3.2a", "params": {"n": 4}}}"#, 1024);
    unsafe {
        assert_eq!(tp_interp_distance(haar, -1.0, &mut out), TpStatus::InvalidInput);
        assert_eq!(tp_interp_cross_error(gap, haar, 2.0, &mut out), TpStatus::NotAbsolutelyContinuous);
        assert_eq!(tp_periodic_distance(haar, 2, 1, 1.0, &mut out), TpStatus::InvalidInput);
        assert_eq!(tp_interp_distance(haar, 2.0, ptr::null_mut()), TpStatus::NullArgument);
        // the message is cleared by a successful call
        assert_eq!(tp_interp_distance(haar, 2.0, &mut out), TpStatus::Ok);
        assert!(tp_last_error_message().is_null());
        tp_measure_free(haar);
        tp_measure_free(gap);
        tp_measure_free(ptr::null_mut());
    }
}

#[test]
fn degenerate_status() {
    // outer function exp(2z): the two-term truncation 1 + 2z has a root in the disc
    let n = 1024;
    let samples: Vec<f64> =
        (0..n).map(|k| (4.0 * ((k as f64 + 0.5) * std::f64::consts::TAU / n as f64).cos()).exp()).collect();
    let mut m = ptr::null_mut();
    let mut out = 0.0;
    unsafe {
        assert_eq!(tp_measure_from_samples(samples.as_ptr(), n, ptr::null(), ptr::null(), 0, &mut m), TpStatus::Ok);
        assert_eq!(tp_mstep_cross_error(m, m, 2, 3.0, &mut out), TpStatus::Degenerate);
        assert!(!tp_last_error_message().is_null());
        assert_eq!(tp_mstep_cross_error(m, m, 2, 2.0, &mut out), TpStatus::Ok);
        tp_measure_free(m);
    }
    assert!((out - 5.0).abs() < 1e-8);
}

fn target_dir() -> PathBuf {
    // <target>/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/trigpred.h")).unwrap();
    for name in [
        "typedef struct TpMeasure TpMeasure",
        "TP_STATUS_OK = 0",
        "TP_STATUS_DEGENERATE = 3",
        "tp_measure_from_json(",
        "tp_measure_from_samples(",
        "tp_measure_free(",
        "tp_interp_distance(",
        "tp_szego_distance(",
        "tp_mstep_distance(",
        "tp_finite_p2(",
        "tp_periodic_distance(",
        "tp_last_error_message(",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

#[test]
fn c_program_links_against_the_static_library() {
    let lib = target_dir().join("libtrigpred_ffi.a");
    assert!(lib.exists(), "{} was not built", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let status = Command::new("cc")
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler runs");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok 0.1.0"));
}
