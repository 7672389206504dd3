//! Config validation contract: exit status 2 with field-path messages, all
//! problems reported at once, unknown keys rejected; exit status 1 reserved
//! for --assert failures.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_latfkg")
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("latfkg-val-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_with_config(sub: &str, dir: &Path, config: &str, extra: &[&str]) -> Output {
    let cfg = dir.join("config.json");
    fs::write(&cfg, config).unwrap();
    Command::new(bin())
        .args([
            sub,
            "--config",
            cfg.to_str().unwrap(),
            "--out-dir",
            dir.to_str().unwrap(),
        ])
        .args(extra)
        .output()
        .unwrap()
}

#[test]
fn bad_alpha_names_the_field() {
    let dir = tmp_dir("alpha");
    let out = run_with_config(
        "coeffs",
        &dir,
        r#"{"alpha": 1.5, "dim": 1, "radius": 3}"#,
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("alpha"), "stderr: {err}");
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn empty_solve_config_lists_every_required_field() {
    let dir = tmp_dir("empty");
    let out = run_with_config("solve", &dir, "{}", &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    for field in ["n", "N", "hbar", "alpha", "T", "mass", "u0", "u1"] {
        assert!(
            err.lines()
                .any(|l| l.trim_start().starts_with(&format!("- {field}:"))),
            "missing field '{field}' not reported; stderr:\n{err}"
        );
    }
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn odd_point_count_rejected() {
    let dir = tmp_dir("odd");
    let out = run_with_config(
        "solve",
        &dir,
        r#"{"n":1,"N":33,"hbar":0.5,"alpha":0.5,"T":1.0,"mass":{"const":1.0},"u0":"zero","u1":"zero"}"#,
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("even"), "stderr: {err}");
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn unknown_keys_rejected() {
    let dir = tmp_dir("unknown");
    let out = run_with_config(
        "coeffs",
        &dir,
        r#"{"alpha": 0.5, "dim": 1, "radius": 3, "alfa": 0.7}"#,
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("alfa") && err.contains("unknown key"),
        "stderr: {err}"
    );
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn defaults_visible_in_manifest_echo() {
    let dir = tmp_dir("defaults");
    let out = run_with_config(
        "solve",
        &dir,
        r#"{"n":1,"N":8,"hbar":0.5,"alpha":0.5,"T":1.0,"mass":{"const":1.0},"u0":"zero","u1":"zero"}"#,
        &[],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["dt"].as_f64().unwrap(), 1.0 / 1024.0);
    assert_eq!(manifest["config"]["record_every"].as_u64().unwrap(), 16);
    assert_eq!(manifest["config"]["forcing"], serde_json::json!("zero"));
    assert_eq!(manifest["config"]["seed"].as_u64().unwrap(), 0);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn coeffs_dispatch_matches_discrete_laplacian() {
    let dir = tmp_dir("laplace");
    let out = run_with_config("coeffs", &dir, r#"{"alpha":1.0,"dim":1,"radius":3}"#, &[]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.join("coeffs.csv")).unwrap();
    let weights: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    let expect = [0.0, 0.0, -1.0, 2.0, -1.0, 0.0, 0.0];
    assert_eq!(weights.len(), expect.len());
    for (w, e) in weights.iter().zip(expect) {
        assert!((w - e).abs() < 1e-10, "{w} vs {e}");
    }
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn converge_assert_gate_uses_exit_code_one() {
    // alpha = 0.95 demands rate >= 1.6; band-limited data converges at ~1.5
    // in the unweighted norm, so the --assert gate must trip with status 1.
    let dir = tmp_dir("gate");
    let cfg = r#"{
        "alpha": 0.95, "n": 1, "mass_const": 1.0, "T": 1.0,
        "box_physical": 16.0, "hbar_list": [0.4, 0.2, 0.1, 0.05],
        "profile": {"kind": "gaussian", "cutoff": 1.2}
    }"#;
    let out = run_with_config("converge", &dir, cfg, &["--assert"]);
    assert_eq!(
        out.status.code(),
        Some(1),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    // without --assert the same run succeeds and reports the rate
    let dir2 = tmp_dir("gate2");
    let out = run_with_config("converge", &dir2, cfg, &[]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir2.join("converge.csv")).unwrap();
    assert!(csv.lines().last().unwrap().starts_with("# fitted_rate="));
    let _ = fs::remove_dir_all(&dir);
    let _ = fs::remove_dir_all(&dir2);
}

#[test]
fn forcing_file_round_trip() {
    let dir = tmp_dir("forcing");
    // two-sample constant forcing on a 4-site 1D lattice
    let mut forcing = String::from("t,index_0,re,im\n");
    for (t, val) in [(0.0, 0.25), (1.0, 0.25)] {
        for j in -2i64..2 {
            forcing.push_str(&format!("{t},{j},{val},0.0\n"));
        }
    }
    fs::write(dir.join("f.csv"), &forcing).unwrap();
    let cfg = r#"{
        "n": 1, "N": 4, "hbar": 1.0, "alpha": 0.5, "T": 1.0, "dt": 0.0625,
        "mass": {"const": 0.0},
        "forcing": {"file": "f.csv"},
        "u0": "zero", "u1": "zero"
    }"#;
    let out = run_with_config("solve", &dir, cfg, &[]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    // beta = 0 modes under constant forcing c: u(T) = c T^2 / 2 = 0.125
    let last = fs::read_to_string(dir.join("u_0001.csv")).unwrap();
    for line in last.lines().skip(1) {
        let re: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((re - 0.125).abs() < 1e-12, "{re}");
    }
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn planewave_builtin_is_unimodular() {
    let dir = tmp_dir("planewave");
    let cfg = r#"{
        "n": 1, "N": 8, "hbar": 0.5, "alpha": 0.5, "T": 0.25, "dt": 0.0625,
        "mass": {"const": 1.0},
        "u0": {"builtin": {"planewave": {"mode": [3]}}},
        "u1": "zero"
    }"#;
    let out = run_with_config("solve", &dir, cfg, &[]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let initial = fs::read_to_string(dir.join("u_0000.csv")).unwrap();
    let mut rows = 0;
    for line in initial.lines().skip(1) {
        let mut it = line.split(',');
        let _j = it.next().unwrap();
        let re: f64 = it.next().unwrap().parse().unwrap();
        let im: f64 = it.next().unwrap().parse().unwrap();
        assert!(((re * re + im * im).sqrt() - 1.0).abs() < 1e-12);
        rows += 1;
    }
    assert_eq!(rows, 8);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn symbol_gap_accepts_config_file() {
    let dir = tmp_dir("gapcfg");
    let out = run_with_config(
        "symbol-gap",
        &dir,
        r#"{"alpha": 1.0, "hbar": 0.1, "n": 1, "N": 16}"#,
        &["--assert"],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.join("symbol_gap.csv")).unwrap();
    assert!(csv.starts_with("theta_0,gap,normalized\n"));
    assert_eq!(csv.lines().count(), 17);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn bad_thread_env_rejected() {
    let dir = tmp_dir("threads");
    let out = Command::new(bin())
        .args(["coeffs", "--alpha", "0.5", "--dim", "1", "--radius", "2"])
        .arg("--out-dir")
        .arg(dir.to_str().unwrap())
        .env("LATFKG_THREADS", "abc")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("LATFKG_THREADS"));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn missing_flags_and_config_rejected() {
    let dir = tmp_dir("noconfig");
    let out = Command::new(bin())
        .args(["coeffs", "--out-dir", dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("alpha") && err.contains("radius"),
        "stderr: {err}"
    );
    let _ = fs::remove_dir_all(&dir);
}
