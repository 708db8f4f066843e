use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cvcl-cli-{}-{tag}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn cvcl(sub: &str, config: &str, out: &Path, extra: &[&str]) -> Output {
    let cfg = out.join("run.cfg");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_cvcl"))
        .arg(sub)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn summary(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn column(dir: &Path, file: &str, name: &str) -> Vec<f64> {
    let mut r = csv::Reader::from_path(dir.join(file)).unwrap();
    let idx = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records().map(|rec| rec.unwrap()[idx].parse().unwrap()).collect()
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = scratch("unknown");
    let out = cvcl("measure", "kernel.elll_g = 1\n", &dir, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kernel.elll_g"));
    assert!(!dir.join("measure.csv").exists());
}

#[test]
fn malformed_values_name_their_key() {
    let dir = scratch("malformed");
    for (sub, text, key) in [
        ("dynamics", "scenario.sigma0 = -1\n", "scenario.sigma0"),
        ("dynamics", "scenario.sigma0 = 50e-6\n", "scenario.sigma0"),
        ("witness", "kernel.ell_g = zero\n", "kernel.ell_g"),
        ("mc-check", "mc.samples = 10,0\n", "mc.samples"),
        ("counterexample", "shift.a = -5.01\n", "shift.a"),
    ] {
        let out = cvcl(sub, text, &dir, &[]);
        assert_eq!(out.status.code(), Some(2), "{sub}: {text}");
        assert!(String::from_utf8_lossy(&out.stderr).contains(key), "{sub}: {text}");
    }
}

#[test]
fn impossible_states_are_numeric_failures() {
    let dir = scratch("numeric");
    // |c|² > p(1 − p)
    let out = cvcl("witness", "sector.p = 0.1\nsector.c_abs = 0.5\n", &dir, &[]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn zero_duration_gives_one_row() {
    let dir = scratch("t0");
    let out = cvcl("dynamics", "scenario.t_max = 0\n", &dir, &[]);
    assert!(out.status.success());
    assert_eq!(column(&dir, "dynamics.csv", "t"), vec![0.0]);
    assert_eq!(column(&dir, "dynamics.csv", "delta_crel_bound"), vec![0.0]);
}

#[test]
fn dynamics_writes_csv_json_and_plot() {
    let dir = scratch("dyn");
    let out = cvcl("dynamics", "", &dir, &["--plot"]);
    assert!(out.status.success());
    let s = summary(&out);
    assert_eq!(s["rows"], 101);
    assert_eq!(s["config"]["units"], "si");
    assert_eq!(s["verdict"]["delta_monotone"], true);
    let on_disk: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.join("dynamics.json")).unwrap()).unwrap();
    assert_eq!(on_disk, s);
    let svg = std::fs::read_to_string(dir.join("dynamics.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("delta_crel_bound"));
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (scratch("rerun-a"), scratch("rerun-b"));
    let cfg = "mc.samples = 500,5000\n";
    assert!(cvcl("mc-check", cfg, &a, &[]).status.success());
    assert!(cvcl("mc-check", cfg, &b, &[]).status.success());
    assert_eq!(
        std::fs::read(a.join("mc-check.csv")).unwrap(),
        std::fs::read(b.join("mc-check.csv")).unwrap()
    );
    // the flag overrides the seed key
    assert!(cvcl("mc-check", cfg, &b, &["--seed", "7"]).status.success());
    assert_ne!(
        std::fs::read(a.join("mc-check.csv")).unwrap(),
        std::fs::read(b.join("mc-check.csv")).unwrap()
    );
}

#[test]
fn identity_kernel_removes_nothing() {
    let dir = scratch("identity");
    let out = cvcl(
        "measure",
        "kernel.kind = identity\nkernel.ell_g = 1\nsweep.sigma_over_ell = 0.5,1\ngrid.n_points = 64\n",
        &dir,
        &[],
    );
    assert!(out.status.success());
    for col in ["c2_numeric", "crel_numeric"] {
        assert!(column(&dir, "measure.csv", col).iter().all(|v| v.abs() < 1e-10), "{col}");
    }
}

#[test]
fn witness_scan_peaks_at_twice_the_coherence() {
    let dir = scratch("witness");
    let out = cvcl("witness", "sector.c_abs = 0.3\nsector.c_phase = 0.7\n", &dir, &[]);
    assert!(out.status.success());
    let s = summary(&out);
    let max = s["verdict"]["max_x_theta"].as_f64().unwrap();
    assert!((max - 0.6).abs() < 1e-12);
}

#[test]
fn counterexample_doubles_c2() {
    let dir = scratch("counter");
    let out = cvcl("counterexample", "", &dir, &[]);
    assert!(out.status.success());
    let s = summary(&out);
    let ratio = s["verdict"]["ratio"].as_f64().unwrap();
    assert!((ratio - 2.0).abs() < 1e-3);
    assert_eq!(s["verdict"]["violates_monotonicity"], true);
    assert_eq!(s["verdict"]["crel_monotone"], true);
    let p = column(&dir, "counterexample.csv", "probability");
    assert_eq!(p.len(), 3);
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn stepmask_reports_negative_eigenvalues() {
    let dir = scratch("mask");
    let out = cvcl("stepmask", "grid.n_points = 129\n", &dir, &[]);
    assert!(out.status.success());
    let s = summary(&out);
    assert_eq!(s["verdict"]["idempotent"], true);
    assert!(column(&dir, "stepmask.csv", "c2_epsilon").iter().all(|v| (0.0..=1.0).contains(v)));
}
