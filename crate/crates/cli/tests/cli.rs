//! End-to-end runs of the `kirchhoff` binary.

use kirchhoff_cli::output::read_csv;
use std::path::Path;
use std::process::{Command, Output};
use tempfile::TempDir;

fn kirchhoff(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kirchhoff"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn zero_data_gives_an_all_zero_trajectory() {
    let dir = TempDir::new().unwrap();
    let o = kirchhoff(dir.path(), &["simulate", "--set", "simulate.init={kind=\"modes\", modes=[]}", "--set", "simulate.T=1.0"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, cols, rows) = read_csv(&dir.path().join("simulate.csv")).unwrap();
    assert_eq!(cols.len(), 3 + 16);
    assert_eq!(rows.len(), 11);
    for row in &rows {
        assert!(row[1..].iter().all(|&x| x == 0.0));
    }
}

#[test]
fn single_mode_run_matches_the_duffing_reference() {
    let dir = TempDir::new().unwrap();
    let o = kirchhoff(dir.path(), &["simulate", "--set", "simulate.T=20.0", "--set", "simulate.M=4"]);
    assert!(o.status.success());
    let s = json(&dir.path().join("simulate.json"));
    assert_eq!(s["result"]["duffing"]["mode"], 1);
    assert!(s["result"]["duffing"]["max_abs_error"].as_f64().unwrap() < 1e-8);
    assert!(s["result"]["max_energy_drift"].as_f64().unwrap() < 1e-8);
}

#[test]
fn reruns_are_byte_identical_and_carry_the_header() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let args = ["simulate", "--seed", "9", "--set", "simulate.init={kind=\"measure\", eps=0.1}", "--set", "simulate.T=2.0"];
    assert!(kirchhoff(a.path(), &args).status.success());
    assert!(kirchhoff(b.path(), &args).status.success());
    for f in ["simulate.csv", "simulate.json"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let (header, _, _) = read_csv(&a.path().join("simulate.csv")).unwrap();
    let h: serde_json::Value = serde_json::from_str(&header).unwrap();
    assert_eq!(h["seed"], 9);
    assert_eq!(h["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(h["config"]["simulate"]["T"], 2.0);
}

#[test]
fn config_file_and_flags_combine() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "seed = 4\n[roundtrip]\nM = 8\nstates = 20\n").unwrap();
    let o = kirchhoff(dir.path(), &["roundtrip", "--config", cfg.to_str().unwrap(), "--seed", "5", "--threads", "2"]);
    assert!(o.status.success());
    let r = json(&dir.path().join("roundtrip.json"));
    assert_eq!(r["header"]["seed"], 5);
    assert_eq!(r["result"]["states"], 20);
    assert!(r["result"]["max_error"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let code = |args: &[&str]| kirchhoff(dir.path(), args).status.code();
    assert_eq!(code(&["simulate", "--set", "simulate.dt=0.5"]), Some(2));
    assert_eq!(code(&["simulate", "--set", "simulate.nonsense=1"]), Some(2));
    assert_eq!(code(&["measure", "--config", "/nonexistent/file.toml"]), Some(2));
    assert_eq!(
        code(&[
            "simulate",
            "--set",
            "simulate.init={kind=\"modes\", modes=[{a=1, u=1e40}]}",
            "--set",
            "simulate.allow_coarse_dt=true",
            "--set",
            "simulate.dt=0.1",
        ]),
        Some(3)
    );
    assert_eq!(code(&["drift-sweep", "--set", "drift_sweep.max_draws=3", "--set", "drift_sweep.samples=5"]), Some(4));
    assert_eq!(code(&["roundtrip", "--set", "roundtrip.tol=1e-300", "--set", "roundtrip.states=10"]), Some(5));
}

#[test]
fn resonance_of_zero_is_not_in_u() {
    let dir = TempDir::new().unwrap();
    assert!(kirchhoff(dir.path(), &["resonance"]).status.success());
    let r = json(&dir.path().join("resonance.json"));
    assert_eq!(r["result"]["status"], "not in U");
    assert_eq!(r["result"]["report"]["reason"], "zero norm");
}

#[test]
fn resonance_of_a_generic_state() {
    let dir = TempDir::new().unwrap();
    let o = kirchhoff(
        dir.path(),
        &["resonance", "--set", "resonance.z=[{a=1, re=0.3}, {a=2, im=0.011}, {a=3, re=0.0017, im=0.0009}]"],
    );
    assert!(o.status.success());
    let r = json(&dir.path().join("resonance.json"));
    assert!(r["result"]["report"]["checked"].as_u64().unwrap() > 0);
}

#[test]
fn measure_scan_is_monotone_for_both_weights() {
    for w in ["{kind=\"sobolev\", s=3.0}", "{kind=\"gevrey\", rho=0.5, theta=0.5}"] {
        let dir = TempDir::new().unwrap();
        let wset = format!("measure.weight={w}");
        let o = kirchhoff(dir.path(), &["measure", "--set", "measure.samples=500", "--set", &wset]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let r = json(&dir.path().join("measure.json"));
        let recs = r["result"]["records"].as_array().unwrap();
        assert_eq!(recs.len(), 4);
        let f: Vec<f64> = recs.iter().map(|x| x["fraction"].as_f64().unwrap()).collect();
        assert!(f.windows(2).all(|p| p[1] <= p[0]));
        assert!(!r["result"]["thresholds"].as_array().unwrap().is_empty());
    }
}

#[test]
fn drift_sweep_reports_slope_and_error() {
    let dir = TempDir::new().unwrap();
    let o = kirchhoff(
        dir.path(),
        &["drift-sweep", "--set", "drift_sweep.samples=2", "--set", "drift_sweep.eps=[0.2, 0.1]", "--set", "drift_sweep.t_factor=0.2"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&dir.path().join("drift_sweep.json"));
    let fit = &r["result"]["fit"];
    assert!(fit["slope"].as_f64().unwrap().is_finite());
    assert!(fit.get("slope_se").is_some());
    for rec in r["result"]["records"].as_array().unwrap() {
        assert!(rec["drift"].as_f64().unwrap() >= 0.0);
    }
    let (_, cols, rows) = read_csv(&dir.path().join("drift_sweep.csv")).unwrap();
    assert_eq!(cols[3], "D");
    assert_eq!(rows.len(), 4);
}

#[test]
fn nf_verify_matches_the_stored_golden_files() {
    let dir = TempDir::new().unwrap();
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden");
    let gset = format!("nf_verify.golden=\"{}\"", golden.display());
    let o = kirchhoff(
        dir.path(),
        &[
            "nf-verify",
            "--set",
            &gset,
            "--set",
            "nf_verify.k5_n=6",
            "--set",
            "nf_verify.points=4",
            "--set",
            "nf_verify.septic_points=2",
            "--set",
            "nf_verify.flow_points=1",
            "--set",
            "nf_verify.flow_steps=50",
            "--set",
            "nf_verify.z3z5_flow_steps=10",
        ],
    );
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{stdout}");
    assert!(stdout.lines().all(|l| l.starts_with("PASS")));
    assert!(stdout.contains("PASS golden_match"));
    for name in ["k3", "k5", "z5", "chi3", "s", "m"] {
        let f = json(&dir.path().join("golden").join(format!("{name}_n6.json")));
        assert_eq!(f["header"]["command"], "nf-verify");
        assert!(!f["result"]["terms"].as_array().unwrap().is_empty());
    }
}

#[test]
fn nf_verify_failure_exits_with_five() {
    let dir = TempDir::new().unwrap();
    std::fs::create_dir_all(dir.path().join("bogus")).unwrap();
    let gset = format!("nf_verify.golden=\"{}\"", dir.path().join("bogus").display());
    let o = kirchhoff(
        dir.path(),
        &[
            "nf-verify",
            "--set",
            "nf_verify.N=3",
            "--set",
            "nf_verify.k5_n=3",
            "--set",
            &gset,
            "--set",
            "nf_verify.points=2",
            "--set",
            "nf_verify.septic_points=1",
            "--set",
            "nf_verify.flow_points=1",
            "--set",
            "nf_verify.flow_steps=10",
            "--set",
            "nf_verify.z3z5_flow_steps=10",
        ],
    );
    assert_eq!(o.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL golden_match"));
}
