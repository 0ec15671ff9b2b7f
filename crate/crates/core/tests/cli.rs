use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ar-recurrence"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const SMALL_AR: &str = r#"{
    "process": {"kind": "ar"},
    "ensemble": {"dim": 1, "atoms": [{"matrix": [[0.5]], "p": 1.0}]},
    "innovation": {"kind": "log_pareto", "beta": 1.0, "p": 2.0},
    "classifier": {"n_max": 10000},
    "probe": {"horizon": 1000, "replicas": 20, "seed": 7}
}"#;

#[test]
fn missing_process_is_a_config_error_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", &SMALL_AR.replace(r#""process": {"kind": "ar"},"#, ""));
    let out = run(&["classify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`process`"));
}

#[test]
fn nested_config_errors_carry_their_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", &SMALL_AR.replace(r#""beta": 1.0"#, r#""beta": -1.0"#));
    let out = run(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("innovation"));
}

#[test]
fn budget_overrun_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL_AR.replace(r#""probe""#, r#""budget": 100, "probe""#);
    let cfg = write(dir.path(), "big.json", &text);
    let out = run(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn run_directory_layout_and_byte_identical_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.json", SMALL_AR);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run(&["validate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["report.json", "meta.json", "trajectories/ar_seed7.csv"] {
        let x = std::fs::read(a.join(f)).unwrap();
        let y = std::fs::read(b.join(f)).unwrap();
        assert_eq!(x, y, "{f} differs");
    }
    let meta: serde_json::Value = serde_json::from_slice(&std::fs::read(a.join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 7);
    assert!(meta["versions"]["package"].is_string());
    assert_eq!(meta["config"]["process"]["kind"], "ar");
    let csv = std::fs::read_to_string(a.join("trajectories/ar_seed7.csv")).unwrap();
    assert!(csv.starts_with("n,x1,m1,nvec1,norm\n"));
    assert_eq!(csv.lines().count(), 1002);
}

#[test]
fn classify_prints_a_verdict() {
    let out = run(&["classify", "--config", scenario("zg_positive.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["outcome"], "PositiveRecurrent");
}

#[test]
fn simulate_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.json", SMALL_AR);
    let c = cfg.to_str().unwrap();
    let a = run(&["simulate", "--config", c, "--seed", "3", "--steps", "50"]);
    let b = run(&["simulate", "--config", c, "--seed", "3", "--steps", "50"]);
    let other = run(&["simulate", "--config", c, "--seed", "4", "--steps", "50"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, other.stdout);
    assert_eq!(String::from_utf8_lossy(&a.stdout).lines().count(), 52);
}

#[test]
fn lyapunov_of_a_constant_matrix() {
    let out = run(&["lyapunov", "--config", scenario("zg_positive.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["lambda"]["lambda"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-12);
}

#[test]
fn frog_and_cookie_subcommands() {
    let out = run(&["frog", "--p", "1", "--r", "0.25", "--runs", "200"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["cookie-walk", "--omega", "0.4", "--steps", "20000", "--replicas", "50"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["classifier"]["outcome"], "TransientLeft");
    let out = run(&["frog", "--p", "1", "--r", "0.5", "--runs", "20", "--step-cap", "100000"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["classifier"]["error"].as_str().unwrap().contains("rho"));
}

#[test]
fn selftest_passes_with_at_least_twelve_suites() {
    let out = run(&["selftest"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.lines().filter(|l| l.starts_with("PASS ")).count() >= 12);
}
