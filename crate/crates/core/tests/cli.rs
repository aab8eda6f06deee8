//! End-to-end runs of the `gevrey-lab` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gevrey-lab"))
        .args(args)
        .env("GEVREY_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const IDENTITY: &str = r#"
experiment = "ldt-sweep"
n = [16]
strip_samples = 16

[cocycle]
builder = "constant"
matrix = [[1.0, 0.0], [0.0, 1.0]]

[sampler]
kind = "grid"
resolution = 32
"#;

#[test]
fn identity_sweep_succeeds() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "run.toml", IDENTITY);
    let out = tmp.path().join("out");
    let o = bin(&[
        "ldt-sweep",
        "--config",
        &cfg,
        "--output-dir",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(manifest["experiment"], "ldt-sweep");
    let csv = fs::read_to_string(out.join("ldt.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(out.join("manifest.json").is_file());
}

#[test]
fn subcommand_overrides_config_experiment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "run.toml", IDENTITY);
    let out = tmp.path().join("out");
    let o = bin(&[
        "lyapunov",
        "--config",
        &cfg,
        "--n",
        "10,20",
        "--output-dir",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = fs::read_to_string(out.join("lyapunov.csv")).unwrap();
    assert_eq!(rows.lines().count(), 3);
}

#[test]
fn diophantine_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = bin(&[
        "diophantine",
        "--k0",
        "10,100",
        "--kappa",
        "0.3",
        "--output-dir",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let reports: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("diophantine.json")).unwrap()).unwrap();
    assert_eq!(reports[1]["worst_k"], serde_json::json!([89]));
    assert_eq!(reports[1]["satisfied"], true);
}

#[test]
fn validation_failures_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = bin(&["lyapunov", "--s", "0.5", "--output-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`s`"), "{}", stderr(&o));

    let o = bin(&[
        "ldt-sweep",
        "--s",
        "1.6",
        "--n",
        "16",
        "--output-dir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("admissible range"));

    let o = bin(&[
        "ldt-sweep",
        "--s",
        "1.1",
        "--n",
        "16",
        "--omega",
        "0.5",
        "--output-dir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Diophantine"));

    let bad = write(
        tmp.path(),
        "bad.toml",
        "experiment = \"lyapunov\"\nresolutoin = 3\n",
    );
    let o = bin(&["lyapunov", "--config", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("resolutoin"));
}

#[test]
fn non_unimodular_file_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let k = |v: f64| format!(r#"{{"d":1,"coeffs":[{{"k":[0],"re":{v},"im":0.0}}]}}"#);
    let zero = r#"{"d":1,"coeffs":[]}"#;
    let body = format!(
        r#"{{"s":1.0,"a11":{},"a12":{zero},"a21":{zero},"a22":{}}}"#,
        k(2.0),
        k(1.0)
    );
    let file = write(tmp.path(), "a.json", &body);
    let out = tmp.path().join("out");
    let o = bin(&[
        "lyapunov",
        "--cocycle",
        &file,
        "--n",
        "8",
        "--output-dir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("unimodular"));
}

#[test]
fn cocycle_file_round_trip_through_scheme_audit() {
    let tmp = tempfile::tempdir().unwrap();
    let cos = r#"{"d":1,"coeffs":[{"k":[-1],"re":1.0,"im":0.0},{"k":[1],"re":1.0,"im":0.0}]}"#;
    let minus_one = r#"{"d":1,"coeffs":[{"k":[0],"re":-1.0,"im":0.0}]}"#;
    let one = r#"{"d":1,"coeffs":[{"k":[0],"re":1.0,"im":0.0}]}"#;
    let zero = r#"{"d":1,"coeffs":[]}"#;
    let body = format!(r#"{{"s":1.0,"a11":{cos},"a12":{minus_one},"a21":{one},"a22":{zero}}}"#);
    let file = write(tmp.path(), "amo.json", &body);
    let out = tmp.path().join("out");
    let o = bin(&[
        "scheme-audit",
        "--cocycle",
        &file,
        "--n",
        "20",
        "--resolution",
        "64",
        "--output-dir",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let audit: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("scheme_audit.json")).unwrap()).unwrap();
    assert_eq!(audit[0]["audit"]["telescope_lhs"], 0.0);
    assert_eq!(audit[0]["audit"]["feasible"], true);
    assert!(out.join("plot_strip_N20.csv").is_file());
}

#[test]
fn bad_thread_env_is_rejected() {
    let o = Command::new(env!("CARGO_BIN_EXE_gevrey-lab"))
        .args(["diophantine", "--k0", "5"])
        .env("GEVREY_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
