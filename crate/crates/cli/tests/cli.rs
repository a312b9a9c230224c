//! End-to-end runs of the `rydlat` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn rydlat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rydlat"))
        .args(args)
        .env_remove("RYDLAT_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn json_ok(args: &[&str]) -> Value {
    let out = rydlat(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rydlat-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn error_budget_reference_total() {
    let v = json_ok(&["error-budget", "--preset", "rb_noblockade_2ph"]);
    let total = v["payload"]["budget"]["total"].as_f64().unwrap();
    assert!((total - 1.25e-2).abs() <= 0.005e-2, "{total}");
    let out = rydlat(&["error-budget", "--preset", "rb_noblockade_2ph"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("eps_imp_exc"));
}

#[test]
fn error_budget_verify_prints_ratio_table() {
    let out = rydlat(&["error-budget", "--preset", "rb_blockade_2ph", "--verify"]);
    assert_eq!(out.status.code(), Some(0));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("ratio") && err.contains("eps_imp_exc"));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = v["payload"]["verify"].as_array().unwrap();
    assert!(rows.len() >= 4);
    for r in rows {
        let ratio = r["ratio"].as_f64().unwrap();
        assert!((0.5..=2.0).contains(&ratio), "{r}");
    }
}

#[test]
fn bands_csv_matches_json() {
    let args = [
        "bands",
        "--V0",
        "100",
        "--V1",
        "100",
        "--phi",
        "0",
        "--q-points",
        "32",
    ];
    let csv = rydlat(&[&args[..], &["--format", "csv"]].concat());
    assert_eq!(csv.status.code(), Some(0));
    let text = String::from_utf8(csv.stdout).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 32);
    assert!(text.lines().nth(1).unwrap().contains('e'));
    let v = json_ok(&args);
    let split = v["payload"]["lowest_splitting_min"].as_f64().unwrap();
    let from_csv = rows
        .iter()
        .map(|r| r[2] - r[1])
        .fold(f64::INFINITY, f64::min);
    assert_eq!(split, from_csv);
}

#[test]
fn cluster_chain_stabilizers() {
    let v = json_ok(&["cluster", "--geometry", "1d:6"]);
    let k = v["payload"]["stabilizers"].as_array().unwrap();
    assert_eq!(k.len(), 6);
    for x in k {
        assert!((x.as_f64().unwrap() - 1.0).abs() <= 1e-10);
    }
}

#[test]
fn cluster_with_simulated_gate_loses_fidelity() {
    let v = json_ok(&[
        "cluster",
        "--geometry",
        "2d:2x2",
        "--gate",
        "noblockade",
        "--gamma",
        "2000",
    ]);
    let f = v["payload"]["fidelity"].as_f64().unwrap();
    assert!(f < 1.0 && f > 0.9, "{f}");
}

#[test]
fn gate_commands() {
    let v = json_ok(&["gate-noblockade", "--v-int-mhz", "0.3", "--verify"]);
    let row = &v["payload"]["verify"][0];
    assert!((row["ratio"].as_f64().unwrap() - 1.0).abs() < 0.2);

    let v = json_ok(&[
        "gate-blockade",
        "--light-shift-mhz",
        "0.04",
        "--delta-vec-mhz",
        "0.2",
    ]);
    assert_eq!(v["payload"]["theta"]["satisfied"], Value::Bool(false));
    assert!(!v["payload"]["outcome"]["warnings"]
        .as_array()
        .unwrap()
        .is_empty());

    let out = rydlat(&["gate-noblockade", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("branch,overlap_re"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn timing_totals() {
    let v = json_ok(&["timing", "--scheme", "blockade", "--dimension", "2d"]);
    assert_eq!(v["payload"]["total"].as_f64(), Some(3360.0));
    let v = json_ok(&["timing"]);
    assert_eq!(v["payload"]["total"].as_f64(), Some(80.0));
}

#[test]
fn ramps_and_wannier() {
    let v = json_ok(&["ramp", "--scan", "0.05,0.1", "--jobs", "2"]);
    let scan = v["payload"]["scan"].as_array().unwrap();
    assert_eq!(scan.len(), 2);
    assert!(scan[0]["retention"].as_f64().unwrap() < 0.99);

    let out = rydlat(&[
        "stretch",
        "--duration",
        "1.6",
        "--samples",
        "10",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("time_us,P_band1"));
    assert_eq!(text.lines().count(), 12);

    let v = json_ok(&["wannier", "--q-points", "8"]);
    assert!(v["payload"]["left_weight"].as_f64().unwrap() > 0.95);
    assert!(v["payload"]["minima"].is_array());
}

#[test]
fn exit_codes() {
    assert_eq!(rydlat(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(rydlat(&["bands", "--no-such-flag"]).status.code(), Some(64));
    assert_eq!(rydlat(&[]).status.code(), Some(64));
    assert_eq!(rydlat(&["--help"]).status.code(), Some(0));
    assert_eq!(
        rydlat(&["cluster", "--geometry", "1d:1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        rydlat(&["error-budget", "--preset", "nope"]).status.code(),
        Some(2)
    );
    assert_eq!(rydlat(&["bands", "--V0", "nan"]).status.code(), Some(2));
    assert_eq!(
        rydlat(&["bands", "--V0", "1e308", "--V1", "1e308"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        rydlat(&["bands", "--config", "/nonexistent/cfg.json"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn output_is_deterministic() {
    let args = [
        "cluster",
        "--geometry",
        "2d:2x3",
        "--gate",
        "noblockade",
        "--gamma",
        "500",
    ];
    let a = rydlat(&[&args[..], &["--no-timestamp"]].concat());
    let b = rydlat(&[&args[..], &["--no-timestamp"]].concat());
    assert_eq!(a.stdout, b.stdout);
    let x: Value = serde_json::from_slice(&rydlat(&args).stdout).unwrap();
    let y: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!(x["header"]["created_unix"].is_u64());
    assert_eq!(x["payload"], y["payload"]);
}

#[test]
fn dumped_config_reproduces_the_run() {
    let dir = scratch("dump");
    let flags = [
        "gate-blockade",
        "--light-shift-mhz",
        "0.025",
        "--delta-vec-mhz",
        "0.2",
        "--gamma",
        "1000",
        "--verify",
    ];
    let dump = rydlat(&[&flags[..], &["--dump-config"]].concat());
    assert_eq!(dump.status.code(), Some(0));
    let cfg = dir.join("cfg.json");
    std::fs::write(&cfg, &dump.stdout).unwrap();
    let direct = rydlat(&[&flags[..], &["--no-timestamp"]].concat());
    let via_file = rydlat(&[
        "gate-blockade",
        "--config",
        cfg.to_str().unwrap(),
        "--no-timestamp",
    ]);
    assert_eq!(direct.status.code(), Some(0));
    assert_eq!(direct.stdout, via_file.stdout);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn flags_override_config_file() {
    let dir = scratch("override");
    let cfg = dir.join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"command":"timing","timing":{"scheme":"blockade","dimension":"2d"}}"#,
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    assert_eq!(
        json_ok(&["timing", "--config", c])["payload"]["total"].as_f64(),
        Some(3360.0)
    );
    assert_eq!(
        json_ok(&["timing", "--config", c, "--dimension", "1d"])["payload"]["total"].as_f64(),
        Some(700.0)
    );
    assert_eq!(rydlat(&["bands", "--config", c]).status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn output_directory_from_environment() {
    let dir = scratch("outdir");
    let out = Command::new(env!("CARGO_BIN_EXE_rydlat"))
        .args(["timing", "--format", "csv"])
        .env("RYDLAT_OUT_DIR", &dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(dir.join("timing.csv")).unwrap();
    assert!(text.starts_with("step,duration_us"));
    let explicit = dir.join("sub").join("t.json");
    let out = rydlat(&["timing", "-o", explicit.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(explicit.exists());
    std::fs::remove_dir_all(&dir).unwrap();
}
