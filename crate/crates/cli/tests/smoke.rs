//! End-to-end runs of the `lipfit` binary on tiny configurations.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn lipfit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lipfit")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = lipfit(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn tiny_config(dir: &Path) -> PathBuf {
    let cfg = serde_json::json!({
        "schema": "lipfit-experiment/1",
        "dataset": { "grid_per_dim": 0, "uniform_count": 40, "test_count": 100, "seed": 5, "cover_resolution": 2 },
        "model": { "kind": "lipnet", "width": 16, "depth": 2, "family": "sandwich", "activation": "tanh", "seed": 3 },
        "training": { "outer_iters": 2, "inner_steps": 100, "lr": 0.003, "emp_pairs": 200, "emp_refine_steps": 2 },
        "evaluation": { "pairs": 200, "refine_steps": 2, "seed": 0 },
        "simulation": { "dt": 0.05, "horizon": 1.0, "initial_conditions": 5, "seed": 3 },
        "output_dir": "out"
    });
    let path = dir.join("exp.json");
    fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

#[test]
fn full_pipeline_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tiny_config(tmp.path());
    let c = cfg.to_str().unwrap();
    let out = tmp.path().join("out");

    ok(&["gen-data", "--config", c]);
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("data/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["train_count"], 40);
    assert!(manifest["l_data"].as_f64().unwrap() > 0.0);

    ok(&["train", "--config", c, "--name", "p1"]);
    let first = fs::read_to_string(out.join("runs/p1/checkpoint.json")).unwrap();
    ok(&["train", "--config", c, "--name", "p1"]);
    assert_eq!(first, fs::read_to_string(out.join("runs/p1/checkpoint.json")).unwrap());

    ok(&["train", "--config", c, "--formulation", "P3", "--rho-rel", "0.1", "--name", "p3"]);
    let p3: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("runs/p3/metrics.json")).unwrap()).unwrap();
    let l_data = manifest["l_data"].as_f64().unwrap();
    let cert = p3["metrics"]["cert_lip"].as_f64().unwrap();
    assert!(cert <= 1.1 * l_data + 1e-9, "{cert} vs {l_data}");

    ok(&["train", "--config", c, "--model", "mlp", "--name", "mlp"]);
    ok(&["eval", "--config", c, "--model", "mcshane"]);
    ok(&["eval", "--config", c, "--run", "p1"]);

    let info = ok(&["info", "--checkpoint", out.join("runs/p1/checkpoint.json").to_str().unwrap()]);
    assert!(info.contains("\"family\": \"sandwich\""));

    let bounds = ok(&["bounds", "--config", c, "--run", "p1", "--eps", "0.01"]);
    let report: serde_json::Value = serde_json::from_str(&bounds).unwrap();
    assert_eq!(report["l_g_is_proxy"], true);

    ok(&["simulate", "--config", c, "--run", "p1", "--run", "mlp"]);
    assert!(out.join("sim/p1.csv").is_file());

    ok(&["report", "--dir", out.to_str().unwrap()]);
    let t1 = fs::read_to_string(out.join("tables/table1.csv")).unwrap();
    assert!(t1.starts_with("model,rho,train_mse,train_max,test_mse,test_max,emp_lip,cert_lip\n"));
    assert_eq!(t1.lines().count(), 5, "{t1}");
    let svg = fs::read_to_string(out.join("tables/trajectory_errors.svg")).unwrap();
    assert_eq!(svg.matches("class=\"curve\"").count(), 2);
}

#[test]
fn report_on_empty_directory_writes_headers() {
    let tmp = tempfile::tempdir().unwrap();
    let out = lipfit(&["report", "--dir", tmp.path().to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let t2 = fs::read_to_string(tmp.path().join("tables/table2.csv")).unwrap();
    assert_eq!(t2, "weight_decay,train_mse,train_max,test_mse,test_max,emp_lip\n");
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.json");
    fs::write(&bad, "{ \"schema\": \"lipfit-experiment/1\",\n  \"output_dir\": \"o\", \"typo\": 1 }").unwrap();
    let out = lipfit(&["gen-data", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.json:2:"));

    let missing = lipfit(&["gen-data", "--config", tmp.path().join("nope.json").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(4));

    let cfg = tiny_config(tmp.path());
    let no_data = lipfit(&["train", "--config", cfg.to_str().unwrap()]);
    assert_eq!(no_data.status.code(), Some(4));

    let no_lf = lipfit(&["bounds", "--h", "0.1"]);
    assert_eq!(no_lf.status.code(), Some(2));
}

#[test]
fn init_config_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let text = ok(&["init-config"]);
    let path = tmp.path().join("cfg.json");
    fs::write(&path, text).unwrap();
    // A parseable config reaches the data step and fails only on missing data.
    let out = lipfit(&["train", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn calibration_prints_constants() {
    let out = ok(&["bounds", "--calibrate", "1", "--sizes", "20,60,200", "--trials", "20"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["k1"].as_f64().unwrap() > 0.0);
}
