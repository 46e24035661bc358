use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cwlimits"))
}

fn write_model(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const GAUSSIAN: &str = r#"{"sizes":[1,1],"J":[[0.8,0.3],[0.3,0.8]],"h":[0,0]}"#;
const CRITICAL: &str = r#"{"sizes":[1,1],"J":[[2,0],[0,2]],"h":[0,0]}"#;
const TWO_MINIMA: &str = r#"{"sizes":[1,1],"J":[[3,0.4],[0.4,3]],"h":[0,0]}"#;

#[test]
fn analyze_reports_gaussian_law_and_embeds_model() {
    let dir = TempDir::new().unwrap();
    let model = write_model(dir.path(), "m.json", GAUSSIAN);
    let out = dir.path().join("a.json");
    let o = run(&["analyze", "--model", s(&model), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["tool"], "cwlimits");
    assert_eq!(doc["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(doc["model"]["J"][0][1], 0.3);
    assert_eq!(doc["positive_definite"], true);
    assert_eq!(doc["minima"]["points"].as_array().unwrap().len(), 1);
    assert_eq!(doc["laws"][0]["law"]["kind"], "Gaussian");
    // (I − J/2)⁻¹ at μ = 0
    let chi = &doc["laws"][0]["law"]["chi"];
    assert!((chi[0][0].as_f64().unwrap() - 16.0 / 9.0).abs() < 1e-12);
    assert!((chi[0][1].as_f64().unwrap() - 4.0 / 9.0).abs() < 1e-12);
}

#[test]
fn analyze_classifies_the_critical_point_as_quartic() {
    let dir = TempDir::new().unwrap();
    let model = write_model(dir.path(), "m.json", CRITICAL);
    let out = dir.path().join("a.json");
    let o = run(&["analyze", "--model", s(&model), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["laws"][0]["law"]["kind"], "Quartic");
    assert_eq!(doc["laws"][0]["law"]["exponents"][0], 0.25);
}

#[test]
fn invalid_model_exits_with_2() {
    let dir = TempDir::new().unwrap();
    let asym = write_model(dir.path(), "a.json", r#"{"sizes":[1,1],"J":[[1,0.5],[0.1,1]],"h":[0,0]}"#);
    let indefinite = write_model(dir.path(), "b.json", r#"{"sizes":[1,1],"J":[[1,2],[2,1]],"h":[0,0]}"#);
    let garbage = write_model(dir.path(), "c.json", "not json");
    for m in [&asym, &indefinite, &garbage] {
        let o = run(&["analyze", "--model", s(m)]);
        assert_eq!(o.status.code(), Some(2), "{}", m.display());
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn usage_errors_exit_with_1() {
    let dir = TempDir::new().unwrap();
    let model = write_model(dir.path(), "m.json", GAUSSIAN);
    assert_eq!(run(&["analyze"]).status.code(), Some(1));
    assert_eq!(run(&["verify", "--model", s(&model), "--sizes", "200,100"]).status.code(), Some(1));
    assert_eq!(run(&["verify", "--model", s(&model), "--split", "2,1"]).status.code(), Some(1));
    assert_eq!(run(&["analyze", "--model", s(&model), "--grid", "2"]).status.code(), Some(1));
}

#[test]
fn verify_budget_exceeded_exits_with_4_and_keeps_partial_rows() {
    let dir = TempDir::new().unwrap();
    let model = write_model(dir.path(), "m.json", CRITICAL);
    let out = dir.path().join("v.json");
    let o = run(&["verify", "--model", s(&model), "--sizes", "100,4000", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(4));
    let doc: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["complete"], false);
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows[0]["budget_exceeded"], false);
    assert_eq!(rows[1]["budget_exceeded"], true);
}

#[test]
fn verify_gaussian_sweep_converges() {
    let dir = TempDir::new().unwrap();
    let model = write_model(dir.path(), "m.json", GAUSSIAN);
    let out = dir.path().join("v.json");
    let o = run(&["verify", "--model", s(&model), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let d: Vec<f64> = doc["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["covariance_rel_max_norm"].as_f64().unwrap())
        .collect();
    assert_eq!(d.len(), 4);
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
    assert!(d[3] < 0.05);
}

#[test]
fn verify_with_ball_on_two_minima() {
    let dir = TempDir::new().unwrap();
    let model = write_model(dir.path(), "m.json", TWO_MINIMA);
    let out = dir.path().join("v.csv");
    let o = run(&[
        "verify", "--model", s(&model), "--sizes", "100,200", "--ball-center", "0.9,0.9", "--ball-radius", "0.5",
        "--format", "csv", "--out", s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# cwlimits "));
    assert!(lines.next().unwrap().starts_with("# model: {"));
    assert_eq!(lines.count(), 3);
    // without a ball the minimum is ambiguous
    let o = run(&["verify", "--model", s(&model), "--sizes", "100"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let model = write_model(dir.path(), "m.json", GAUSSIAN);
    let cases: [&[&str]; 3] = [
        &["analyze"],
        &["verify", "--sizes", "50,100"],
        &["sample", "--sizes", "20", "--sweeps", "3000", "--burn-in", "100", "--chains", "2", "--seed", "5"],
    ];
    for (i, args) in cases.iter().enumerate() {
        let mut docs = Vec::new();
        for (rep, threads) in ["1", "4"].iter().enumerate() {
            let out = dir.path().join(format!("o{i}_{rep}.json"));
            let mut full: Vec<&str> = args.to_vec();
            full.extend(["--model", s(&model), "--threads", threads, "--out", s(&out)]);
            let o = run(&full);
            assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
            docs.push(fs::read(&out).unwrap());
        }
        assert_eq!(docs[0], docs[1], "{args:?}");
    }
}

#[test]
fn sample_seed_changes_estimate() {
    let dir = TempDir::new().unwrap();
    let model = write_model(dir.path(), "m.json", GAUSSIAN);
    let mut docs = Vec::new();
    for seed in ["1", "2"] {
        let out = dir.path().join(format!("s{seed}.json"));
        let o = run(&[
            "sample", "--model", s(&model), "--sizes", "20", "--sweeps", "2000", "--burn-in", "100", "--seed", seed,
            "--out", s(&out),
        ]);
        assert_eq!(o.status.code(), Some(0));
        let doc: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
        assert_eq!(doc["seed"].as_u64().unwrap().to_string(), seed);
        docs.push(doc["report"].clone());
    }
    assert_ne!(docs[0], docs[1]);
}
