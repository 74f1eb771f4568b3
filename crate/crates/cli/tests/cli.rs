use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_feupdate"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn report(dir: &Path, method: &str) -> Value {
    let text = fs::read_to_string(dir.join(format!("{method}_report.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn without_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("wall_time_s");
    v
}

#[test]
fn missing_config_exits_2_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = run(&["run", "--config", "does-not-exist.toml", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn bad_field_exits_2_with_location() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "seed = 1\n[ga]\npopulation = 4\n").unwrap();
    let out = tmp.path().join("out");
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3") && err.contains("population"), "{err}");
    assert!(!out.exists());
}

#[test]
fn run_all_writes_reports_and_comparison() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = configs().join("quick.toml");
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for m in ["rsm", "ga", "sa"] {
        assert!(out.join(format!("{m}_report.json")).is_file());
        let hist = fs::read_to_string(out.join(format!("{m}_history.csv"))).unwrap();
        assert!(hist.starts_with("run,step,best_cost,mean_cost,evaluations,temperature\n"));
        assert!(!hist.contains('\r'));
    }
    let (rsm, ga) = (report(&out, "rsm"), report(&out, "ga"));
    let (er, eg) = (
        rsm["evaluations"].as_u64().unwrap(),
        ga["evaluations"].as_u64().unwrap(),
    );
    assert!(er * 20 < eg, "{er} vs {eg}");
    assert!(rsm["seeds"]["global"].is_u64());
    assert_eq!(rsm["config"]["run"]["rsm"]["n_samples"], 80);

    // Percent errors in the table recompute from the embedded frequencies.
    let table = fs::read_to_string(out.join("comparison.csv")).unwrap();
    assert_eq!(
        table.lines().next().unwrap(),
        "quantity,mode,measured,initial,rsm,ga,sa"
    );
    let measured: Vec<f64> = rsm["measured_hz"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    for line in table.lines().filter(|l| l.starts_with("error_pct,")) {
        let cells: Vec<&str> = line.split(',').collect();
        let mode: usize = cells[1].parse().unwrap();
        for (col, m) in [(4, "rsm"), (5, "ga"), (6, "sa")] {
            let f = report(&out, m)["updated"]["frequencies_hz"][mode - 1].as_f64().unwrap();
            let fm = measured[mode - 1];
            let pct: f64 = cells[col].parse().unwrap();
            assert!((pct - 100.0 * (f - fm).abs() / fm).abs() < 1e-9);
        }
    }
}

#[test]
fn fixed_seed_rerun_is_identical_apart_from_timing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = configs().join("quick.toml");
    let args = [
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "7",
    ];
    assert!(run(&args).status.success());
    let first: Vec<Value> = ["rsm", "ga", "sa"]
        .iter()
        .map(|m| without_timing(report(&out, m)))
        .collect();
    let hist = fs::read(out.join("sa_history.csv")).unwrap();
    assert!(run(&args).status.success());
    let second: Vec<Value> = ["rsm", "ga", "sa"]
        .iter()
        .map(|m| without_timing(report(&out, m)))
        .collect();
    assert_eq!(first, second);
    assert_eq!(hist, fs::read(out.join("sa_history.csv")).unwrap());

    let other = tmp.path().join("other");
    let o = run(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        other.to_str().unwrap(),
        "--seed",
        "8",
        "--method",
        "ga",
    ]);
    assert!(o.status.success());
    assert_ne!(
        report(&other, "ga")["updated_parameters"],
        first[1]["updated_parameters"]
    );
    assert!(!other.join("rsm_report.json").exists());
}

#[test]
fn sample_writes_design_table() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("design.csv");
    let cfg = configs().join("h_structure.toml");
    let o = run(&[
        "sample",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        file.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&file).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 151);
    let header: Vec<&str> = lines[0].split(',').collect();
    assert_eq!(header.len(), 13);
    assert_eq!(header[0], "modulus_0");
    assert_eq!(header[12], "cost");
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 13));

    let again = tmp.path().join("again.csv");
    run(&[
        "sample",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(fs::read(&file).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn rsm_reuses_sample_file() {
    let tmp = tempfile::tempdir().unwrap();
    let design = tmp.path().join("design.csv");
    let quick = configs().join("quick.toml");
    assert!(run(&[
        "sample",
        "--config",
        quick.to_str().unwrap(),
        "--out",
        design.to_str().unwrap()
    ])
    .status
    .success());
    let cfg = tmp.path().join("reuse.toml");
    let text = fs::read_to_string(&quick).unwrap();
    fs::write(&cfg, format!("samples_file = \"design.csv\"\n{text}")).unwrap();
    let out = tmp.path().join("out");
    let o = run(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--method",
        "rsm",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(report(&out, "rsm")["evaluations"], 84);
}

#[test]
fn modes_lists_both_models() {
    let cfg = configs().join("h_structure.toml");
    let o = run(&["modes", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let sections: Vec<&str> = text.split("# ").filter(|s| !s.is_empty()).collect();
    assert_eq!(sections.len(), 2);
    let mut elastic = Vec::new();
    for s in &sections {
        let mut lines = s.lines();
        lines.next();
        assert!(lines.next().unwrap().starts_with("mode,frequency_hz,rigid_body"));
        let f: Vec<String> = lines
            .filter(|l| l.split(',').nth(2) == Some("false"))
            .map(|l| l.split(',').nth(1).unwrap().to_string())
            .collect();
        assert_eq!(f.len(), 5);
        elastic.push(f);
    }
    assert_ne!(elastic[0], elastic[1]);
}
