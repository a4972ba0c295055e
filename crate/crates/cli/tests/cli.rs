//! End-to-end runs of the `mfourier` binary and the library entry points.

use std::path::Path;
use std::process::Command;

use mf_cli::{execute, ExperimentConfig, Provenance};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mfourier"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn risk_config(out: &Path) -> String {
    format!(
        r#"{{
            "experiment_id": "dictator-curve",
            "experiment": "risk-curve",
            "function": {{"kind": "dictator", "dim": 10, "coord": 0}},
            "n_grid": [100, 1000, 10000],
            "noise": {{"kind": "gaussian", "sigma": 0.5}},
            "replicates": 20,
            "seed": 11,
            "output": {out:?}
        }}"#
    )
}

fn read_rows(path: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|x| x.unwrap()).collect()
}

#[test]
fn risk_curve_writes_three_non_increasing_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(dir.path(), "rc.json", &risk_config(&out));
    let status = bin().arg("run").arg(&cfg).output().unwrap().status;
    assert!(status.success());
    let rows = read_rows(&out.join("dictator-curve.csv"));
    assert_eq!(rows.len(), 3);
    let risks: Vec<f64> = rows.iter().map(|r| r[6].parse().unwrap()).collect();
    assert!(risks.windows(2).all(|w| w[1] <= w[0]), "{risks:?}");
    let prov = Provenance::load(&out.join("dictator-curve.provenance.json")).unwrap();
    assert_eq!(prov.seeds.len(), 3);
    assert!(prov.seeds.iter().all(|s| s.replicate_seeds.len() == 20));
    assert_eq!(prov.library_version, monotone_fourier::VERSION);
}

#[test]
fn spectral_check_reports_all_satisfied() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("spec");
    let body = format!(
        r#"{{
            "experiment_id": "maj9",
            "experiment": "spectral-check",
            "function": {{"kind": "majority", "dim": 9}},
            "spectral": {{"d0": [1, 2, 3], "delta": [0.5, 0.1, 0.01]}},
            "seed": 0,
            "output": {out:?}
        }}"#
    );
    let cfg = write_config(dir.path(), "sc.json", &body);
    assert!(bin().arg("run").arg(&cfg).output().unwrap().status.success());
    let rows = read_rows(&out.join("maj9.csv"));
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| &r[9] == "true"));
}

#[test]
fn malformed_configs_fail_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let good = risk_config(&out);
    let cases = [
        good.replace("\"seed\": 11", "\"seed\": 11, \"extra\": true"),
        good.replace("\"dim\": 10, \"coord\": 0", "\"dim\": 10, \"coord\": 10"),
        good.replace("[100, 1000, 10000]", "[]"),
        good.replace("\"sigma\": 0.5", "\"sigma\": -1"),
        good.replace("risk-curve", "risk-curves"),
        "{ not json".to_string(),
    ];
    for (i, body) in cases.iter().enumerate() {
        let cfg = write_config(dir.path(), &format!("bad{i}.json"), body);
        let output = bin().arg("run").arg(&cfg).output().unwrap();
        assert_eq!(output.status.code(), Some(1), "case {i}: {}", String::from_utf8_lossy(&output.stderr));
        assert!(!out.exists(), "case {i} left artifacts behind");
    }
}

#[test]
fn capacity_and_infeasible_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let body = format!(
        r#"{{"experiment_id": "big", "experiment": "spectral-check",
            "function": {{"kind": "majority", "dim": 15}},
            "spectral": {{"d0": [1], "delta": [0.1]}}, "seed": 0, "output": {out:?}}}"#
    );
    let cfg = write_config(dir.path(), "big.json", &body);
    assert_eq!(bin().arg("run").arg(&cfg).output().unwrap().status.code(), Some(2));

    let body = format!(
        r#"{{"experiment_id": "lb", "experiment": "lower-bound",
            "lower_bound": {{"s": 4, "budget": 40.0, "sigma": 1.0, "n": 100}},
            "seed": 0, "output": {out:?}}}"#
    );
    let cfg = write_config(dir.path(), "lb.json", &body);
    assert_eq!(bin().arg("run").arg(&cfg).output().unwrap().status.code(), Some(3));
    assert!(!out.exists());

    let demo = bin()
        .args(["lower-bound-demo", "--k", "1", "--sigma", "1", "--n", "100000"])
        .output()
        .unwrap()
        .status;
    assert_eq!(demo.code(), Some(2));
}

#[test]
fn config_round_trips_through_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let cfg = ExperimentConfig::from_json(&risk_config(&out)).unwrap();
    let echoed = serde_json::to_string(&cfg).unwrap();
    assert_eq!(ExperimentConfig::from_json(&echoed).unwrap(), cfg);

    let cfg_path = write_config(dir.path(), "rc.json", &risk_config(&out));
    assert!(bin().arg("run").arg(&cfg_path).args(["--seed", "4242"]).output().unwrap().status.success());
    let prov = Provenance::load(&out.join("dictator-curve.provenance.json")).unwrap();
    assert_eq!(prov.config.seed, 4242);
    assert_eq!(prov.seeds[0].master_seed, 4242);
    let mut expected = cfg.clone();
    expected.seed = 4242;
    assert_eq!(prov.config, expected);
}

#[test]
fn replay_reproduces_csv_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("first");
    let body = format!(
        r#"{{
            "experiment_id": "cmp",
            "experiment": "baseline-compare",
            "function": {{"kind": "tribes", "dim": 9, "width": 3, "blocks": 3}},
            "n_grid": [500, 5000],
            "noise": {{"kind": "uniform-bounded", "half_width": 0.3}},
            "replicates": 8,
            "seed": 5,
            "output": {out:?}
        }}"#
    );
    let cfg = write_config(dir.path(), "cmp.json", &body);
    assert!(bin().arg("run").arg(&cfg).output().unwrap().status.success());
    let second = dir.path().join("second");
    let status = bin()
        .arg("replay")
        .arg(out.join("cmp.provenance.json"))
        .arg("--output")
        .arg(&second)
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    let a = std::fs::read(out.join("cmp.csv")).unwrap();
    let b = std::fs::read(second.join("cmp.csv")).unwrap();
    assert_eq!(a, b);
    let rows = read_rows(&out.join("cmp.csv"));
    assert_eq!(rows.len(), 4);
    assert!(rows[0][0].ends_with("/estimator") && rows[1][0].ends_with("/baseline"));
}

#[test]
fn influence_profile_and_lower_bound_configs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_json(&format!(
        r#"{{"experiment_id": "junta", "experiment": "influence-profile",
            "function": {{"kind": "additive-junta", "dim": 6, "coords": [1, 3]}},
            "seed": 0, "output": {:?}}}"#,
        dir.path()
    ))
    .unwrap();
    let a = execute(&cfg).unwrap();
    let text = String::from_utf8(a.csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "experiment_id,function_tag,d,coord,l1,l2,l2_spectral,fhat_singleton");
    assert_eq!(lines.nth(1).unwrap(), "junta,additive-junta,6,1,0.5,0.25,0.25,0.25");
    assert_eq!(a.provenance.summary["total_l1"], 1.0);

    let cfg = ExperimentConfig::from_json(&format!(
        r#"{{"experiment_id": "lb6", "experiment": "lower-bound",
            "lower_bound": {{"s": 6, "budget": 1.0, "sigma": 1.0, "n": 64, "max_words": 16}},
            "seed": 2, "output": {:?}}}"#,
        dir.path()
    ))
    .unwrap();
    let a = execute(&cfg).unwrap();
    assert_eq!(a.provenance.summary["verification"]["all_passed"], true);
    assert_eq!(String::from_utf8(a.csv).unwrap().lines().count(), 1 + 13);
}

#[test]
fn lower_bound_demo_prints_json() {
    let out = bin()
        .args(["lower-bound-demo", "--s", "6", "--k", "1", "--sigma", "0.5", "--n", "200"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["s"], 6);
    assert_eq!(v["default_s"], 15);
    assert_eq!(v["verification"]["all_passed"], true);
    for key in ["a", "beta", "separation_min", "separation_max", "fano"] {
        assert!(!v[key].is_null(), "missing {key}");
    }
}
