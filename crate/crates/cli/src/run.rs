//! Experiment execution, artifacts and replay.

use std::path::{Path, PathBuf};

use monotone_fourier::harness::{constant_baseline_risk, mc_risk, spectral_sweep, RiskReport, RISK_CSV_HEADER};
use monotone_fourier::influence::{influence_from_spectrum, is_monotone};
use monotone_fourier::{influence_profile, wht_forward, SubsetMask, VERSION};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::CliError;
use crate::lower::lower_bound_demo;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedRecord {
    pub label: String,
    pub master_seed: u64,
    pub replicate_seeds: Vec<u64>,
}

/// Everything needed to reproduce an experiment, plus its summary results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub library_version: String,
    pub config: ExperimentConfig,
    pub csv: String,
    pub seeds: Vec<SeedRecord>,
    pub summary: Value,
}

impl Provenance {
    pub fn load(path: &Path) -> Result<Provenance, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let p: Provenance = serde_json::from_str(&text)
            .map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?;
        p.config.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub csv: Vec<u8>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Written {
    pub csv: PathBuf,
    pub provenance: PathBuf,
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("write to memory");
    for row in rows {
        w.write_record(row).expect("write to memory");
    }
    w.into_inner().expect("flush to memory")
}

fn seed_record(label: String, report: &RiskReport) -> SeedRecord {
    SeedRecord {
        label,
        master_seed: report.master_seed,
        replicate_seeds: report.seeds(),
    }
}

fn risk_summary(r: &RiskReport) -> Value {
    json!({
        "n": r.n,
        "mean_risk": r.mean_risk,
        "std_error": r.std_error,
        "bias_proxy": r.bias_proxy,
        "variance_proxy": r.variance_proxy,
        "truncation_violations": r.truncation_violations,
        "empty_bins": r.per_replicate.iter().map(|p| p.empty_bins).sum::<usize>(),
        "d0": r.d0,
        "delta": r.delta,
    })
}

/// Runs a validated config entirely in memory.
pub fn execute(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    cfg.validate()?;
    let id = cfg.experiment_id.as_str();
    let mut seeds = Vec::new();
    let (csv, summary) = match cfg.experiment {
        ExperimentKind::RiskCurve => {
            let f = cfg.function()?;
            let mut rows = Vec::new();
            let mut per_n = Vec::new();
            let mut risks = Vec::new();
            for &n in &cfg.n_grid {
                let r = mc_risk(f, n, cfg.noise, &cfg.estimator, cfg.replicates, cfg.seed)?;
                rows.push(r.csv_record(id));
                seeds.push(seed_record(format!("n={n}"), &r));
                per_n.push(risk_summary(&r));
                risks.push(r.mean_risk);
            }
            let non_increasing = risks.windows(2).all(|w| w[1] <= w[0]);
            (
                csv_bytes(&RISK_CSV_HEADER, &rows),
                json!({ "per_n": per_n, "non_increasing": non_increasing }),
            )
        }
        ExperimentKind::BaselineCompare => {
            let f = cfg.function()?;
            let mut rows = Vec::new();
            let mut per_n = Vec::new();
            for &n in &cfg.n_grid {
                let est = mc_risk(f, n, cfg.noise, &cfg.estimator, cfg.replicates, cfg.seed)?;
                let base = constant_baseline_risk(f, n, cfg.noise, cfg.replicates, cfg.seed)?;
                rows.push(est.csv_record(&format!("{id}/estimator")));
                rows.push(base.csv_record(&format!("{id}/baseline")));
                seeds.push(seed_record(format!("n={n}"), &est));
                let combined_se = est.std_error.hypot(base.std_error);
                per_n.push(json!({
                    "n": n,
                    "estimator": risk_summary(&est),
                    "baseline_mean_risk": base.mean_risk,
                    "baseline_std_error": base.std_error,
                    "gap": base.mean_risk - est.mean_risk,
                    "combined_std_error": combined_se,
                    "estimator_wins": est.mean_risk < base.mean_risk - 2.0 * combined_se,
                }));
            }
            (csv_bytes(&RISK_CSV_HEADER, &rows), json!({ "per_n": per_n }))
        }
        ExperimentKind::SpectralCheck => {
            let f = cfg.function()?;
            let grid = cfg.spectral.as_ref().expect("validated");
            let reports = spectral_sweep(f, &grid.d0, &grid.delta)?;
            let rows: Vec<Vec<String>> = reports
                .iter()
                .map(|r| {
                    vec![
                        id.to_string(),
                        f.tag().to_string(),
                        f.dim().to_string(),
                        r.d0.to_string(),
                        r.delta.to_string(),
                        r.budget.to_string(),
                        r.high_influence.len().to_string(),
                        r.tail_weight.to_string(),
                        r.bound.to_string(),
                        r.bound_satisfied.to_string(),
                    ]
                })
                .collect();
            let header = [
                "experiment_id",
                "function_tag",
                "d",
                "d0",
                "delta",
                "K",
                "J_size",
                "tail_weight",
                "bound",
                "bound_satisfied",
            ];
            (
                csv_bytes(&header, &rows),
                json!({
                    "all_satisfied": reports.iter().all(|r| r.bound_satisfied),
                    "reports": reports,
                }),
            )
        }
        ExperimentKind::InfluenceProfile => {
            let f = cfg.function()?;
            let t = f.to_table()?;
            let profile = influence_profile(&t);
            let spec = wht_forward(&t);
            let spectral = influence_from_spectrum(&spec);
            let rows: Vec<Vec<String>> = (0..f.dim())
                .map(|i| {
                    vec![
                        id.to_string(),
                        f.tag().to_string(),
                        f.dim().to_string(),
                        i.to_string(),
                        profile.l1[i].to_string(),
                        profile.l2[i].to_string(),
                        spectral.l2[i].to_string(),
                        spec.get(SubsetMask(1 << i)).to_string(),
                    ]
                })
                .collect();
            let header = ["experiment_id", "function_tag", "d", "coord", "l1", "l2", "l2_spectral", "fhat_singleton"];
            (
                csv_bytes(&header, &rows),
                json!({
                    "monotone": is_monotone(&t),
                    "total_l1": profile.total_l1,
                    "total_l2": profile.total_l2,
                    "total_l2_spectral": spectral.total_l2,
                    "variance": t.variance(),
                }),
            )
        }
        ExperimentKind::LowerBound => {
            let p = cfg.lower_bound.as_ref().expect("validated");
            let demo = lower_bound_demo(p, cfg.seed)?;
            let rows: Vec<Vec<String>> = demo
                .verification
                .members
                .iter()
                .map(|m| {
                    vec![
                        id.to_string(),
                        demo.s.to_string(),
                        demo.beta.to_string(),
                        m.index.to_string(),
                        m.monotone.to_string(),
                        m.min_value.to_string(),
                        m.max_value.to_string(),
                        m.total_influence.to_string(),
                        m.total_l2_influence.to_string(),
                        m.passed().to_string(),
                    ]
                })
                .collect();
            let header = [
                "experiment_id",
                "s",
                "beta",
                "member",
                "monotone",
                "min_value",
                "max_value",
                "total_influence",
                "total_l2_influence",
                "passed",
            ];
            let summary = serde_json::to_value(&demo).expect("serializable report");
            (csv_bytes(&header, &rows), summary)
        }
    };
    Ok(Artifacts {
        csv,
        provenance: Provenance {
            library_version: VERSION.to_string(),
            config: cfg.clone(),
            csv: format!("{id}.csv"),
            seeds,
            summary,
        },
    })
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    let tmp = path.with_extension("partial");
    std::fs::write(&tmp, bytes).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}

/// Writes `<output>/<id>.csv` and `<output>/<id>.provenance.json`.
pub fn write_artifacts(cfg: &ExperimentConfig, artifacts: &Artifacts) -> Result<Written, CliError> {
    std::fs::create_dir_all(&cfg.output).map_err(|source| CliError::Io {
        path: cfg.output.display().to_string(),
        source,
    })?;
    let written = Written {
        csv: cfg.csv_path(),
        provenance: cfg.provenance_path(),
    };
    let mut json = serde_json::to_vec_pretty(&artifacts.provenance).expect("serializable provenance");
    json.push(b'\n');
    write_atomic(&written.csv, &artifacts.csv)?;
    write_atomic(&written.provenance, &json)?;
    Ok(written)
}

/// Loads, optionally reseeds, runs and writes a config file.
pub fn run(config_path: &Path, seed: Option<u64>) -> Result<Written, CliError> {
    let mut cfg = ExperimentConfig::load(config_path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let artifacts = execute(&cfg)?;
    write_artifacts(&cfg, &artifacts)
}

/// Re-runs the config recorded in a provenance file.
pub fn replay(provenance_path: &Path, output: Option<&Path>) -> Result<Written, CliError> {
    let p = Provenance::load(provenance_path)?;
    if p.library_version != VERSION {
        eprintln!(
            "warning: provenance written by version {}, replaying with {VERSION}",
            p.library_version
        );
    }
    let mut cfg = p.config;
    if let Some(dir) = output {
        cfg.output = dir.to_path_buf();
    }
    let artifacts = execute(&cfg)?;
    write_artifacts(&cfg, &artifacts)
}
