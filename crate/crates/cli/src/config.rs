//! Experiment configuration files.

use std::path::{Path, PathBuf};

use monotone_fourier::estimator::EstimatorConfig;
use monotone_fourier::fourier::MAX_DENSE_DIM;
use monotone_fourier::harness::{NoiseModel, DECOMPOSITION_MAX_DIM};
use monotone_fourier::lower_bound::MAX_SUPPORT;
use monotone_fourier::zoo::FunctionSpec;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    RiskCurve,
    SpectralCheck,
    LowerBound,
    InfluenceProfile,
    BaselineCompare,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralGrid {
    pub d0: Vec<usize>,
    pub delta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowerBoundParams {
    /// Support size; defaults to `floor(2 log2 n)`.
    pub s: Option<usize>,
    /// L1-influence budget `K`.
    pub budget: f64,
    /// Optional L2-influence budget `B`; switches to the `beta_B` scaling.
    #[serde(default)]
    pub l2_budget: Option<f64>,
    /// Override for `A1` in the `beta_B` scaling.
    #[serde(default)]
    pub a1: Option<f64>,
    pub sigma: f64,
    pub n: usize,
    #[serde(default = "default_max_words")]
    pub max_words: usize,
    /// Ambient dimension; defaults to `s`.
    #[serde(default)]
    pub dim: Option<usize>,
}

fn default_max_words() -> usize {
    256
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub function: Option<FunctionSpec>,
    #[serde(default)]
    pub n_grid: Vec<usize>,
    #[serde(default)]
    pub noise: NoiseModel,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    pub seed: u64,
    /// Directory receiving `<experiment_id>.csv` and `<experiment_id>.provenance.json`.
    pub output: PathBuf,
    #[serde(default)]
    pub spectral: Option<SpectralGrid>,
    #[serde(default)]
    pub lower_bound: Option<LowerBoundParams>,
}

fn default_replicates() -> usize {
    1
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<ExperimentConfig, CliError> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| schema(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        ExperimentConfig::from_json(&text)
    }

    pub fn function(&self) -> Result<&FunctionSpec, CliError> {
        self.function
            .as_ref()
            .ok_or_else(|| schema("field `function` is required for this experiment"))
    }

    pub fn csv_path(&self) -> PathBuf {
        self.output.join(format!("{}.csv", self.experiment_id))
    }

    pub fn provenance_path(&self) -> PathBuf {
        self.output.join(format!("{}.provenance.json", self.experiment_id))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let id = &self.experiment_id;
        if id.is_empty()
            || id.starts_with('.')
            || !id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        {
            return Err(schema(format!(
                "field `experiment_id` must be a plain file stem ([A-Za-z0-9._-], not starting with '.'), got {id:?}"
            )));
        }
        self.estimator
            .validate()
            .map_err(|e| schema(format!("field `estimator`: {e}")))?;
        self.noise
            .validate()
            .map_err(|e| schema(format!("field `noise`: {e}")))?;
        if self.replicates == 0 {
            return Err(schema("field `replicates` must be at least 1"));
        }
        match self.experiment {
            ExperimentKind::RiskCurve | ExperimentKind::BaselineCompare => {
                self.function()?;
                if self.n_grid.is_empty() {
                    return Err(schema("field `n_grid` must list at least one sample size"));
                }
                if let Some(n) = self.n_grid.iter().find(|&&n| n < 2) {
                    return Err(schema(format!("field `n_grid`: sample size {n} is below 2")));
                }
            }
            ExperimentKind::SpectralCheck => {
                let f = self.function()?;
                if f.dim() > DECOMPOSITION_MAX_DIM {
                    return Err(CliError::Capacity(format!(
                        "capacity exceeded: spectral-check supports d <= {DECOMPOSITION_MAX_DIM}, got {}",
                        f.dim()
                    )));
                }
                let grid = self
                    .spectral
                    .as_ref()
                    .ok_or_else(|| schema("field `spectral` is required for spectral-check"))?;
                if grid.d0.is_empty() || grid.delta.is_empty() {
                    return Err(schema("field `spectral`: d0 and delta lists must be nonempty"));
                }
                if grid.d0.contains(&0) {
                    return Err(schema("field `spectral.d0`: entries must be >= 1"));
                }
                if grid.delta.iter().any(|&d| !(d > 0.0)) {
                    return Err(schema("field `spectral.delta`: entries must be > 0"));
                }
            }
            ExperimentKind::InfluenceProfile => {
                let f = self.function()?;
                if f.dim() > MAX_DENSE_DIM {
                    return Err(CliError::Capacity(format!(
                        "capacity exceeded: influence-profile supports d <= {MAX_DENSE_DIM}, got {}",
                        f.dim()
                    )));
                }
            }
            ExperimentKind::LowerBound => {
                let lb = self
                    .lower_bound
                    .as_ref()
                    .ok_or_else(|| schema("field `lower_bound` is required for lower-bound"))?;
                if !(lb.budget > 0.0) {
                    return Err(schema("field `lower_bound.budget` must be > 0"));
                }
                if !(lb.sigma > 0.0) {
                    return Err(schema("field `lower_bound.sigma` must be > 0"));
                }
                if lb.n == 0 {
                    return Err(schema("field `lower_bound.n` must be >= 1"));
                }
                if lb.max_words < 2 {
                    return Err(schema("field `lower_bound.max_words` must be >= 2"));
                }
                let s = lb.s.unwrap_or_else(|| crate::lower::default_support_size(lb.n));
                if s == 0 || s > MAX_SUPPORT {
                    return Err(CliError::Capacity(format!(
                        "capacity exceeded: lower-bound support size must lie in 1..={MAX_SUPPORT}, got {s}"
                    )));
                }
            }
        }
        Ok(())
    }
}
