//! Data generation, risk evaluation, and experiment drivers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{low_mask, Point, SubsetMask};
use crate::error::{Error, Result};
use crate::estimator::{fit, Dataset, EstimatorConfig, EstimatorOutput, Provenance};
use crate::fourier::{wht_forward, TruthTable, MAX_DENSE_DIM};
use crate::influence::{concentration_report, influence_profile, ConcentrationReport};
use crate::zoo::FunctionSpec;

/// Largest dimension for which the bias/variance split is computed exactly.
pub const DECOMPOSITION_MAX_DIM: usize = 12;

/// Fresh points used to estimate risk when `d > 20`.
pub const FRESH_POINTS: usize = 100_000;

/// Centered sub-Gaussian observation noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NoiseModel {
    None,
    Gaussian { sigma: f64 },
    /// Uniform on `[-half_width, half_width]`.
    UniformBounded { half_width: f64 },
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel::Gaussian { sigma: 1.0 }
    }
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseModel::None => Ok(()),
            NoiseModel::Gaussian { sigma: v } | NoiseModel::UniformBounded { half_width: v } => {
                if v >= 0.0 && v.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Config(format!("noise scale must be finite and >= 0, got {v}")))
                }
            }
        }
    }

    /// Parameter `s^2` with `E exp(t eps) <= exp(s^2 t^2 / 2)`.
    pub fn sub_gaussian_param(&self) -> f64 {
        match *self {
            NoiseModel::None => 0.0,
            NoiseModel::Gaussian { sigma } => sigma * sigma,
            // Hoeffding's lemma: range (2a)^2 / 4
            NoiseModel::UniformBounded { half_width } => half_width * half_width,
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sub_gaussian_param().sqrt()
    }

    /// Actual noise variance (equal to the sub-Gaussian parameter only for Gaussians).
    pub fn variance(&self) -> f64 {
        match *self {
            NoiseModel::None => 0.0,
            NoiseModel::Gaussian { sigma } => sigma * sigma,
            NoiseModel::UniformBounded { half_width } => half_width * half_width / 3.0,
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            NoiseModel::None => 0.0,
            NoiseModel::Gaussian { sigma } => {
                if sigma == 0.0 {
                    0.0
                } else {
                    Normal::new(0.0, sigma).expect("validated sigma").sample(rng)
                }
            }
            NoiseModel::UniformBounded { half_width } => {
                if half_width == 0.0 {
                    0.0
                } else {
                    rng.random_range(-half_width..=half_width)
                }
            }
        }
    }
}

/// SplitMix64 finalizer over `(master, stream)`; distinct streams give
/// well-separated seeds.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master
        .wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform_point<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Point {
    Point(rng.random::<u64>() & low_mask(dim))
}

/// `n` uniform points with responses `f(X_j) + eps_j`.
pub fn generate_dataset(f: &FunctionSpec, n: usize, noise: NoiseModel, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::Domain("dataset size must be at least 1".into()));
    }
    noise.validate()?;
    let dim = f.dim();
    let mut rng = rng_from_seed(seed);
    let mut points = Vec::with_capacity(n);
    let mut responses = Vec::with_capacity(n);
    for _ in 0..n {
        let x = uniform_point(&mut rng, dim);
        points.push(x);
        responses.push(f.value(x) + noise.sample(&mut rng));
    }
    Ok(Dataset::new(dim, points, responses)?.with_provenance(Provenance {
        function: f.clone(),
        noise,
        seed,
    }))
}

/// Anything evaluable on the hypercube.
pub trait Predictor: Sync {
    fn predict(&self, x: Point) -> f64;

    /// Dense values over `{0,1}^dim`.
    fn table(&self, dim: usize) -> Result<TruthTable> {
        TruthTable::from_fn(dim, |x| self.predict(x))
    }
}

impl Predictor for EstimatorOutput {
    fn predict(&self, x: Point) -> f64 {
        EstimatorOutput::predict(self, x)
    }

    fn table(&self, dim: usize) -> Result<TruthTable> {
        if dim != self.dim {
            return Err(Error::WidthMismatch {
                expected: self.dim,
                got: dim,
            });
        }
        let raw = self.unclamped_table()?;
        TruthTable::new(dim, raw.into_values().into_iter().map(|v| v.clamp(0.0, 1.0)).collect())
    }
}

impl Predictor for FunctionSpec {
    fn predict(&self, x: Point) -> f64 {
        self.value(x)
    }

    fn table(&self, _dim: usize) -> Result<TruthTable> {
        self.to_table()
    }
}

/// A constant predictor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantPredictor(pub f64);

impl Predictor for ConstantPredictor {
    fn predict(&self, _x: Point) -> f64 {
        self.0
    }
}

/// `||g - f||_2^2` by full enumeration of `{0,1}^d`.
pub fn exact_risk(predictor: &impl Predictor, f: &FunctionSpec) -> Result<f64> {
    let truth = f.to_table()?;
    truth.sq_distance(&predictor.table(f.dim())?)
}

/// Monte-Carlo squared L2 distance on fresh uniform points, with its standard error.
pub fn fresh_sample_risk(
    predictor: &impl Predictor,
    f: &FunctionSpec,
    points: usize,
    seed: u64,
) -> (f64, f64) {
    let mut rng = rng_from_seed(seed);
    let sq: Vec<f64> = (0..points)
        .map(|_| {
            let x = uniform_point(&mut rng, f.dim());
            (predictor.predict(x) - f.value(x)).powi(2)
        })
        .collect();
    mean_and_se(&sq)
}

/// Sample mean and `sd/sqrt(n)` with the `n-1` denominator.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Per-replicate result of one risk evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateRisk {
    pub seed: u64,
    pub risk: f64,
    /// Standard error of `risk` when it was estimated on fresh points (`d > 20`).
    pub fresh_std_error: Option<f64>,
    /// Risk of the untruncated Fourier sum (exact when `d <= 20`).
    pub unclamped_risk: Option<f64>,
    /// `sum_{S not in S^} f^(S)^2`, when `d <= 12`.
    pub bias: Option<f64>,
    /// `sum_{S in S^} (f~(S) - f^(S))^2`, when `d <= 12`.
    pub variance: Option<f64>,
    pub selected: usize,
    pub spectral_set: usize,
    pub empty_bins: usize,
    pub d0: usize,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskReport {
    pub estimator: String,
    pub function_tag: String,
    pub dim: usize,
    pub n: usize,
    pub sigma: f64,
    pub replicates: usize,
    pub master_seed: u64,
    pub mean_risk: f64,
    pub std_error: f64,
    pub per_replicate: Vec<ReplicateRisk>,
    /// Mean exact bias term, when `d <= 12`.
    pub bias_proxy: Option<f64>,
    /// Mean exact coefficient-error term, when `d <= 12`.
    pub variance_proxy: Option<f64>,
    /// Replicates where truncation increased the error (should be 0).
    pub truncation_violations: usize,
    pub d0: usize,
    pub delta: f64,
    pub mean_selected: f64,
    pub mean_spectral_set: f64,
    pub config: Option<EstimatorConfig>,
}

/// Column order of [`RiskReport::csv_record`].
pub const RISK_CSV_HEADER: [&str; 13] = [
    "experiment_id",
    "function_tag",
    "d",
    "n",
    "sigma",
    "replicates",
    "mean_risk",
    "std_error",
    "d0",
    "delta",
    "mean_J_size",
    "mean_S_size",
    "seed",
];

impl RiskReport {
    /// One CSV row; floats use the shortest round-trip decimal form.
    pub fn csv_record(&self, experiment_id: &str) -> Vec<String> {
        vec![
            experiment_id.to_string(),
            self.function_tag.clone(),
            self.dim.to_string(),
            self.n.to_string(),
            self.sigma.to_string(),
            self.replicates.to_string(),
            self.mean_risk.to_string(),
            self.std_error.to_string(),
            self.d0.to_string(),
            self.delta.to_string(),
            self.mean_selected.to_string(),
            self.mean_spectral_set.to_string(),
            self.master_seed.to_string(),
        ]
    }

    pub fn seeds(&self) -> Vec<u64> {
        self.per_replicate.iter().map(|r| r.seed).collect()
    }
}

fn aggregate(
    estimator: &str,
    f: &FunctionSpec,
    n: usize,
    noise: NoiseModel,
    master_seed: u64,
    reps: Vec<ReplicateRisk>,
    config: Option<EstimatorConfig>,
) -> RiskReport {
    let risks: Vec<f64> = reps.iter().map(|r| r.risk).collect();
    let (mean_risk, std_error) = mean_and_se(&risks);
    let count = reps.len() as f64;
    let avg_opt = |get: fn(&ReplicateRisk) -> Option<f64>| -> Option<f64> {
        reps.iter()
            .map(get)
            .collect::<Option<Vec<f64>>>()
            .map(|v| v.iter().sum::<f64>() / count)
    };
    let truncation_violations = reps
        .iter()
        .filter(|r| matches!(r.unclamped_risk, Some(u) if r.risk > u + 1e-12))
        .count();
    RiskReport {
        estimator: estimator.to_string(),
        function_tag: f.tag().to_string(),
        dim: f.dim(),
        n,
        sigma: noise.sigma(),
        replicates: reps.len(),
        master_seed,
        mean_risk,
        std_error,
        bias_proxy: avg_opt(|r| r.bias),
        variance_proxy: avg_opt(|r| r.variance),
        truncation_violations,
        d0: reps[0].d0,
        delta: reps[0].delta,
        mean_selected: reps.iter().map(|r| r.selected as f64).sum::<f64>() / count,
        mean_spectral_set: reps.iter().map(|r| r.spectral_set as f64).sum::<f64>() / count,
        per_replicate: reps,
        config,
    }
}

/// Risk of the fitted estimator on one dataset.
pub fn replicate_risk(
    f: &FunctionSpec,
    out: &EstimatorOutput,
    truth: Option<&TruthTable>,
    spectrum: Option<&crate::fourier::FourierSpectrum>,
    seed: u64,
) -> Result<ReplicateRisk> {
    let (risk, fresh_std_error, unclamped_risk) = match truth {
        Some(t) => {
            let raw = out.unclamped_table()?;
            let unclamped = raw.sq_distance(t)?;
            let clamped = TruthTable::new(
                t.dim(),
                raw.into_values().into_iter().map(|v| v.clamp(0.0, 1.0)).collect(),
            )?;
            (clamped.sq_distance(t)?, None, Some(unclamped))
        }
        None => {
            let (risk, se) = fresh_sample_risk(out, f, FRESH_POINTS, derive_seed(seed, u64::MAX));
            (risk, Some(se), None)
        }
    };
    let (bias, variance) = match spectrum {
        Some(spec) => {
            let mut in_set = vec![false; 1 << f.dim()];
            let mut variance = 0.0;
            for (&s, &c) in out.spectral_set.iter().zip(&out.coeffs) {
                in_set[s.0 as usize] = true;
                variance += (c - spec.get(s)).powi(2);
            }
            let bias: f64 = spec
                .iter()
                .filter(|(s, _)| !in_set[s.0 as usize])
                .map(|(_, c)| c * c)
                .sum();
            (Some(bias), Some(variance))
        }
        None => (None, None),
    };
    Ok(ReplicateRisk {
        seed,
        risk,
        fresh_std_error,
        unclamped_risk,
        bias,
        variance,
        selected: out.selected.len(),
        spectral_set: out.spectral_set.len(),
        empty_bins: out.empty_bins.len(),
        d0: out.d0,
        delta: out.delta,
    })
}

/// Replicated risk of the Fourier thresholding estimator.
///
/// Replicate `r` uses seed `derive_seed(master_seed, r)`; replicates run in
/// parallel and are folded in replicate order.
pub fn mc_risk(
    f: &FunctionSpec,
    n: usize,
    noise: NoiseModel,
    cfg: &EstimatorConfig,
    replicates: usize,
    master_seed: u64,
) -> Result<RiskReport> {
    if replicates == 0 {
        return Err(Error::Domain("need at least one replicate".into()));
    }
    cfg.validate()?;
    noise.validate()?;
    let truth = (f.dim() <= MAX_DENSE_DIM).then(|| f.to_table()).transpose()?;
    let spectrum = truth
        .as_ref()
        .filter(|t| t.dim() <= DECOMPOSITION_MAX_DIM)
        .map(wht_forward);
    let reps = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(master_seed, r);
            let data = generate_dataset(f, n, noise, seed)?;
            let out = fit(&data, cfg)?;
            replicate_risk(f, &out, truth.as_ref(), spectrum.as_ref(), seed)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate("fourier-threshold", f, n, noise, master_seed, reps, Some(cfg.clone())))
}

/// Replicated risk of `clamp(mean(Y), 0, 1)`.
pub fn constant_baseline_risk(
    f: &FunctionSpec,
    n: usize,
    noise: NoiseModel,
    replicates: usize,
    master_seed: u64,
) -> Result<RiskReport> {
    if replicates == 0 {
        return Err(Error::Domain("need at least one replicate".into()));
    }
    noise.validate()?;
    // ||c - f||^2 = (c - E f)^2 + Var f
    let moments = if f.dim() <= MAX_DENSE_DIM {
        let t = f.to_table()?;
        Some((t.mean(), t.variance()))
    } else {
        None
    };
    let reps = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(master_seed, r);
            let data = generate_dataset(f, n, noise, seed)?;
            let c = data.mean_response().clamp(0.0, 1.0);
            let (risk, fresh_std_error) = match moments {
                Some((mean, var)) => ((c - mean).powi(2) + var, None),
                None => {
                    let (risk, se) =
                        fresh_sample_risk(&ConstantPredictor(c), f, FRESH_POINTS, derive_seed(seed, u64::MAX));
                    (risk, Some(se))
                }
            };
            Ok(ReplicateRisk {
                seed,
                risk,
                fresh_std_error,
                unclamped_risk: None,
                bias: None,
                variance: None,
                selected: 0,
                spectral_set: 1,
                empty_bins: 0,
                d0: 0,
                delta: 0.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate("constant-mean", f, n, noise, master_seed, reps, None))
}

/// One concentration report per `(d0, delta)` pair, with budget `K = I(f)`.
pub fn spectral_sweep(
    f: &FunctionSpec,
    d0_list: &[usize],
    delta_list: &[f64],
) -> Result<Vec<ConcentrationReport>> {
    if f.dim() > DECOMPOSITION_MAX_DIM {
        return Err(Error::Capacity {
            what: "spectral sweep dimension",
            got: f.dim() as u64,
            limit: DECOMPOSITION_MAX_DIM as u64,
        });
    }
    let t = f.to_table()?;
    let budget = influence_profile(&t).total_l1;
    let mut out = Vec::with_capacity(d0_list.len() * delta_list.len());
    for &d0 in d0_list {
        for &delta in delta_list {
            out.push(concentration_report(&t, d0, delta, budget)?);
        }
    }
    Ok(out)
}

/// `2d exp(-n1 t^2 / C) + 2d exp(-n1/8)` with `C = 16 (s^2 + 1)`.
pub fn influence_deviation_bound(dim: usize, n1: usize, t: f64, sub_gaussian_param: f64) -> f64 {
    let c_sigma = 16.0 * (sub_gaussian_param + 1.0);
    let d = dim as f64;
    let n1 = n1 as f64;
    2.0 * d * (-n1 * t * t / c_sigma).exp() + 2.0 * d * (-n1 / 8.0).exp()
}

/// `true` iff every `S` lies inside `coords` and has at most `d0` elements.
pub fn spectral_set_is_admissible(set: &[SubsetMask], coords: &[usize], d0: usize) -> bool {
    let j = SubsetMask::from_coords(coords.iter().copied());
    set.iter().all(|s| s.is_subset_of(j) && s.len() as usize <= d0)
}
