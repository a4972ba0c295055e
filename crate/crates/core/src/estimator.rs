//! Fourier thresholding estimator for monotone functions.
//!
//! The pipeline splits the sample in two. The first half estimates each
//! coordinate's influence as a difference of conditional means and keeps the
//! coordinates whose estimate clears `delta/2`. The second half estimates the
//! Fourier coefficients of every subset of the kept coordinates of size at
//! most `d0`. The predictor is the truncated Fourier sum clamped to `[0,1]`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{self, character, Point, SubsetMask};
use crate::error::{Error, Result};
use crate::fourier::{wht_inverse, FourierSpectrum, TruthTable, MAX_DENSE_DIM};
use crate::harness::NoiseModel;
use crate::zoo::FunctionSpec;

/// `2 ln 3`; the threshold exponent must exceed it.
pub const GAMMA_FLOOR: f64 = 2.197_224_577_336_219_6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    pub gamma: f64,
    pub c0: f64,
    pub d0_override: Option<usize>,
    pub max_spectral_set: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            gamma: 2.5,
            c0: 3.0,
            d0_override: None,
            max_spectral_set: 1 << 20,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > GAMMA_FLOOR) || !self.gamma.is_finite() {
            return Err(Error::Config(format!(
                "gamma must exceed 2 ln 3 = {GAMMA_FLOOR:.4}, got {}",
                self.gamma
            )));
        }
        if !(self.c0 >= 0.0) || !self.c0.is_finite() {
            return Err(Error::Config(format!("c0 must be >= 0, got {}", self.c0)));
        }
        if self.d0_override == Some(0) {
            return Err(Error::Config("d0_override must be at least 1".into()));
        }
        if self.max_spectral_set == 0 {
            return Err(Error::Config("max_spectral_set must be positive".into()));
        }
        Ok(())
    }
}

/// Where a dataset came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub function: FunctionSpec,
    pub noise: NoiseModel,
    pub seed: u64,
}

/// Observations `(X_j, Y_j)`, stored in generation order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    dim: usize,
    points: Vec<Point>,
    responses: Vec<f64>,
    provenance: Option<Provenance>,
}

impl Dataset {
    pub fn new(dim: usize, points: Vec<Point>, responses: Vec<f64>) -> Result<Dataset> {
        bits::check_dim(dim)?;
        if points.len() != responses.len() {
            return Err(Error::Domain(format!(
                "{} points but {} responses",
                points.len(),
                responses.len()
            )));
        }
        if let Some(p) = points.iter().find(|p| !p.fits(dim)) {
            return Err(Error::WidthMismatch {
                expected: dim,
                got: 64 - p.0.leading_zeros() as usize,
            });
        }
        if responses.iter().any(|y| !y.is_finite()) {
            return Err(Error::Domain("non-finite response".into()));
        }
        Ok(Dataset {
            dim,
            points,
            responses,
            provenance: None,
        })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Dataset {
        self.provenance = Some(provenance);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn mean_response(&self) -> f64 {
        self.responses.iter().sum::<f64>() / self.responses.len() as f64
    }

    /// Borrowed view of pairs `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> Sample<'_> {
        Sample {
            dim: self.dim,
            points: &self.points[start..end],
            responses: &self.responses[start..end],
        }
    }

    pub fn as_sample(&self) -> Sample<'_> {
        self.slice(0, self.len())
    }
}

/// A contiguous run of a dataset.
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a> {
    pub dim: usize,
    pub points: &'a [Point],
    pub responses: &'a [f64],
}

impl Sample<'_> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `d0 = max(ceil(sqrt((ln n - c0 sqrt(ln n))_+ / gamma)), 1)` and
/// `delta = exp(-gamma d0)`, natural logarithms.
pub fn schedule(n: usize, cfg: &EstimatorConfig) -> (usize, f64) {
    let d0 = cfg.d0_override.unwrap_or_else(|| {
        let ln = (n as f64).ln();
        let inner = (ln - cfg.c0 * ln.sqrt()).max(0.0);
        ((inner / cfg.gamma).sqrt().ceil() as usize).max(1)
    });
    (d0, (-cfg.gamma * d0 as f64).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfluenceEstimates {
    pub values: Vec<f64>,
    /// Coordinates with an empty bin; their estimate is 0.
    pub empty_bins: Vec<usize>,
}

/// `I^_i = mean(Y | X_i = 1) - mean(Y | X_i = 0)` over the sample.
pub fn estimate_influences(sample: Sample<'_>) -> InfluenceEstimates {
    let d = sample.dim;
    let mut sum = vec![[0.0f64; 2]; d];
    let mut count = vec![[0usize; 2]; d];
    for (x, &y) in sample.points.iter().zip(sample.responses) {
        for i in 0..d {
            let b = x.bit(i) as usize;
            sum[i][b] += y;
            count[i][b] += 1;
        }
    }
    let mut empty_bins = Vec::new();
    let values = (0..d)
        .map(|i| {
            if count[i][0] == 0 || count[i][1] == 0 {
                empty_bins.push(i);
                0.0
            } else {
                sum[i][1] / count[i][1] as f64 - sum[i][0] / count[i][0] as f64
            }
        })
        .collect();
    InfluenceEstimates { values, empty_bins }
}

/// Coordinates with `I^_i >= delta/2`, inclusive.
pub fn select_coordinates(influences: &[f64], delta: f64) -> Vec<usize> {
    let threshold = delta / 2.0;
    (0..influences.len())
        .filter(|&i| influences[i] >= threshold)
        .collect()
}

/// Number of subsets of a `j`-set with at most `d0` elements, saturating.
pub fn spectral_set_size(j: usize, d0: usize) -> u64 {
    (0..=d0.min(j)).fold(0u64, |acc, k| {
        acc.saturating_add(bits::binomial(j as u64, k as u64).unwrap_or(u64::MAX))
    })
}

/// Subsets of `coords` with at most `d0` elements, ordered by size and then
/// by increasing mask. Always starts with the empty set.
pub fn enumerate_spectral_set(coords: &[usize], d0: usize, cap: usize) -> Result<Vec<SubsetMask>> {
    if d0 == 0 {
        return Err(Error::Domain("d0 must be at least 1".into()));
    }
    let count = spectral_set_size(coords.len(), d0);
    if count > cap as u64 {
        return Err(Error::Capacity {
            what: "spectral set size",
            got: count,
            limit: cap as u64,
        });
    }
    let mut sorted = coords.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut out = Vec::with_capacity(count as usize);
    for k in 0..=d0.min(sorted.len()) {
        let mut level: Vec<SubsetMask> = bits::masks_of_weight(sorted.len(), k)
            .map(|local| {
                SubsetMask::from_coords(
                    SubsetMask(local).coords().map(|pos| sorted[pos]),
                )
            })
            .collect();
        level.sort_unstable();
        out.extend(level);
    }
    Ok(out)
}

/// `f~(S) = (1/n2) sum_j Y_j chi_S(X_j)` for each `S`.
pub fn estimate_coefficients(sample: Sample<'_>, subsets: &[SubsetMask]) -> Vec<f64> {
    let n = sample.len() as f64;
    subsets
        .par_iter()
        .map(|&s| {
            sample
                .points
                .iter()
                .zip(sample.responses)
                .map(|(&x, &y)| y * character(s, x))
                .sum::<f64>()
                / n
        })
        .collect()
}

/// Everything the estimator computed, plus the clamped predictor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorOutput {
    pub dim: usize,
    pub n: usize,
    pub n1: usize,
    pub d0: usize,
    pub delta: f64,
    pub influence_estimates: Vec<f64>,
    /// Coordinates whose influence bins were empty (estimate forced to 0).
    pub empty_bins: Vec<usize>,
    pub selected: Vec<usize>,
    pub spectral_set: Vec<SubsetMask>,
    /// Aligned with `spectral_set`.
    pub coeffs: Vec<f64>,
}

impl EstimatorOutput {
    /// `sum_{S} f~(S) chi_S(x)` before truncation.
    pub fn predict_unclamped(&self, x: Point) -> f64 {
        self.spectral_set
            .iter()
            .zip(&self.coeffs)
            .map(|(&s, &c)| c * character(s, x))
            .sum()
    }

    pub fn predict(&self, x: Point) -> f64 {
        self.predict_unclamped(x).clamp(0.0, 1.0)
    }

    pub fn spectrum(&self) -> FourierSpectrum {
        FourierSpectrum::sparse(
            self.dim,
            self.spectral_set.iter().copied().zip(self.coeffs.iter().copied()),
        )
        .expect("spectral set lies inside the dimension")
    }

    /// Unclamped predictor as a dense table, via the inverse transform.
    pub fn unclamped_table(&self) -> Result<TruthTable> {
        if self.dim > MAX_DENSE_DIM {
            return Err(Error::Capacity {
                what: "dense dimension",
                got: self.dim as u64,
                limit: MAX_DENSE_DIM as u64,
            });
        }
        wht_inverse(&self.spectrum())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("output serializes")
    }
}

/// Runs the full pipeline with `n1 = floor(n/2)`.
pub fn fit(data: &Dataset, cfg: &EstimatorConfig) -> Result<EstimatorOutput> {
    cfg.validate()?;
    let n = data.len();
    if n < 2 {
        return Err(Error::Domain(format!("need at least 2 observations, got {n}")));
    }
    let n1 = n / 2;
    let (d0, delta) = schedule(n, cfg);
    let est = estimate_influences(data.slice(0, n1));
    let selected = select_coordinates(&est.values, delta);
    let spectral_set = enumerate_spectral_set(&selected, d0, cfg.max_spectral_set)?;
    let coeffs = estimate_coefficients(data.slice(n1, n), &spectral_set);
    Ok(EstimatorOutput {
        dim: data.dim(),
        n,
        n1,
        d0,
        delta,
        influence_estimates: est.values,
        empty_bins: est.empty_bins,
        selected,
        spectral_set,
        coeffs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn data(dim: usize, pairs: &[(u64, f64)]) -> Dataset {
        Dataset::new(
            dim,
            pairs.iter().map(|p| Point(p.0)).collect(),
            pairs.iter().map(|p| p.1).collect(),
        )
        .unwrap()
    }

    #[test]
    fn gamma_floor_is_two_ln_three() {
        assert_abs_diff_eq!(GAMMA_FLOOR, 2.0 * 3f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn config_validation() {
        assert!(EstimatorConfig::default().validate().is_ok());
        let mut c = EstimatorConfig {
            gamma: 2.0 * 3f64.ln(),
            ..Default::default()
        };
        assert!(c.validate().is_err());
        c.gamma = 2.2;
        assert!(c.validate().is_ok());
        c.c0 = -1.0;
        assert!(c.validate().is_err());
        let c = EstimatorConfig {
            d0_override: Some(0),
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let json = r#"{"gamma":3.0,"bogus":1}"#;
        assert!(serde_json::from_str::<EstimatorConfig>(json).is_err());
        let c: EstimatorConfig = serde_json::from_str(r#"{"gamma":3.0}"#).unwrap();
        assert_eq!(c.c0, 3.0);
    }

    #[test]
    fn schedule_examples() {
        let cfg = EstimatorConfig::default();
        let (d0, delta) = schedule(2, &cfg);
        assert_eq!(d0, 1);
        assert_abs_diff_eq!(delta, (-2.5f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(delta, 0.08208, epsilon = 1e-5);

        let (d0, delta) = schedule(1_000_000, &cfg);
        assert_eq!(d0, 2);
        assert_abs_diff_eq!(delta, 0.0067379, epsilon = 1e-7);

        let cfg = EstimatorConfig {
            d0_override: Some(3),
            ..Default::default()
        };
        for n in [2, 100, 1 << 30] {
            let (d0, delta) = schedule(n, &cfg);
            assert_eq!(d0, 3);
            assert_abs_diff_eq!(delta, (-7.5f64).exp(), epsilon = 1e-18);
        }
    }

    #[test]
    fn default_schedule_stays_at_desk_scale() {
        let cfg = EstimatorConfig::default();
        for e in 2..=8 {
            let (d0, _) = schedule(10usize.pow(e), &cfg);
            assert!((1..=3).contains(&d0), "n=1e{e} gives d0={d0}");
        }
    }

    #[test]
    fn influence_estimation() {
        // constant response -> zero estimates
        let d = data(2, &[(0, 0.3), (1, 0.3), (2, 0.3), (3, 0.3)]);
        let est = estimate_influences(d.as_sample());
        assert_eq!(est.values, vec![0.0, 0.0]);
        assert!(est.empty_bins.is_empty());

        // dictator on coordinate 0
        let d = data(2, &[(0, 0.0), (1, 1.0), (2, 0.0), (3, 1.0), (1, 1.0)]);
        let est = estimate_influences(d.as_sample());
        assert_eq!(est.values[0], 1.0);

        // single observation: every coordinate has an empty bin
        let d = data(3, &[(0b101, 0.7)]);
        let est = estimate_influences(d.as_sample());
        assert_eq!(est.values, vec![0.0; 3]);
        assert_eq!(est.empty_bins, vec![0, 1, 2]);
    }

    #[test]
    fn selection() {
        assert_eq!(select_coordinates(&[1.0, 0.0, 0.0], 0.1), vec![0]);
        assert_eq!(select_coordinates(&[0.05, 0.0499], 0.1), vec![0]);
        assert!(select_coordinates(&[0.01, -0.3], 0.1).is_empty());
    }

    #[test]
    fn spectral_set_enumeration() {
        let s = enumerate_spectral_set(&[0, 1], 1, 100).unwrap();
        assert_eq!(s, vec![SubsetMask(0), SubsetMask(1), SubsetMask(2)]);
        let s = enumerate_spectral_set(&[0, 1, 2], 2, 100).unwrap();
        assert_eq!(s.len(), 7);
        assert_eq!(
            s,
            [0, 1, 2, 4, 3, 5, 6].map(SubsetMask).to_vec()
        );
        assert_eq!(enumerate_spectral_set(&[], 4, 1).unwrap(), vec![SubsetMask(0)]);
        let s = enumerate_spectral_set(&[9, 2, 5], 3, 100).unwrap();
        assert_eq!(s.len(), 8);
        assert!(s.iter().all(|m| m.is_subset_of(SubsetMask::from_coords([2, 5, 9]))));
        match enumerate_spectral_set(&(0..30).collect::<Vec<_>>(), 3, 1000) {
            Err(Error::Capacity { got, .. }) => assert_eq!(got, 1 + 30 + 435 + 4060),
            other => panic!("expected capacity error, got {other:?}"),
        }
        assert!(enumerate_spectral_set(&[1], 0, 10).is_err());
    }

    #[test]
    fn coefficient_estimation() {
        let d = data(3, &[(0, 0.4), (5, 0.4), (7, 0.4)]);
        let c = estimate_coefficients(d.as_sample(), &[SubsetMask(0), SubsetMask(1)]);
        assert_abs_diff_eq!(c[0], 0.4, epsilon = 1e-15);
        let zero = data(3, &[(0, 0.0), (5, 0.0)]);
        assert_eq!(estimate_coefficients(zero.as_sample(), &[SubsetMask(6)]), vec![0.0]);
        // dictator: Y chi_{1}(X) = x_1 (2 x_1 - 1) = x_1, so f~({1}) is the fraction of ones
        let d = data(2, &[(1, 1.0), (0, 0.0), (3, 1.0), (2, 0.0), (1, 1.0)]);
        let c = estimate_coefficients(d.as_sample(), &[SubsetMask(1)]);
        assert_abs_diff_eq!(c[0], 3.0 / 5.0, epsilon = 1e-15);
    }

    #[test]
    fn fit_on_two_points() {
        let d = data(4, &[(0b0011, 0.2), (0b1100, 0.9)]);
        let out = fit(&d, &EstimatorConfig::default()).unwrap();
        assert_eq!(out.n1, 1);
        assert_eq!(out.empty_bins, vec![0, 1, 2, 3]);
        assert!(out.selected.is_empty());
        assert_eq!(out.spectral_set, vec![SubsetMask(0)]);
        assert_eq!(out.coeffs, vec![0.9]);
        for x in 0..16 {
            assert_eq!(out.predict(Point(x)), 0.9);
        }
        let one = data(4, &[(0, 0.2)]);
        assert!(fit(&one, &EstimatorConfig::default()).is_err());
    }

    #[test]
    fn predictor_is_clamped_and_table_matches() {
        let out = EstimatorOutput {
            dim: 3,
            n: 10,
            n1: 5,
            d0: 1,
            delta: 0.1,
            influence_estimates: vec![0.0; 3],
            empty_bins: vec![],
            selected: vec![0, 2],
            spectral_set: vec![SubsetMask(0), SubsetMask(1), SubsetMask(4)],
            coeffs: vec![0.5, 0.8, -0.4],
        };
        let t = out.unclamped_table().unwrap();
        for x in 0..8 {
            let p = Point(x);
            assert_abs_diff_eq!(t.get(p), out.predict_unclamped(p), epsilon = 1e-15);
            assert!((0.0..=1.0).contains(&out.predict(p)));
        }
        assert_eq!(out.predict(Point(0b001)), 1.0);
        assert_eq!(out.predict(Point(0b100)), 0.0);
        let json: serde_json::Value = serde_json::from_str(&out.to_json()).unwrap();
        assert_eq!(json["spectral_set"], serde_json::json!([0, 1, 4]));
        assert_eq!(json["d0"], 1);
    }

    #[test]
    fn dataset_validation() {
        assert!(Dataset::new(2, vec![Point(4)], vec![0.0]).is_err());
        assert!(Dataset::new(2, vec![Point(1)], vec![]).is_err());
        assert!(Dataset::new(2, vec![Point(1)], vec![f64::INFINITY]).is_err());
    }
}
