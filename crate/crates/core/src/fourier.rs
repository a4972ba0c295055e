//! Exact Fourier analysis on `{0,1}^d` under the uniform measure.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{character, low_mask, Point, SubsetMask};
use crate::error::{Error, Result};

/// Largest dimension for dense tables and spectra (2^20 doubles, 8 MiB).
pub const MAX_DENSE_DIM: usize = 20;

/// Below this length the butterfly runs on one thread.
const PAR_THRESHOLD: usize = 1 << 14;

fn check_dense_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    if dim > MAX_DENSE_DIM {
        return Err(Error::Capacity {
            what: "dense dimension",
            got: dim as u64,
            limit: MAX_DENSE_DIM as u64,
        });
    }
    Ok(())
}

/// A real-valued function on `{0,1}^d` stored densely; entry `m` is `f(Point(m))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTable", into = "RawTable")]
pub struct TruthTable {
    dim: usize,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTable {
    dim: usize,
    values: Vec<f64>,
}

impl TryFrom<RawTable> for TruthTable {
    type Error = Error;

    fn try_from(raw: RawTable) -> Result<Self> {
        TruthTable::new(raw.dim, raw.values)
    }
}

impl From<TruthTable> for RawTable {
    fn from(t: TruthTable) -> Self {
        RawTable {
            dim: t.dim,
            values: t.values,
        }
    }
}

impl TruthTable {
    pub fn new(dim: usize, values: Vec<f64>) -> Result<TruthTable> {
        check_dense_dim(dim)?;
        if values.len() != 1 << dim {
            return Err(Error::Domain(format!(
                "table of dimension {dim} needs {} values, got {}",
                1usize << dim,
                values.len()
            )));
        }
        if let Some(m) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite value at index {m}")));
        }
        Ok(TruthTable { dim, values })
    }

    pub fn from_fn(dim: usize, f: impl Fn(Point) -> f64) -> Result<TruthTable> {
        check_dense_dim(dim)?;
        let values = (0..1u64 << dim).map(|m| f(Point(m))).collect();
        TruthTable::new(dim, values)
    }

    pub fn constant(dim: usize, c: f64) -> Result<TruthTable> {
        TruthTable::from_fn(dim, |_| c)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, x: Point) -> f64 {
        self.values[x.0 as usize]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// `(1/2^d) sum_x (f(x) - mean)^2`.
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / self.values.len() as f64
    }

    /// Squared L2 distance under the uniform measure.
    pub fn sq_distance(&self, other: &TruthTable) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::WidthMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let sum: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).powi(2))
            .sum();
        Ok(sum / self.values.len() as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coeffs {
    Dense(Vec<f64>),
    Sparse(BTreeMap<SubsetMask, f64>),
}

/// Fourier coefficients `f^(S) = E[f(X) chi_S(X)]`, dense or sparse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierSpectrum {
    dim: usize,
    coeffs: Coeffs,
}

impl FourierSpectrum {
    pub fn dense(dim: usize, coeffs: Vec<f64>) -> Result<FourierSpectrum> {
        check_dense_dim(dim)?;
        if coeffs.len() != 1 << dim {
            return Err(Error::Domain(format!(
                "dense spectrum of dimension {dim} needs {} coefficients, got {}",
                1usize << dim,
                coeffs.len()
            )));
        }
        Ok(FourierSpectrum {
            dim,
            coeffs: Coeffs::Dense(coeffs),
        })
    }

    pub fn sparse(
        dim: usize,
        coeffs: impl IntoIterator<Item = (SubsetMask, f64)>,
    ) -> Result<FourierSpectrum> {
        crate::bits::check_dim(dim)?;
        let mut map = BTreeMap::new();
        for (s, c) in coeffs {
            if !s.fits(dim) {
                return Err(Error::Domain(format!("subset {s} exceeds dimension {dim}")));
            }
            *map.entry(s).or_insert(0.0) += c;
        }
        Ok(FourierSpectrum {
            dim,
            coeffs: Coeffs::Sparse(map),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &Coeffs {
        &self.coeffs
    }

    pub fn get(&self, s: SubsetMask) -> f64 {
        match &self.coeffs {
            Coeffs::Dense(v) => v.get(s.0 as usize).copied().unwrap_or(0.0),
            Coeffs::Sparse(m) => m.get(&s).copied().unwrap_or(0.0),
        }
    }

    /// Stored `(S, f^(S))` pairs; dense spectra yield every subset.
    pub fn iter(&self) -> Box<dyn Iterator<Item = (SubsetMask, f64)> + '_> {
        match &self.coeffs {
            Coeffs::Dense(v) => Box::new(
                v.iter()
                    .enumerate()
                    .map(|(s, &c)| (SubsetMask(s as u64), c)),
            ),
            Coeffs::Sparse(m) => Box::new(m.iter().map(|(&s, &c)| (s, c))),
        }
    }

    pub fn to_dense(&self) -> Result<Vec<f64>> {
        match &self.coeffs {
            Coeffs::Dense(v) => Ok(v.clone()),
            Coeffs::Sparse(m) => {
                check_dense_dim(self.dim)?;
                let mut v = vec![0.0; 1 << self.dim];
                for (s, c) in m {
                    v[s.0 as usize] = *c;
                }
                Ok(v)
            }
        }
    }

    /// `sum_S f^(S)^2`.
    pub fn energy(&self) -> f64 {
        self.iter().map(|(_, c)| c * c).sum()
    }

    /// `sum_{S != {}} f^(S)^2`, the variance by Parseval.
    pub fn variance(&self) -> f64 {
        self.iter()
            .filter(|(s, _)| !s.is_empty())
            .map(|(_, c)| c * c)
            .sum()
    }

    /// Pointwise evaluation `sum_S f^(S) chi_S(x)`.
    pub fn evaluate(&self, x: Point) -> f64 {
        self.iter().map(|(s, c)| c * character(s, x)).sum()
    }

    fn map_coeffs(&self, f: impl Fn(SubsetMask, f64) -> f64) -> FourierSpectrum {
        let coeffs = match &self.coeffs {
            Coeffs::Dense(v) => Coeffs::Dense(
                v.iter()
                    .enumerate()
                    .map(|(s, &c)| f(SubsetMask(s as u64), c))
                    .collect(),
            ),
            Coeffs::Sparse(m) => Coeffs::Sparse(m.iter().map(|(&s, &c)| (s, f(s, c))).collect()),
        };
        FourierSpectrum {
            dim: self.dim,
            coeffs,
        }
    }
}

/// One butterfly stage pattern applied to all pairs `(lo, hi)` at stride `half`.
fn butterfly(data: &mut [f64], op: impl Fn(f64, f64) -> (f64, f64) + Sync) {
    let n = data.len();
    let mut half = 1;
    while half < n {
        let block = 2 * half;
        let stage = |chunk: &mut [f64]| {
            let (lo, hi) = chunk.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = op(*a, *b);
                *a = x;
                *b = y;
            }
        };
        if n >= PAR_THRESHOLD {
            data.par_chunks_mut(block).for_each(stage);
        } else {
            data.chunks_mut(block).for_each(stage);
        }
        half = block;
    }
}

/// Forward transform in `O(d 2^d)`.
///
/// Per coordinate the pair `(f(x_i=0), f(x_i=1))` maps to `(sum, difference)`,
/// so coefficient `S` collects `+f` where `x` agrees with `S` and `-f` where a
/// coordinate of `S` is zero; a single `1/2^d` scaling follows.
pub fn wht_forward(t: &TruthTable) -> FourierSpectrum {
    let mut data = t.values.clone();
    butterfly(&mut data, |lo, hi| (lo + hi, hi - lo));
    let scale = 1.0 / data.len() as f64;
    data.iter_mut().for_each(|v| *v *= scale);
    FourierSpectrum {
        dim: t.dim,
        coeffs: Coeffs::Dense(data),
    }
}

/// Inverse transform `f(x) = sum_S f^(S) chi_S(x)`; no scaling.
pub fn wht_inverse(spec: &FourierSpectrum) -> Result<TruthTable> {
    let mut data = spec.to_dense()?;
    butterfly(&mut data, |lo, hi| (lo - hi, lo + hi));
    TruthTable::new(spec.dim, data)
}

/// Noise operator `T_rho`: scales `f^(S)` by `rho^|S|`.
pub fn noise_operator(spec: &FourierSpectrum, rho: f64) -> Result<FourierSpectrum> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::Domain(format!("noise rate {rho} outside [0, 1]")));
    }
    // powi(0) is 1 even for rho = 0
    Ok(spec.map_coeffs(|s, c| c * rho.powi(s.len() as i32)))
}

/// `(E|f|^p)^(1/p)` under the uniform measure.
pub fn lp_norm(t: &TruthTable, p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!("norm exponent {p} must be a finite value >= 1")));
    }
    let n = t.values.len() as f64;
    let mean = if p == 2.0 {
        t.values.iter().map(|v| v * v).sum::<f64>() / n
    } else {
        t.values.iter().map(|v| v.abs().powf(p)).sum::<f64>() / n
    };
    Ok(mean.powf(1.0 / p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HypercontractivityCheck {
    /// `||T_{1/sqrt 3} f||_2`, computed from the spectrum.
    pub lhs: f64,
    /// `||f||_{4/3}`.
    pub rhs: f64,
    pub holds: bool,
}

/// Bonami-Beckner at `p = 4/3`, `q = 2`, `rho = 1/sqrt(3)`.
pub fn hypercontractivity_check(t: &TruthTable) -> HypercontractivityCheck {
    let spec = wht_forward(t);
    // rho^(2|S|) = 3^(-|S|)
    let lhs = spec
        .iter()
        .map(|(s, c)| c * c * 3f64.powi(-(s.len() as i32)))
        .sum::<f64>()
        .sqrt();
    let rhs = lp_norm(t, 4.0 / 3.0).expect("4/3 is a valid exponent");
    HypercontractivityCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-12,
    }
}

/// Points of `{0,1}^d` as masks, for `d <= 20`.
pub fn points(dim: usize) -> impl Iterator<Item = Point> {
    (0..=low_mask(dim.min(MAX_DENSE_DIM))).map(Point)
}
