//! Fourier thresholding estimation of monotone functions on the Boolean
//! hypercube.
//!
//! - [`fourier`]: truth tables, the Walsh-Hadamard transform, norms, the
//!   noise operator and a hypercontractivity checker.
//! - [`influence`]: L1/L2 influences, monotonicity, spectral concentration.
//! - [`zoo`]: symbolic test functions (dictator, additive junta, tribes,
//!   majority, middle-layer perturbations).
//! - [`estimator`]: the sample-split thresholding estimator.
//! - [`lower_bound`]: packings, middle-layer families, KL and Fano arithmetic.
//! - [`harness`]: seeded data generation and risk evaluation.
//!
//! Coordinates are 0-based: bit `i` of a [`Point`] or [`SubsetMask`] is the
//! coordinate `x_{i+1}`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bits;
pub mod error;
pub mod estimator;
pub mod fourier;
pub mod harness;
pub mod influence;
pub mod lower_bound;
pub mod random;
pub mod zoo;

pub use bits::{character, BitString, Point, SubsetMask};
pub use error::{Error, Result};
pub use estimator::{fit, Dataset, EstimatorConfig, EstimatorOutput};
pub use fourier::{wht_forward, wht_inverse, FourierSpectrum, TruthTable};
pub use harness::{NoiseModel, Predictor, RiskReport};
pub use influence::{influence_profile, InfluenceProfile};
pub use zoo::FunctionSpec;

/// Crate version, echoed into experiment provenance.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
