//! Config-driven experiments for `monotone-fourier`.
//!
//! A config names an experiment kind, a target function and its parameters.
//! Running it writes `<output>/<experiment_id>.csv` and
//! `<output>/<experiment_id>.provenance.json`; the latter can be replayed to
//! reproduce the CSV byte for byte.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod lower;
pub mod run;

pub use config::{ExperimentConfig, ExperimentKind, LowerBoundParams, SpectralGrid};
pub use error::CliError;
pub use lower::{lower_bound_demo, default_support_size, LowerBoundDemo};
pub use run::{execute, replay, run, write_artifacts, Artifacts, Provenance, SeedRecord, Written};
