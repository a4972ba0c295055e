//! Middle-layer lower-bound demonstration report.

use monotone_fourier::lower_bound::{
    beta_b_from_budget, beta_from_budget, default_a1, fano_budget, kl_gaussian, verify_family,
    vg_target, FamilyJson, FamilyParams, FamilyReport, FanoBudget, MiddleLayerFamily,
};
use monotone_fourier::zoo::layer_size;
use serde::Serialize;

use crate::config::LowerBoundParams;
use crate::error::CliError;

/// `floor(2 log2 n)`, the support size matched to sample size `n`.
pub fn default_support_size(n: usize) -> usize {
    if n <= 1 {
        return 0;
    }
    (2.0 * (n as f64).log2()).floor() as usize
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBoundDemo {
    pub s: usize,
    pub default_s: usize,
    pub dim: usize,
    /// Middle layer index `floor(s/2)`.
    pub m: usize,
    pub code_len: usize,
    pub min_dist: usize,
    pub budget: f64,
    pub l2_budget: Option<f64>,
    pub a: f64,
    pub a1: Option<f64>,
    pub beta: f64,
    pub beta_source: &'static str,
    pub n: usize,
    pub sigma: f64,
    pub code_size: usize,
    pub log_code_size: f64,
    /// `N/8`, the log-size a Varshamov-Gilbert packing guarantees.
    pub vg_log_size: f64,
    pub vg_target_words: usize,
    pub separation_min: f64,
    pub separation_max: f64,
    /// `beta^2 ceil(N/4) / 2^s`.
    pub separation_floor: f64,
    pub kl_max: f64,
    pub fano: FanoBudget,
    pub verification: FamilyReport,
    pub family: FamilyJson,
}

pub fn lower_bound_demo(p: &LowerBoundParams, seed: u64) -> Result<LowerBoundDemo, CliError> {
    let default_s = default_support_size(p.n);
    let s = p.s.unwrap_or(default_s);
    if s == 0 {
        return Err(CliError::Schema(format!(
            "support size defaults to floor(2 log2 n) = 0 for n = {}; pass s explicitly",
            p.n
        )));
    }
    let choice = beta_from_budget(p.budget, s)?;
    let (beta, beta_source, a1) = match p.l2_budget {
        Some(b) => {
            let a1 = match p.a1 {
                Some(a1) => a1,
                None => default_a1(s)?,
            };
            (beta_b_from_budget(b, s, a1)?, "l2_budget", Some(a1))
        }
        None => (choice.beta, "budget", None),
    };
    let family = MiddleLayerFamily::build(&FamilyParams {
        s,
        dim: p.dim,
        beta,
        max_words: p.max_words,
        seed,
    })?;
    let verification = verify_family(&family, p.budget, p.l2_budget)?;
    let (mut separation_min, mut separation_max) = (f64::INFINITY, 0.0f64);
    for i in 0..family.len() {
        for j in i + 1..family.len() {
            let sep = family.separation(i, j)?;
            separation_min = separation_min.min(sep);
            separation_max = separation_max.max(sep);
        }
    }
    let code_len = layer_size(s)?;
    let min_dist = family.code.min_dist;
    Ok(LowerBoundDemo {
        s,
        default_s,
        dim: family.dim,
        m: family.m(),
        code_len,
        min_dist,
        budget: p.budget,
        l2_budget: p.l2_budget,
        a: choice.a,
        a1,
        beta,
        beta_source,
        n: p.n,
        sigma: p.sigma,
        code_size: family.len(),
        log_code_size: family.code.log_size(),
        vg_log_size: code_len as f64 / 8.0,
        vg_target_words: vg_target(code_len),
        separation_min,
        separation_max,
        separation_floor: beta * beta * min_dist as f64 / 2f64.powi(s as i32),
        kl_max: kl_gaussian(separation_max, p.n, p.sigma)?,
        fano: fano_budget(&family, p.n, p.sigma)?,
        verification,
        family: family.to_json(),
    })
}
