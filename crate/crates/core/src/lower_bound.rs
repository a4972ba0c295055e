//! Hard instances for the minimax lower bound: middle-layer perturbations
//! indexed by a Hamming-separated packing.
//!
//! A family lives on a support `S0` of `s` coordinates with `m = floor(s/2)`.
//! Each codeword `omega` of length `N = C(s, m)` switches the middle-layer
//! points of `{0,1}^s` on or off. `f_omega` is `0` below the layer, `beta`
//! above it, and `beta * omega_a` on layer point `a`. Every such function is
//! monotone, and two of them differ only on the layer.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{self, BitString, Point};
use crate::error::{Error, Result};
use crate::fourier::TruthTable;
use crate::harness::{derive_seed, rng_from_seed};
use crate::influence::{influence_profile, is_monotone, EDGE_TOLERANCE};
use crate::zoo::{layer_size, FunctionSpec};

/// Draws allowed per requested codeword.
pub const RETRY_FACTOR: usize = 50;

/// Largest support size for which a family is materialized.
pub const MAX_SUPPORT: usize = 24;

/// Largest support size verified exhaustively.
pub const EXHAUSTIVE_SUPPORT: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct PackingCode {
    pub len: usize,
    pub min_dist: usize,
    pub words: Vec<BitString>,
    pub seed: u64,
}

impl PackingCode {
    /// Smallest pairwise distance, `None` for fewer than two words.
    pub fn observed_min_distance(&self) -> Option<usize> {
        let mut best = None;
        for (a, wa) in self.words.iter().enumerate() {
            for wb in &self.words[a + 1..] {
                let d = wa.hamming(wb);
                best = Some(best.map_or(d, |b: usize| b.min(d)));
            }
        }
        best
    }

    /// Re-checks the pairwise distance invariant in `O(|code|^2 N)`.
    pub fn verify(&self) -> bool {
        self.observed_min_distance()
            .is_none_or(|d| d >= self.min_dist)
    }

    pub fn log_size(&self) -> f64 {
        (self.words.len() as f64).ln()
    }
}

fn random_word<R: Rng + ?Sized>(rng: &mut R, len: usize) -> BitString {
    let limbs = (0..len.div_ceil(64)).map(|_| rng.random::<u64>()).collect();
    BitString::from_limbs(len, limbs)
}

/// Greedy random packing: draw uniform words and keep those at distance
/// `>= min_dist` from every kept word, until `target` words or
/// `RETRY_FACTOR * target` draws.
pub fn vg_packing(len: usize, min_dist: usize, target: usize, seed: u64) -> Result<PackingCode> {
    if len == 0 {
        return Err(Error::Domain("codeword length must be positive".into()));
    }
    if min_dist == 0 || min_dist > len {
        return Err(Error::Domain(format!(
            "minimum distance {min_dist} must lie in [1, {len}]"
        )));
    }
    if target < 2 {
        return Err(Error::Domain("target code size must be at least 2".into()));
    }
    let budget = RETRY_FACTOR.saturating_mul(target);
    let mut rng = rng_from_seed(seed);
    let mut words: Vec<BitString> = Vec::with_capacity(target.min(1 << 16));
    let mut attempts = 0;
    while words.len() < target && attempts < budget {
        attempts += 1;
        let w = random_word(&mut rng, len);
        if words.iter().all(|k| k.hamming(&w) >= min_dist) {
            words.push(w);
        }
    }
    if words.len() < target {
        return Err(Error::PartialCode {
            words,
            target,
            attempts,
        });
    }
    Ok(PackingCode {
        len,
        min_dist,
        words,
        seed,
    })
}

/// `ceil(exp(N/8))`, saturating.
pub fn vg_target(len: usize) -> usize {
    let t = (len as f64 / 8.0).exp().ceil();
    if t >= usize::MAX as f64 {
        usize::MAX
    } else {
        t as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaChoice {
    pub beta: f64,
    /// `2 sqrt(s) C(s,m) / 2^s`, the smallest admissible constant.
    pub a: f64,
}

/// Exact `A = 2 sqrt(s) C(s,m)/2^s`.
pub fn layer_constant(s: usize) -> Result<f64> {
    if s == 0 {
        return Err(Error::Domain("support size must be positive".into()));
    }
    let n = layer_size(s)? as f64;
    Ok(2.0 * (s as f64).sqrt() * n / 2f64.powi(s as i32))
}

/// `beta = K / (A sqrt(s))`; errors when `beta > 1`.
pub fn beta_from_budget(budget: f64, s: usize) -> Result<BetaChoice> {
    if !(budget > 0.0) {
        return Err(Error::Domain(format!("influence budget must be positive, got {budget}")));
    }
    let a = layer_constant(s)?;
    let beta = budget / (a * (s as f64).sqrt());
    if beta > 1.0 {
        return Err(Error::BudgetInfeasible {
            beta,
            detail: "influence budget K exceeds A sqrt(s)",
        });
    }
    Ok(BetaChoice { beta, a })
}

/// `beta_B = sqrt(B / (A1 sqrt(s)))`; errors when it exceeds 1.
pub fn beta_b_from_budget(l2_budget: f64, s: usize, a1: f64) -> Result<f64> {
    if !(l2_budget > 0.0) || !(a1 > 0.0) || s == 0 {
        return Err(Error::Domain("need B > 0, A1 > 0 and s >= 1".into()));
    }
    let beta = (l2_budget / (a1 * (s as f64).sqrt())).sqrt();
    if beta > 1.0 {
        return Err(Error::BudgetInfeasible {
            beta,
            detail: "L2 budget B exceeds A1 sqrt(s)",
        });
    }
    Ok(beta)
}

/// `A1 = max(A^2, A)` for the given support size.
pub fn default_a1(s: usize) -> Result<f64> {
    let a = layer_constant(s)?;
    Ok((a * a).max(a))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiddleLayerFamily {
    pub dim: usize,
    pub support: Vec<usize>,
    pub beta: f64,
    pub code: PackingCode,
}

/// Parameters for [`MiddleLayerFamily::build`].
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyParams {
    pub s: usize,
    /// Ambient dimension; defaults to `s`.
    pub dim: Option<usize>,
    pub beta: f64,
    /// Upper limit on the requested code size (the target is
    /// `min(ceil(exp(N/8)), max_words)`).
    pub max_words: usize,
    pub seed: u64,
}

impl MiddleLayerFamily {
    pub fn new(dim: usize, support: Vec<usize>, beta: f64, code: PackingCode) -> Result<Self> {
        let s = support.len();
        if s == 0 || s > MAX_SUPPORT {
            return Err(Error::Capacity {
                what: "middle-layer support size",
                got: s as u64,
                limit: MAX_SUPPORT as u64,
            });
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::Domain(format!("beta {beta} outside (0, 1]")));
        }
        if code.len != layer_size(s)? {
            return Err(Error::Domain(format!(
                "code length {} does not match layer size {}",
                code.len,
                layer_size(s)?
            )));
        }
        // validates dim and support
        FunctionSpec::middle_layer(dim, support.clone(), beta, BitString::zeros(code.len))?;
        Ok(MiddleLayerFamily {
            dim,
            support,
            beta,
            code,
        })
    }

    /// Support `{0, ..., s-1}`, packing at `min_dist = ceil(N/4)`.
    pub fn build(p: &FamilyParams) -> Result<Self> {
        let dim = p.dim.unwrap_or(p.s);
        if p.s == 0 || p.s > MAX_SUPPORT {
            return Err(Error::Capacity {
                what: "middle-layer support size",
                got: p.s as u64,
                limit: MAX_SUPPORT as u64,
            });
        }
        let len = layer_size(p.s)?;
        let min_dist = len.div_ceil(4);
        let target = vg_target(len).min(p.max_words).max(2);
        let code = vg_packing(len, min_dist, target, p.seed)?;
        MiddleLayerFamily::new(dim, (0..p.s).collect(), p.beta, code)
    }

    pub fn s(&self) -> usize {
        self.support.len()
    }

    pub fn m(&self) -> usize {
        self.s() / 2
    }

    pub fn len(&self) -> usize {
        self.code.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.code.words.is_empty()
    }

    fn word(&self, index: usize) -> Result<&BitString> {
        self.code.words.get(index).ok_or(Error::IndexOutOfRange {
            index,
            len: self.code.words.len(),
        })
    }

    /// Position of a weight-`m` point of `{0,1}^s` in the codeword.
    pub fn layer_index(&self, z: u64) -> Option<usize> {
        (z.count_ones() as usize == self.m() && z & !bits::low_mask(self.s()) == 0)
            .then(|| bits::weight_rank(z) as usize)
    }

    pub fn f_omega(&self, index: usize) -> Result<FunctionSpec> {
        let w = self.word(index)?.clone();
        FunctionSpec::middle_layer(self.dim, self.support.clone(), self.beta, w)
    }

    /// `f_omega` restricted to its support, as a table over `{0,1}^s`.
    pub fn restricted_table(&self, index: usize) -> Result<TruthTable> {
        let w = self.word(index)?.clone();
        let s = self.s();
        FunctionSpec::middle_layer(s, (0..s).collect(), self.beta, w)?.to_table()
    }

    /// `||f_i - f_j||_2^2 = beta^2 d_H(omega_i, omega_j) / 2^s`.
    pub fn separation(&self, i: usize, j: usize) -> Result<f64> {
        let dh = self.word(i)?.hamming(self.word(j)?);
        Ok(self.beta * self.beta * dh as f64 / 2f64.powi(self.s() as i32))
    }

    /// Per-coordinate influence of `f_omega` on the support, from the codeword:
    /// `I_i = beta 2^-(s-1) [#{a on: i in a} + #{a off: i not in a}]`.
    pub fn layer_influences(&self, index: usize) -> Result<Vec<f64>> {
        let w = self.word(index)?;
        let s = self.s();
        let mut counts = vec![0u64; s];
        for (pos, a) in bits::masks_of_weight(s, self.m()).enumerate() {
            let on = w.get(pos);
            for (i, c) in counts.iter_mut().enumerate() {
                if (a >> i & 1 == 1) == on {
                    *c += 1;
                }
            }
        }
        let scale = self.beta / 2f64.powi(s as i32 - 1);
        Ok(counts.into_iter().map(|c| c as f64 * scale).collect())
    }

    pub fn to_json(&self) -> FamilyJson {
        FamilyJson {
            s: self.s(),
            dim: self.dim,
            support: self.support.clone(),
            beta: self.beta,
            code_len: self.code.len,
            min_dist: self.code.min_dist,
            words: self.code.words.iter().map(BitString::to_hex).collect(),
            seed: self.code.seed,
        }
    }

    pub fn from_json(j: &FamilyJson) -> Result<Self> {
        if j.support.len() != j.s {
            return Err(Error::Domain("support length differs from s".into()));
        }
        let words = j
            .words
            .iter()
            .map(|h| BitString::from_hex(j.code_len, h))
            .collect::<Result<Vec<_>>>()?;
        let code = PackingCode {
            len: j.code_len,
            min_dist: j.min_dist,
            words,
            seed: j.seed,
        };
        if !code.verify() {
            return Err(Error::Domain("code words violate the minimum distance".into()));
        }
        MiddleLayerFamily::new(j.dim, j.support.clone(), j.beta, code)
    }
}

/// Serialized family: code words as big-endian hex strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyJson {
    pub s: usize,
    pub dim: usize,
    pub support: Vec<usize>,
    pub beta: f64,
    pub code_len: usize,
    pub min_dist: usize,
    pub words: Vec<String>,
    pub seed: u64,
}

/// `n ||f - g||^2 / (2 sigma^2)`.
pub fn kl_gaussian(sq_l2_dist: f64, n: usize, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    if !(sq_l2_dist >= 0.0) {
        return Err(Error::Domain(format!("distance must be >= 0, got {sq_l2_dist}")));
    }
    Ok(n as f64 * sq_l2_dist / (2.0 * sigma * sigma))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FanoBudget {
    /// `n beta^2 / (2 sigma^2)`.
    pub kl_bar_bound: f64,
    /// `ln|Omega| / 2` for the constructed code.
    pub half_log_omega: f64,
    pub satisfied: bool,
}

pub fn fano_budget_from_parts(beta: f64, code_size: usize, n: usize, sigma: f64) -> Result<FanoBudget> {
    if code_size < 2 {
        return Err(Error::Domain("Fano budget needs at least two hypotheses".into()));
    }
    let kl_bar_bound = kl_gaussian(beta * beta, n, sigma)?;
    let half_log_omega = 0.5 * (code_size as f64).ln();
    Ok(FanoBudget {
        kl_bar_bound,
        half_log_omega,
        satisfied: kl_bar_bound <= half_log_omega,
    })
}

pub fn fano_budget(family: &MiddleLayerFamily, n: usize, sigma: f64) -> Result<FanoBudget> {
    fano_budget_from_parts(family.beta, family.len(), n, sigma)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemberCheck {
    pub index: usize,
    pub monotone: bool,
    pub min_value: f64,
    pub max_value: f64,
    pub range_ok: bool,
    pub total_influence: f64,
    pub influence_ok: bool,
    /// Max gap between the table influences and the codeword formula.
    pub influence_formula_gap: f64,
    pub total_l2_influence: f64,
    /// `|I^(2) - beta I|`.
    pub l2_identity_gap: f64,
    pub l2_ok: Option<bool>,
}

impl MemberCheck {
    pub fn passed(&self) -> bool {
        self.monotone
            && self.range_ok
            && self.influence_ok
            && self.l2_identity_gap <= 1e-12
            && self.l2_ok != Some(false)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyReport {
    pub s: usize,
    pub beta: f64,
    pub budget: f64,
    pub l2_budget: Option<f64>,
    /// Set when only some members or only sampled points were checked.
    pub partial: bool,
    pub code_verified: bool,
    pub members: Vec<MemberCheck>,
    pub all_passed: bool,
}

/// Edge samples per member when the support is too large for enumeration.
const SAMPLED_EDGES: usize = 20_000;

fn check_member(
    family: &MiddleLayerFamily,
    index: usize,
    budget: f64,
    l2_budget: Option<f64>,
    exhaustive: bool,
) -> Result<MemberCheck> {
    let beta = family.beta;
    let formula = family.layer_influences(index)?;
    let total_formula: f64 = formula.iter().sum();
    let (monotone, min_value, max_value, total_l1, total_l2, gap) = if exhaustive {
        let t = family.restricted_table(index)?;
        let p = influence_profile(&t);
        let gap = p
            .l1
            .iter()
            .zip(&formula)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let lo = t.values().iter().copied().fold(f64::INFINITY, f64::min);
        let hi = t.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (is_monotone(&t), lo, hi, p.total_l1, p.total_l2, gap)
    } else {
        // derivatives take values in {0, beta}, so I2 = beta I
        let f = family.f_omega(index)?;
        let mut rng = rng_from_seed(derive_seed(family.code.seed, index as u64));
        let (mut monotone, mut lo, mut hi) = (true, f64::INFINITY, f64::NEG_INFINITY);
        for _ in 0..SAMPLED_EDGES {
            let x = Point(rng.random::<u64>() & bits::low_mask(family.dim));
            let i = family.support[rng.random_range(0..family.s())];
            let (a, b) = (f.value(x.with(i, false)), f.value(x.with(i, true)));
            monotone &= b - a >= -EDGE_TOLERANCE;
            lo = lo.min(a).min(b);
            hi = hi.max(a).max(b);
        }
        (monotone, lo, hi, total_formula, beta * total_formula, 0.0)
    };
    let l2_identity_gap = (total_l2 - beta * total_l1).abs();
    Ok(MemberCheck {
        index,
        monotone,
        min_value,
        max_value,
        range_ok: min_value >= 0.0 && max_value <= beta,
        total_influence: total_l1,
        influence_ok: total_l1 <= budget + 1e-10 && gap <= 1e-12,
        influence_formula_gap: gap,
        total_l2_influence: total_l2,
        l2_identity_gap,
        l2_ok: l2_budget.map(|b| total_l2 <= b + 1e-10),
    })
}

/// Checks monotonicity, range `[0, beta]`, `I <= K`, and `I2 = beta I`
/// (`<= B` when given) for family members. Supports up to 12 coordinates are
/// checked exhaustively on every member; larger supports use sampled edges on
/// at most `SAMPLED_MEMBERS` members and are flagged partial.
pub fn verify_family(
    family: &MiddleLayerFamily,
    budget: f64,
    l2_budget: Option<f64>,
) -> Result<FamilyReport> {
    const SAMPLED_MEMBERS: usize = 8;
    let exhaustive = family.s() <= EXHAUSTIVE_SUPPORT;
    let count = if exhaustive {
        family.len()
    } else {
        family.len().min(SAMPLED_MEMBERS)
    };
    let members = (0..count)
        .into_par_iter()
        .map(|i| check_member(family, i, budget, l2_budget, exhaustive))
        .collect::<Result<Vec<_>>>()?;
    let code_verified = family.code.verify();
    let all_passed = code_verified && members.iter().all(MemberCheck::passed);
    Ok(FamilyReport {
        s: family.s(),
        beta: family.beta,
        budget,
        l2_budget,
        partial: !exhaustive,
        code_verified,
        members,
        all_passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn packing_examples() {
        let c = vg_packing(4, 1, 16, 3).unwrap();
        assert_eq!(c.words.len(), 16);
        let mut hexes: Vec<String> = c.words.iter().map(BitString::to_hex).collect();
        hexes.sort();
        hexes.dedup();
        assert_eq!(hexes.len(), 16);

        for seed in 0..20 {
            let c = vg_packing(8, 2, 3, seed).unwrap();
            assert_eq!(c.words.len(), 3);
            assert!(c.verify());
        }
        assert!(vg_packing(8, 9, 3, 0).is_err());
        assert!(vg_packing(8, 0, 3, 0).is_err());
        assert!(vg_packing(8, 2, 1, 0).is_err());
    }

    #[test]
    fn packing_reports_partial_code() {
        // at most 2 words of length 4 at distance 4
        match vg_packing(4, 4, 3, 1) {
            Err(Error::PartialCode { words, target, attempts }) => {
                assert_eq!(target, 3);
                assert_eq!(attempts, 150);
                assert!(words.len() <= 2);
            }
            other => panic!("expected partial code, got {other:?}"),
        }
    }

    #[test]
    fn packing_is_deterministic() {
        let a = vg_packing(70, 18, 40, 5).unwrap();
        let b = vg_packing(70, 18, 40, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.verify());
    }

    #[test]
    fn vg_targets() {
        assert_eq!(vg_target(8), 3);
        assert_eq!(vg_target(6), 3);
        assert_eq!(vg_target(70), 6311);
    }

    #[test]
    fn beta_examples() {
        let b = beta_from_budget(1.0, 4).unwrap();
        assert_abs_diff_eq!(b.a, 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(b.beta, 1.0 / 3.0, epsilon = 1e-15);
        let b = beta_from_budget(1.0, 1).unwrap();
        assert_eq!(b.a, 1.0);
        assert_eq!(b.beta, 1.0);
        assert!(matches!(
            beta_from_budget(10.0, 4),
            Err(Error::BudgetInfeasible { .. })
        ));
        assert!(beta_from_budget(0.0, 4).is_err());
    }

    #[test]
    fn beta_b_examples() {
        assert_abs_diff_eq!(beta_b_from_budget(1.0, 4, 0.5).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(beta_b_from_budget(0.25, 4, 0.5).unwrap(), 0.5, epsilon = 1e-15);
        assert!(matches!(
            beta_b_from_budget(4.0, 4, 0.5),
            Err(Error::BudgetInfeasible { .. })
        ));
    }

    fn small_family(omegas: &[&[bool]], beta: f64) -> MiddleLayerFamily {
        let len = omegas[0].len();
        let words = omegas
            .iter()
            .map(|w| {
                let mut b = BitString::zeros(len);
                for (i, &on) in w.iter().enumerate() {
                    b.set(i, on);
                }
                b
            })
            .collect();
        let code = PackingCode {
            len,
            min_dist: 1,
            words,
            seed: 0,
        };
        let s = (1..=24).find(|&s| layer_size(s).unwrap() == len).unwrap();
        MiddleLayerFamily::new(s, (0..s).collect(), beta, code).unwrap()
    }

    #[test]
    fn f_omega_examples() {
        let fam = small_family(&[&[true, false], &[true, true], &[false, false]], 0.5);
        assert_eq!(fam.restricted_table(0).unwrap().values(), &[0.0, 0.5, 0.0, 0.5]);
        // all ones: beta 1{|x| >= m}
        assert_eq!(fam.restricted_table(1).unwrap().values(), &[0.0, 0.5, 0.5, 0.5]);
        // all zeros: beta 1{|x| > m}
        assert_eq!(fam.restricted_table(2).unwrap().values(), &[0.0, 0.0, 0.0, 0.5]);
        assert!(matches!(fam.f_omega(3), Err(Error::IndexOutOfRange { index: 3, len: 3 })));
        assert_eq!(fam.layer_index(0b01), Some(0));
        assert_eq!(fam.layer_index(0b10), Some(1));
        assert_eq!(fam.layer_index(0b11), None);
    }

    #[test]
    fn separation_examples() {
        let fam = small_family(&[&[true, false], &[false, false], &[true, true]], 0.1);
        assert_eq!(fam.separation(0, 0).unwrap(), 0.0);
        assert_abs_diff_eq!(fam.separation(0, 1).unwrap(), 0.0025, epsilon = 1e-15);
        let brute = fam
            .restricted_table(0)
            .unwrap()
            .sq_distance(&fam.restricted_table(1).unwrap())
            .unwrap();
        assert_abs_diff_eq!(brute, 0.0025, epsilon = 1e-15);
        let fam = small_family(&[&[true, true], &[false, false]], 0.5);
        assert_abs_diff_eq!(fam.separation(0, 1).unwrap(), 0.125, epsilon = 1e-15);
    }

    #[test]
    fn kl_examples() {
        assert_eq!(kl_gaussian(0.0, 50, 1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(kl_gaussian(0.0025, 100, 1.0).unwrap(), 0.125, epsilon = 1e-15);
        let beta: f64 = 0.3;
        assert_abs_diff_eq!(
            kl_gaussian(beta * beta, 77, 0.7).unwrap(),
            77.0 * beta * beta / (2.0 * 0.49),
            epsilon = 1e-12
        );
        assert!(kl_gaussian(0.1, 10, 0.0).is_err());
    }

    #[test]
    fn fano_examples() {
        let f = fano_budget_from_parts(0.0, 5, 1000, 1.0).unwrap();
        assert_eq!(f.kl_bar_bound, 0.0);
        assert!(f.half_log_omega > 0.0);
        assert!(f.satisfied);
        // |Omega| = e^3 stands for a code whose half log-size is 1.5
        let size = 3f64.exp();
        let kl = kl_gaussian(0.01, 100, 1.0).unwrap();
        assert_abs_diff_eq!(kl, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(0.5 * size.ln(), 1.5, epsilon = 1e-15);
        let big = kl_gaussian(0.01, 10_000, 1.0).unwrap();
        assert_abs_diff_eq!(big, 50.0, epsilon = 1e-12);
        let f = fano_budget_from_parts(0.1, 20, 100, 1.0).unwrap();
        assert!(f.satisfied);
        let f = fano_budget_from_parts(0.1, 20, 10_000, 1.0).unwrap();
        assert!(!f.satisfied);
    }

    #[test]
    fn s4_family_passes() {
        let beta = beta_from_budget(1.0, 4).unwrap().beta;
        let fam = MiddleLayerFamily::build(&FamilyParams {
            s: 4,
            dim: None,
            beta,
            max_words: 64,
            seed: 1,
        })
        .unwrap();
        assert_eq!(fam.code.len, 6);
        assert_eq!(fam.code.min_dist, 2);
        let r = verify_family(&fam, 1.0, None).unwrap();
        assert!(r.all_passed, "{r:?}");
        assert!(!r.partial);
    }

    #[test]
    fn s2_all_ones_influence() {
        let fam = small_family(&[&[true, true], &[false, false]], 0.5);
        let p = influence_profile(&fam.restricted_table(0).unwrap());
        // Delta_i = beta exactly when the other coordinate is 0
        assert_eq!(p.l1, vec![0.25, 0.25]);
        assert_eq!(p.total_l1, 0.5);
        assert!(p.total_l1 <= 0.5 * layer_constant(2).unwrap() * 2f64.sqrt() + 1e-15);
        let r = verify_family(&fam, 1.0, Some(1.0)).unwrap();
        assert!(r.all_passed);
        assert_eq!(r.members[0].total_l2_influence, 0.25);
    }

    #[test]
    fn large_support_is_partial() {
        let fam = MiddleLayerFamily::build(&FamilyParams {
            s: 14,
            dim: Some(20),
            beta: beta_from_budget(1.0, 14).unwrap().beta,
            max_words: 4,
            seed: 2,
        })
        .unwrap();
        let r = verify_family(&fam, 1.0, None).unwrap();
        assert!(r.partial);
        assert!(r.all_passed, "{r:?}");
        assert_eq!(r.members.len(), 4);
    }

    #[test]
    fn family_json_round_trip() {
        let fam = MiddleLayerFamily::build(&FamilyParams {
            s: 6,
            dim: Some(9),
            beta: 0.2,
            max_words: 8,
            seed: 4,
        })
        .unwrap();
        let json = serde_json::to_string(&fam.to_json()).unwrap();
        let back: FamilyJson = serde_json::from_str(&json).unwrap();
        assert_eq!(MiddleLayerFamily::from_json(&back).unwrap(), fam);
    }

    #[test]
    fn build_rejects_oversized_support() {
        let p = FamilyParams {
            s: 25,
            dim: None,
            beta: 0.1,
            max_words: 4,
            seed: 0,
        };
        assert!(MiddleLayerFamily::build(&p).unwrap_err().is_capacity());
    }
}
