//! Influences of coordinates, monotonicity, and spectral concentration.

use serde::Serialize;

use crate::bits::SubsetMask;
use crate::error::{Error, Result};
use crate::fourier::{wht_forward, FourierSpectrum, TruthTable};

/// Slack used for monotonicity and range tests on floating-point tables.
pub const EDGE_TOLERANCE: f64 = 1e-12;

fn check_coord(t: &TruthTable, coord: usize) -> Result<()> {
    if coord >= t.dim() {
        return Err(Error::CoordinateOutOfRange {
            coord,
            dim: t.dim(),
        });
    }
    Ok(())
}

/// `Delta_i f(x) = f(x with bit i set) - f(x with bit i cleared)`.
pub fn discrete_derivative(t: &TruthTable, coord: usize) -> Result<TruthTable> {
    check_coord(t, coord)?;
    let bit = 1usize << coord;
    let v = t.values();
    let out = (0..v.len()).map(|x| v[x | bit] - v[x & !bit]).collect();
    TruthTable::new(t.dim(), out)
}

/// Calls `f(delta)` once for every edge along `coord`.
fn for_each_edge(t: &TruthTable, coord: usize, mut f: impl FnMut(usize, f64)) {
    let bit = 1usize << coord;
    let v = t.values();
    for x in 0..v.len() {
        if x & bit == 0 {
            f(x, v[x | bit] - v[x]);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfluenceProfile {
    pub dim: usize,
    /// `I_i(f) = E|Delta_i f|`.
    pub l1: Vec<f64>,
    /// `I_i^(2)(f) = E[(Delta_i f)^2]`.
    pub l2: Vec<f64>,
    pub total_l1: f64,
    pub total_l2: f64,
}

/// Influences by definition. `Delta_i f` is constant along coordinate `i`,
/// so averaging over one endpoint of each edge gives the full mean.
pub fn influence_profile(t: &TruthTable) -> InfluenceProfile {
    let half = (t.values().len() / 2) as f64;
    let mut l1 = Vec::with_capacity(t.dim());
    let mut l2 = Vec::with_capacity(t.dim());
    for i in 0..t.dim() {
        let (mut a, mut b) = (0.0, 0.0);
        for_each_edge(t, i, |_, d| {
            a += d.abs();
            b += d * d;
        });
        l1.push(a / half);
        l2.push(b / half);
    }
    InfluenceProfile {
        dim: t.dim(),
        total_l1: l1.iter().sum(),
        total_l2: l2.iter().sum(),
        l1,
        l2,
    }
}

/// `I_i = E[f | X_i = 1] - E[f | X_i = 0]`, by restricting the table.
pub fn conditional_mean_gap(t: &TruthTable, coord: usize) -> Result<f64> {
    check_coord(t, coord)?;
    let bit = 1usize << coord;
    let (mut on, mut off) = (0.0, 0.0);
    for (x, v) in t.values().iter().enumerate() {
        if x & bit != 0 {
            on += v;
        } else {
            off += v;
        }
    }
    let half = (t.values().len() / 2) as f64;
    Ok((on - off) / half)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralInfluence {
    /// `4 sum_{S contains i} f^(S)^2`.
    pub l2: Vec<f64>,
    /// `4 sum_{S != {}} |S| f^(S)^2`.
    pub total_l2: f64,
}

/// L2-influences from Fourier coefficients.
pub fn influence_from_spectrum(spec: &FourierSpectrum) -> SpectralInfluence {
    let mut l2 = vec![0.0; spec.dim()];
    let mut total = 0.0;
    for (s, c) in spec.iter() {
        let w = 4.0 * c * c;
        if w == 0.0 {
            continue;
        }
        for i in s.coords() {
            l2[i] += w;
        }
        total += s.len() as f64 * w;
    }
    SpectralInfluence { l2, total_l2: total }
}

/// Edge test: every `Delta_i f(x) >= -1e-12`.
pub fn is_monotone(t: &TruthTable) -> bool {
    first_decreasing_edge(t).is_none()
}

fn first_decreasing_edge(t: &TruthTable) -> Option<(usize, u64)> {
    let v = t.values();
    for i in 0..t.dim() {
        let bit = 1usize << i;
        for x in 0..v.len() {
            if x & bit == 0 && v[x | bit] - v[x] < -EDGE_TOLERANCE {
                return Some((i, x as u64));
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub d0: usize,
    pub delta: f64,
    /// Coordinates with `I_i(f) >= delta`, 0-based.
    pub high_influence: Vec<usize>,
    /// `sum_{S outside the spectral set} f^(S)^2`.
    pub tail_weight: f64,
    /// `I^(2)(f)/(4 d0) + K 3^d0 sqrt(delta)/12`.
    pub bound: f64,
    pub budget: f64,
    /// Measured `I(f)`.
    pub total_influence: f64,
    pub total_l2_influence: f64,
    pub bound_satisfied: bool,
}

/// Exact spectral-concentration quantities for a monotone `[0,1]`-valued table
/// with total influence at most `budget`.
pub fn concentration_report(
    t: &TruthTable,
    d0: usize,
    delta: f64,
    budget: f64,
) -> Result<ConcentrationReport> {
    if d0 == 0 {
        return Err(Error::Domain("d0 must be at least 1".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("delta must be positive, got {delta}")));
    }
    if let Some((x, &value)) = t
        .values()
        .iter()
        .enumerate()
        .find(|(_, &v)| !(-EDGE_TOLERANCE..=1.0 + EDGE_TOLERANCE).contains(&v))
    {
        return Err(Error::OutOfUnitRange {
            point: x as u64,
            value,
        });
    }
    if let Some((coord, point)) = first_decreasing_edge(t) {
        return Err(Error::NotMonotone { coord, point });
    }
    let profile = influence_profile(t);
    if profile.total_l1 > budget + 1e-10 {
        return Err(Error::InfluenceBudget {
            influence: profile.total_l1,
            budget,
        });
    }
    let high_influence: Vec<usize> = (0..t.dim()).filter(|&i| profile.l1[i] >= delta).collect();
    let j_mask = SubsetMask::from_coords(high_influence.iter().copied());
    let spec = wht_forward(t);
    let tail_weight: f64 = spec
        .iter()
        .filter(|(s, _)| !(s.is_subset_of(j_mask) && s.len() as usize <= d0))
        .map(|(_, c)| c * c)
        .sum();
    let bound = profile.total_l2 / (4.0 * d0 as f64)
        + budget * 3f64.powi(d0 as i32) * delta.sqrt() / 12.0;
    Ok(ConcentrationReport {
        d0,
        delta,
        high_influence,
        tail_weight,
        bound,
        budget,
        total_influence: profile.total_l1,
        total_l2_influence: profile.total_l2,
        bound_satisfied: tail_weight <= bound + 1e-10,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn dictator(dim: usize) -> TruthTable {
        TruthTable::from_fn(dim, |x| x.bit(0) as u8 as f64).unwrap()
    }

    fn majority3() -> TruthTable {
        TruthTable::new(3, vec![0., 0., 0., 1., 0., 1., 1., 1.]).unwrap()
    }

    #[test]
    fn derivative_examples() {
        let d = dictator(3);
        assert!(discrete_derivative(&d, 0).unwrap().values().iter().all(|&v| v == 1.0));
        assert!(discrete_derivative(&d, 1).unwrap().values().iter().all(|&v| v == 0.0));
        let m = discrete_derivative(&majority3(), 0).unwrap();
        for x in 0..8u64 {
            let others = ((x >> 1) & 1) + ((x >> 2) & 1);
            assert_eq!(m.values()[x as usize], (others == 1) as u8 as f64);
        }
        assert!(matches!(
            discrete_derivative(&d, 3),
            Err(Error::CoordinateOutOfRange { coord: 3, dim: 3 })
        ));
    }

    #[test]
    fn profile_examples() {
        let p = influence_profile(&dictator(4));
        assert_eq!(p.total_l1, 1.0);
        assert_eq!(p.total_l2, 1.0);
        let p = influence_profile(&majority3());
        assert_eq!(p.l1, vec![0.5; 3]);
        assert_eq!(p.l2, vec![0.5; 3]);
        assert_eq!(p.total_l1, 1.5);
    }

    #[test]
    fn spectral_influence_examples() {
        let s = influence_from_spectrum(&wht_forward(&dictator(1)));
        assert_eq!(s.l2, vec![1.0]);
        let zero = FourierSpectrum::dense(3, vec![0.0; 8]).unwrap();
        let z = influence_from_spectrum(&zero);
        assert_eq!(z.l2, vec![0.0; 3]);
        assert_eq!(z.total_l2, 0.0);
        let m = influence_from_spectrum(&wht_forward(&majority3()));
        for v in &m.l2 {
            assert_abs_diff_eq!(*v, 0.5, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(m.total_l2, 1.5, epsilon = 1e-15);
    }

    #[test]
    fn monotonicity() {
        assert!(is_monotone(&majority3()));
        assert!(is_monotone(&dictator(5)));
        let anti = TruthTable::from_fn(3, |x| 1.0 - x.bit(0) as u8 as f64).unwrap();
        assert!(!is_monotone(&anti));
        let dusty = TruthTable::new(1, vec![0.5, 0.5 - 1e-13]).unwrap();
        assert!(is_monotone(&dusty));
    }

    #[test]
    fn conditional_means() {
        assert_eq!(conditional_mean_gap(&majority3(), 2).unwrap(), 0.5);
        assert_eq!(conditional_mean_gap(&dictator(2), 1).unwrap(), 0.0);
    }

    #[test]
    fn concentration_examples() {
        let r = concentration_report(&dictator(1), 1, 0.5, 1.0).unwrap();
        assert_eq!(r.high_influence, vec![0]);
        assert_eq!(r.tail_weight, 0.0);
        assert_abs_diff_eq!(r.bound, 0.25 + 3.0 * 0.5f64.sqrt() / 12.0, epsilon = 1e-15);
        assert!(r.bound_satisfied);

        let r = concentration_report(&majority3(), 1, 0.1, 1.5).unwrap();
        assert_eq!(r.high_influence, vec![0, 1, 2]);
        assert_abs_diff_eq!(r.tail_weight, 1.0 / 16.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.bound, 0.375 + 1.5 * 3.0 * 0.1f64.sqrt() / 12.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.bound, 0.4936, epsilon = 1e-4);
        assert!(r.bound_satisfied);

        let r = concentration_report(&TruthTable::constant(4, 0.0).unwrap(), 2, 0.01, 0.0).unwrap();
        assert_eq!(r.tail_weight, 0.0);
        assert!(r.high_influence.is_empty());
    }

    #[test]
    fn concentration_rejects_bad_hypotheses() {
        let anti = TruthTable::from_fn(2, |x| 1.0 - x.bit(0) as u8 as f64).unwrap();
        assert!(matches!(
            concentration_report(&anti, 1, 0.1, 10.0),
            Err(Error::NotMonotone { .. })
        ));
        let big = TruthTable::from_fn(2, |x| 2.0 * x.bit(0) as u8 as f64).unwrap();
        assert!(matches!(
            concentration_report(&big, 1, 0.1, 10.0),
            Err(Error::OutOfUnitRange { .. })
        ));
        assert!(matches!(
            concentration_report(&majority3(), 1, 0.1, 1.0),
            Err(Error::InfluenceBudget { .. })
        ));
        assert!(concentration_report(&majority3(), 0, 0.1, 2.0).is_err());
        assert!(concentration_report(&majority3(), 1, 0.0, 2.0).is_err());
    }
}
