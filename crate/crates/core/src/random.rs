//! Random table generators for property sweeps.

use rand::Rng;

use crate::fourier::TruthTable;

/// Uniform values in `[-1, 1]`.
pub fn random_table<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> TruthTable {
    let values = (0..1usize << dim)
        .map(|_| rng.random_range(-1.0..=1.0))
        .collect();
    TruthTable::new(dim, values).expect("valid dimension")
}

/// Monotone `[0,1]`-valued table: uniform values, then the running maximum
/// along every coordinate, then an affine rescale onto `[0,1]`.
pub fn random_monotone_table<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> TruthTable {
    let mut v: Vec<f64> = (0..1usize << dim).map(|_| rng.random::<f64>()).collect();
    monotone_envelope(&mut v, dim);
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        v.iter_mut().for_each(|x| *x = (*x - lo) / (hi - lo));
    } else {
        v.iter_mut().for_each(|x| *x = 0.0);
    }
    TruthTable::new(dim, v).expect("valid dimension")
}

/// In place: `v[x] <- max_{y <= x} v[y]`.
pub fn monotone_envelope(v: &mut [f64], dim: usize) {
    for i in 0..dim {
        let bit = 1usize << i;
        for x in 0..v.len() {
            if x & bit != 0 {
                v[x] = v[x].max(v[x ^ bit]);
            }
        }
    }
}
