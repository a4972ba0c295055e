//! Bitmask newtypes for hypercube points and coordinate subsets.
//!
//! Coordinates are 0-based throughout the crate: bit `i` of a mask is the
//! coordinate written `x_{i+1}` in the usual mathematical notation, and a
//! truth-table entry at index `m` is the value at the point whose mask is `m`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest dimension representable in one machine word.
pub const MAX_DIM: usize = 64;

/// Mask with the low `dim` bits set.
#[inline]
pub fn low_mask(dim: usize) -> u64 {
    if dim >= 64 {
        u64::MAX
    } else {
        (1u64 << dim) - 1
    }
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    if dim > MAX_DIM {
        return Err(Error::Capacity {
            what: "dimension",
            got: dim as u64,
            limit: MAX_DIM as u64,
        });
    }
    Ok(())
}

/// A point of `{0,1}^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub u64);

impl Point {
    #[inline]
    pub fn bit(self, coord: usize) -> bool {
        (self.0 >> coord) & 1 == 1
    }

    #[inline]
    pub fn weight(self) -> u32 {
        self.0.count_ones()
    }

    /// True when no bit at or above `dim` is set.
    #[inline]
    pub fn fits(self, dim: usize) -> bool {
        self.0 & !low_mask(dim) == 0
    }

    #[inline]
    pub fn with(self, coord: usize, value: bool) -> Point {
        if value {
            Point(self.0 | (1 << coord))
        } else {
            Point(self.0 & !(1 << coord))
        }
    }
}

/// A subset `S` of the coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubsetMask(pub u64);

impl SubsetMask {
    pub const EMPTY: SubsetMask = SubsetMask(0);

    pub fn from_coords<I: IntoIterator<Item = usize>>(coords: I) -> SubsetMask {
        SubsetMask(coords.into_iter().fold(0u64, |m, i| m | (1 << i)))
    }

    #[inline]
    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn contains(self, coord: usize) -> bool {
        (self.0 >> coord) & 1 == 1
    }

    #[inline]
    pub fn is_subset_of(self, other: SubsetMask) -> bool {
        self.0 & !other.0 == 0
    }

    #[inline]
    pub fn fits(self, dim: usize) -> bool {
        self.0 & !low_mask(dim) == 0
    }

    /// Coordinates in increasing order.
    pub fn coords(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i)
            }
        })
    }
}

impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.coords().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

/// The character `chi_S(x) = prod_{i in S} (2 x_i - 1)`.
///
/// Each coordinate of `S` at which `x` is zero contributes a factor `-1`.
#[inline]
pub fn character(s: SubsetMask, x: Point) -> f64 {
    if (s.0 & !x.0).count_ones() & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Exact binomial coefficient, `None` on `u64` overflow.
pub fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc * (n - j) as u128 / (j + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// Next larger integer with the same popcount (Gosper's hack).
#[inline]
pub fn next_same_weight(v: u64) -> Option<u64> {
    if v == 0 {
        return None;
    }
    let c = v & v.wrapping_neg();
    let r = v.checked_add(c)?;
    Some((((r ^ v) >> 2) / c) | r)
}

/// All `width`-bit masks of the given weight in increasing numeric order.
pub fn masks_of_weight(width: usize, weight: usize) -> impl Iterator<Item = u64> {
    let limit = low_mask(width);
    let mut cur = if weight > width {
        None
    } else if weight == 0 {
        Some(0)
    } else {
        Some(low_mask(weight))
    };
    std::iter::from_fn(move || {
        let v = cur?;
        cur = if v == 0 {
            None
        } else {
            next_same_weight(v).filter(|&n| n <= limit)
        };
        Some(v)
    })
}

/// Rank of `mask` among all masks of the same weight, in increasing numeric order.
///
/// Uses the combinatorial number system: set bits `p_1 < ... < p_k` map to
/// `sum_j C(p_j, j)`.
pub fn weight_rank(mask: u64) -> u64 {
    let mut rank = 0;
    let mut k = 1;
    let mut rest = mask;
    while rest != 0 {
        let p = rest.trailing_zeros() as u64;
        rank += binomial(p, k).expect("rank fits in u64");
        rest &= rest - 1;
        k += 1;
    }
    rank
}

/// Fixed-length bit string, used for packing codewords.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    len: usize,
    limbs: Vec<u64>,
}

impl BitString {
    pub fn zeros(len: usize) -> BitString {
        BitString {
            len,
            limbs: vec![0; len.div_ceil(64)],
        }
    }

    pub fn ones(len: usize) -> BitString {
        let mut b = BitString {
            len,
            limbs: vec![u64::MAX; len.div_ceil(64)],
        };
        b.clear_tail();
        b
    }

    /// Builds from raw limbs, masking off bits beyond `len`.
    pub fn from_limbs(len: usize, mut limbs: Vec<u64>) -> BitString {
        limbs.resize(len.div_ceil(64), 0);
        let mut b = BitString { len, limbs };
        b.clear_tail();
        b
    }

    fn clear_tail(&mut self) {
        let r = self.len % 64;
        if r != 0 {
            if let Some(last) = self.limbs.last_mut() {
                *last &= low_mask(r);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn limbs(&self) -> &[u64] {
        &self.limbs
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.limbs[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        if value {
            self.limbs[i / 64] |= 1 << (i % 64);
        } else {
            self.limbs[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn count_ones(&self) -> usize {
        self.limbs.iter().map(|l| l.count_ones() as usize).sum()
    }

    pub fn hamming(&self, other: &BitString) -> usize {
        assert_eq!(self.len, other.len, "hamming distance needs equal lengths");
        self.limbs
            .iter()
            .zip(&other.limbs)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// Big-endian hex, most significant nibble first, `ceil(len/4)` digits.
    pub fn to_hex(&self) -> String {
        let digits = self.len.div_ceil(4);
        let mut out = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let bit = d * 4;
            let nibble = (self.limbs[bit / 64] >> (bit % 64)) & 0xf;
            out.push(char::from_digit(nibble as u32, 16).unwrap());
        }
        out
    }

    pub fn from_hex(len: usize, hex: &str) -> Result<BitString> {
        let digits = len.div_ceil(4);
        if hex.len() != digits {
            return Err(Error::Domain(format!(
                "hex word has {} digits, expected {digits} for length {len}",
                hex.len()
            )));
        }
        let mut b = BitString::zeros(len);
        for (k, ch) in hex.chars().rev().enumerate() {
            let nibble = ch
                .to_digit(16)
                .ok_or_else(|| Error::Domain(format!("invalid hex digit {ch:?}")))?
                as u64;
            let bit = k * 4;
            b.limbs[bit / 64] |= nibble << (bit % 64);
        }
        let before = b.limbs.clone();
        b.clear_tail();
        if before != b.limbs {
            return Err(Error::Domain(format!("hex word has bits beyond length {len}")));
        }
        Ok(b)
    }
}
