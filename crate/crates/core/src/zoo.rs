//! Symbolic monotone test functions, evaluable at any point up to `d = 64`.

use serde::{Deserialize, Serialize};

use crate::bits::{self, weight_rank, BitString, Point};
use crate::error::{Error, Result};
use crate::fourier::{TruthTable, MAX_DENSE_DIM};
use crate::influence::{influence_profile, is_monotone};

/// A function `{0,1}^d -> [0,1]`.
///
/// Coordinates are 0-based (`coord = 0` is `x_1`). The JSON form is an object
/// tagged by `kind`; see [`FunctionSpec::tag`] for the tag names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct FunctionSpec {
    dim: usize,
    kind: Kind,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Dictator {
        coord: usize,
    },
    AdditiveJunta {
        coords: Vec<usize>,
    },
    Tribes {
        width: usize,
        blocks: usize,
    },
    Majority,
    Constant {
        value: f64,
    },
    MiddleLayer {
        support: Vec<usize>,
        beta: f64,
        omega: BitString,
    },
    Table(TruthTable),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum RawSpec {
    Dictator {
        dim: usize,
        coord: usize,
    },
    AdditiveJunta {
        dim: usize,
        coords: Vec<usize>,
    },
    Tribes {
        dim: usize,
        width: usize,
        blocks: usize,
    },
    Majority {
        dim: usize,
    },
    Constant {
        dim: usize,
        value: f64,
    },
    MiddleLayer {
        dim: usize,
        support: Vec<usize>,
        beta: f64,
        /// Big-endian hex of the `C(s, s/2)`-bit layer pattern.
        omega: String,
    },
    Table {
        table: TruthTable,
    },
}

impl TryFrom<RawSpec> for FunctionSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        match raw {
            RawSpec::Dictator { dim, coord } => FunctionSpec::dictator(dim, coord),
            RawSpec::AdditiveJunta { dim, coords } => FunctionSpec::additive_junta(dim, coords),
            RawSpec::Tribes { dim, width, blocks } => FunctionSpec::tribes(dim, width, blocks),
            RawSpec::Majority { dim } => FunctionSpec::majority(dim),
            RawSpec::Constant { dim, value } => FunctionSpec::constant(dim, value),
            RawSpec::MiddleLayer {
                dim,
                support,
                beta,
                omega,
            } => {
                let len = layer_size(support.len())?;
                let omega = BitString::from_hex(len, &omega)?;
                FunctionSpec::middle_layer(dim, support, beta, omega)
            }
            RawSpec::Table { table } => FunctionSpec::table(table),
        }
    }
}

impl From<FunctionSpec> for RawSpec {
    fn from(f: FunctionSpec) -> Self {
        let dim = f.dim;
        match f.kind {
            Kind::Dictator { coord } => RawSpec::Dictator { dim, coord },
            Kind::AdditiveJunta { coords } => RawSpec::AdditiveJunta { dim, coords },
            Kind::Tribes { width, blocks } => RawSpec::Tribes { dim, width, blocks },
            Kind::Majority => RawSpec::Majority { dim },
            Kind::Constant { value } => RawSpec::Constant { dim, value },
            Kind::MiddleLayer {
                support,
                beta,
                omega,
            } => RawSpec::MiddleLayer {
                dim,
                support,
                beta,
                omega: omega.to_hex(),
            },
            Kind::Table(table) => RawSpec::Table { table },
        }
    }
}

/// `C(s, floor(s/2))`, the number of middle-layer points of `{0,1}^s`.
pub fn layer_size(s: usize) -> Result<usize> {
    bits::binomial(s as u64, (s / 2) as u64)
        .filter(|&n| n <= usize::MAX as u64)
        .map(|n| n as usize)
        .ok_or(Error::Capacity {
            what: "middle-layer support size",
            got: s as u64,
            limit: 64,
        })
}

fn check_coords(dim: usize, coords: &[usize]) -> Result<()> {
    for &c in coords {
        if c >= dim {
            return Err(Error::CoordinateOutOfRange { coord: c, dim });
        }
    }
    let mut sorted = coords.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Domain("coordinate set has duplicates".into()));
    }
    Ok(())
}

impl FunctionSpec {
    pub fn dictator(dim: usize, coord: usize) -> Result<FunctionSpec> {
        bits::check_dim(dim)?;
        check_coords(dim, &[coord])?;
        Ok(FunctionSpec {
            dim,
            kind: Kind::Dictator { coord },
        })
    }

    /// `(1/s) sum_{i in coords} x_i`.
    pub fn additive_junta(dim: usize, coords: Vec<usize>) -> Result<FunctionSpec> {
        bits::check_dim(dim)?;
        if coords.is_empty() {
            return Err(Error::Domain("additive junta needs at least one coordinate".into()));
        }
        check_coords(dim, &coords)?;
        Ok(FunctionSpec {
            dim,
            kind: Kind::AdditiveJunta { coords },
        })
    }

    /// OR of `blocks` ANDs over consecutive runs of `width` coordinates.
    pub fn tribes(dim: usize, width: usize, blocks: usize) -> Result<FunctionSpec> {
        bits::check_dim(dim)?;
        if width == 0 || blocks == 0 {
            return Err(Error::Domain("tribes width and block count must be positive".into()));
        }
        if width * blocks > dim {
            return Err(Error::Domain(format!(
                "tribes with {blocks} blocks of width {width} needs dimension >= {}, got {dim}",
                width * blocks
            )));
        }
        Ok(FunctionSpec {
            dim,
            kind: Kind::Tribes { width, blocks },
        })
    }

    /// `1{sum_i x_i > d/2}`; ties at even `d` give 0.
    pub fn majority(dim: usize) -> Result<FunctionSpec> {
        bits::check_dim(dim)?;
        Ok(FunctionSpec {
            dim,
            kind: Kind::Majority,
        })
    }

    pub fn constant(dim: usize, value: f64) -> Result<FunctionSpec> {
        bits::check_dim(dim)?;
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::Domain(format!("constant {value} outside [0, 1]")));
        }
        Ok(FunctionSpec {
            dim,
            kind: Kind::Constant { value },
        })
    }

    /// Middle-layer perturbation on the coordinates `support` (the order of
    /// `support` fixes the layer indexing). `omega` has one bit per weight-`s/2`
    /// point of `{0,1}^s`, ordered by increasing mask.
    pub fn middle_layer(
        dim: usize,
        support: Vec<usize>,
        beta: f64,
        omega: BitString,
    ) -> Result<FunctionSpec> {
        bits::check_dim(dim)?;
        if support.is_empty() {
            return Err(Error::Domain("middle-layer support must be nonempty".into()));
        }
        check_coords(dim, &support)?;
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::Domain(format!("beta {beta} outside (0, 1]")));
        }
        let len = layer_size(support.len())?;
        if omega.len() != len {
            return Err(Error::Domain(format!(
                "layer pattern has {} bits, expected {len}",
                omega.len()
            )));
        }
        Ok(FunctionSpec {
            dim,
            kind: Kind::MiddleLayer {
                support,
                beta,
                omega,
            },
        })
    }

    /// Wraps a monotone table with values in `[0,1]`.
    pub fn table(table: TruthTable) -> Result<FunctionSpec> {
        if let Some((x, &value)) = table
            .values()
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::OutOfUnitRange {
                point: x as u64,
                value,
            });
        }
        if !is_monotone(&table) {
            return Err(Error::Domain("table is not monotone".into()));
        }
        Ok(FunctionSpec {
            dim: table.dim(),
            kind: Kind::Table(table),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Short name used in CSV output.
    pub fn tag(&self) -> &'static str {
        match self.kind {
            Kind::Dictator { .. } => "dictator",
            Kind::AdditiveJunta { .. } => "additive-junta",
            Kind::Tribes { .. } => "tribes",
            Kind::Majority => "majority",
            Kind::Constant { .. } => "constant",
            Kind::MiddleLayer { .. } => "middle-layer",
            Kind::Table(_) => "table",
        }
    }

    pub fn evaluate(&self, x: Point) -> Result<f64> {
        if !x.fits(self.dim) {
            return Err(Error::WidthMismatch {
                expected: self.dim,
                got: 64 - x.0.leading_zeros() as usize,
            });
        }
        Ok(self.value(x))
    }

    /// Evaluation without the width check; bits above `dim` are ignored.
    pub fn value(&self, x: Point) -> f64 {
        match &self.kind {
            Kind::Dictator { coord } => x.bit(*coord) as u8 as f64,
            Kind::AdditiveJunta { coords } => {
                coords.iter().filter(|&&c| x.bit(c)).count() as f64 / coords.len() as f64
            }
            Kind::Tribes { width, blocks } => {
                let block = bits::low_mask(*width);
                let hit = (0..*blocks).any(|j| (x.0 >> (j * width)) & block == block);
                hit as u8 as f64
            }
            Kind::Majority => {
                let w = (x.0 & bits::low_mask(self.dim)).count_ones() as usize;
                (2 * w > self.dim) as u8 as f64
            }
            Kind::Constant { value } => *value,
            Kind::MiddleLayer {
                support,
                beta,
                omega,
            } => {
                let s = support.len();
                let z = support
                    .iter()
                    .enumerate()
                    .fold(0u64, |z, (k, &c)| z | ((x.bit(c) as u64) << k));
                let w = z.count_ones() as usize;
                let m = s / 2;
                let on = w > m || (w == m && omega.get(weight_rank(z) as usize));
                if on {
                    *beta
                } else {
                    0.0
                }
            }
            Kind::Table(t) => t.get(Point(x.0 & bits::low_mask(self.dim))),
        }
    }

    pub fn to_table(&self) -> Result<TruthTable> {
        if self.dim > MAX_DENSE_DIM {
            return Err(Error::Capacity {
                what: "dense dimension",
                got: self.dim as u64,
                limit: MAX_DENSE_DIM as u64,
            });
        }
        if let Kind::Table(t) = &self.kind {
            return Ok(t.clone());
        }
        TruthTable::from_fn(self.dim, |x| self.value(x))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TribesInfluence {
    /// Total L1-influence from the materialized table.
    pub total: f64,
    /// Per-coordinate influences from the table (first `w*l` coordinates).
    pub per_coordinate: Vec<f64>,
    /// `2^-(w-1) (1 - 2^-w)^(l-1)`, the probability a coordinate is pivotal.
    pub pivotal: f64,
}

/// Exact tribes influence on `d = w*l` coordinates.
pub fn tribes_influence_exact(width: usize, blocks: usize) -> Result<TribesInfluence> {
    let dim = width
        .checked_mul(blocks)
        .filter(|&d| d <= MAX_DENSE_DIM)
        .ok_or(Error::Capacity {
            what: "tribes dimension w*l",
            got: (width as u64).saturating_mul(blocks as u64),
            limit: MAX_DENSE_DIM as u64,
        })?;
    let table = FunctionSpec::tribes(dim, width, blocks)?.to_table()?;
    let profile = influence_profile(&table);
    let pivotal = 0.5f64.powi(width as i32 - 1) * (1.0 - 0.5f64.powi(width as i32)).powi(blocks as i32 - 1);
    Ok(TribesInfluence {
        total: profile.total_l1,
        per_coordinate: profile.l1,
        pivotal,
    })
}
