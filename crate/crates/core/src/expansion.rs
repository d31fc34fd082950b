//! Empirical copula, dyadic binary expansion and cell discretization.
//!
//! A coordinate `u ∈ [-1, 1]` has the expansion `u ≈ Σ_{d=1}^{D} 2^{-d} A_d`
//! with signs `A_d ∈ {-1, +1}`. At depth `D` this identifies one of `2^D`
//! dyadic intervals. Intervals are half-open `[lo, hi)` except the last one,
//! `[1 - 2^{1-D}, 1]`, which is closed.
//!
//! A row of `p` coordinates maps to a [`CellIndex`]: bit `j·D + (d-1)`
//! (0-based dimension `j`) is set when `A_d = +1` for that dimension.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Largest supported `p·D`. Count vectors have `2^(pD)` entries.
pub const MAX_BITS: usize = 24;

/// Number of dimensions `p` and expansion depth `D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub p: usize,
    pub depth: usize,
}

impl Shape {
    pub fn new(p: usize, depth: usize) -> Result<Self> {
        if p == 0 || depth == 0 {
            return Err(Error::Domain(format!(
                "shape needs p >= 1 and depth >= 1, got p={p}, depth={depth}"
            )));
        }
        if p * depth > MAX_BITS {
            return Err(Error::Domain(format!(
                "p*depth = {} exceeds the supported maximum {MAX_BITS}",
                p * depth
            )));
        }
        Ok(Self { p, depth })
    }

    /// `p·D`, the number of binary variables.
    #[inline]
    pub fn bits(&self) -> usize {
        self.p * self.depth
    }

    /// `2^(pD)`, the number of cells and of interactions (trivial included).
    #[inline]
    pub fn cells(&self) -> usize {
        1usize << self.bits()
    }

    /// Bit position of variable `A_d` of dimension `j` (both 0-based).
    #[inline]
    pub fn bit(&self, j: usize, d: usize) -> usize {
        j * self.depth + d
    }

    /// Mask covering all bits of dimension `j`.
    #[inline]
    pub fn dim_mask(&self, j: usize) -> u64 {
        ((1u64 << self.depth) - 1) << (j * self.depth)
    }
}

/// `n` observations of `p` finite real coordinates, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    n: usize,
    p: usize,
    data: Vec<f64>,
}

impl Sample {
    pub fn from_flat(n: usize, p: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::Data(format!(
                "sample needs at least one row and one column, got {n}x{p}"
            )));
        }
        if data.len() != n * p {
            return Err(Error::Shape(format!(
                "{} values do not form a {n}x{p} sample",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite value {} at row {}, column {}",
                data[pos],
                pos / p + 1,
                pos % p + 1
            )));
        }
        Ok(Self { n, p, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let p = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * p);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != p {
                return Err(Error::Shape(format!(
                    "row {} has {} values, expected {p}",
                    i + 1,
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::from_flat(rows.len(), p, data)
    }

    pub fn from_columns<C: AsRef<[f64]>>(cols: &[C]) -> Result<Self> {
        let p = cols.len();
        let n = cols.first().map_or(0, |c| c.as_ref().len());
        if cols.iter().any(|c| c.as_ref().len() != n) {
            return Err(Error::Shape("columns have different lengths".into()));
        }
        let mut data = Vec::with_capacity(n * p);
        for i in 0..n {
            data.extend(cols.iter().map(|c| c.as_ref()[i]));
        }
        Self::from_flat(n, p, data)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.p)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Rows at `indices`, in that order.
    pub fn select_rows(&self, indices: &[usize]) -> Sample {
        let mut data = Vec::with_capacity(indices.len() * self.p);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Sample {
            n: indices.len(),
            p: self.p,
            data,
        }
    }

    /// Applies `f` to every value of column `j`.
    pub fn map_column(&self, j: usize, f: impl Fn(f64) -> f64) -> Result<Sample> {
        let mut data = self.data.clone();
        for row in data.chunks_exact_mut(self.p) {
            row[j] = f(row[j]);
        }
        Sample::from_flat(self.n, self.p, data)
    }
}

/// Rank-transforms each margin onto the grid `2k/(n+1) - 1`, `k = 1..n`.
///
/// Ties are ordered by a random permutation drawn from `seed` (one stream
/// per dimension). Tie-free input gives a result that does not depend on the
/// seed and is unchanged by strictly increasing transforms of any margin.
pub fn empirical_copula(sample: &Sample, seed: u64) -> Sample {
    let (n, p) = (sample.n, sample.p);
    let scale = 2.0 / (n as f64 + 1.0);
    let mut out = vec![0.0; n * p];
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut tiebreak: Vec<u32> = (0..n as u32).collect();
    for j in 0..p {
        let mut r = rng::stream(seed, &[rng::TAG_COPULA, j as u64]);
        tiebreak.shuffle(&mut r);
        order.clear();
        order.extend(0..n);
        let col = |i: usize| sample.data[i * p + j];
        order.sort_unstable_by(|&a, &b| {
            col(a)
                .total_cmp(&col(b))
                .then(tiebreak[a].cmp(&tiebreak[b]))
        });
        for (rank0, &i) in order.iter().enumerate() {
            out[i * p + j] = (rank0 + 1) as f64 * scale - 1.0;
        }
    }
    Sample { n, p, data: out }
}

/// Index in `[0, 2^D)` of the dyadic interval containing `u`, low to high.
fn interval_index(u: f64, depth: usize) -> Result<u64> {
    if !(-1.0..=1.0).contains(&u) {
        return Err(Error::Domain(format!("{u} lies outside [-1, 1]")));
    }
    let top = (1u64 << depth) - 1;
    // (u + 1) * 2^(D-1) is exact for dyadic u, so boundaries land on the
    // upper interval.
    let k = ((u + 1.0) * (1u64 << (depth - 1)) as f64).floor() as u64;
    Ok(k.min(top))
}

/// Packs an interval index into expansion-order bits: bit `d-1` holds `A_d`.
#[inline]
fn interval_to_bits(k: u64, depth: usize) -> u64 {
    k.reverse_bits() >> (64 - depth)
}

/// Signs `A_1..A_D` of a single coordinate, as a 1×D pattern.
pub fn binary_expand(u: f64, depth: usize) -> Result<BitPattern> {
    if depth == 0 || depth > 62 {
        return Err(Error::Domain(format!("depth {depth} not in [1, 62]")));
    }
    let bits = interval_to_bits(interval_index(u, depth)?, depth);
    let signs = (0..depth)
        .map(|d| if bits >> d & 1 == 1 { 1 } else { -1 })
        .collect();
    Ok(BitPattern { p: 1, depth, signs })
}

/// Cell of a `p`-dimensional row at depth `D`.
pub fn cell_of(row: &[f64], depth: usize) -> Result<CellIndex> {
    let shape = Shape::new(row.len(), depth)?;
    let mut value = 0u64;
    for (j, &u) in row.iter().enumerate() {
        let bits = interval_to_bits(interval_index(u, depth)?, depth);
        value |= bits << (j * shape.depth);
    }
    Ok(CellIndex(value))
}

/// A `p×D` array of expansion signs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitPattern {
    p: usize,
    depth: usize,
    signs: Vec<i8>,
}

impl BitPattern {
    /// `signs[j*D + d]` is `A_{d+1}` of dimension `j+1`.
    pub fn from_signs(p: usize, depth: usize, signs: Vec<i8>) -> Result<Self> {
        if signs.len() != p * depth {
            return Err(Error::Shape(format!(
                "{} signs for a {p}x{depth} pattern",
                signs.len()
            )));
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Domain("signs must be -1 or +1".into()));
        }
        Ok(Self { p, depth, signs })
    }

    pub fn from_cell(shape: Shape, cell: CellIndex) -> Self {
        let signs = (0..shape.bits())
            .map(|b| if cell.0 >> b & 1 == 1 { 1 } else { -1 })
            .collect();
        Self {
            p: shape.p,
            depth: shape.depth,
            signs,
        }
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// Sign `A_{d+1}` of dimension `j` (0-based indices).
    pub fn sign(&self, j: usize, d: usize) -> i8 {
        self.signs[j * self.depth + d]
    }

    pub fn to_cell(&self) -> CellIndex {
        CellIndex(
            self.signs
                .iter()
                .enumerate()
                .filter(|(_, &s)| s == 1)
                .fold(0, |acc, (b, _)| acc | 1 << b),
        )
    }

    /// `Σ_d 2^{-d} A_d` per dimension, the midpoint of the dyadic interval.
    pub fn reconstruct(&self) -> Vec<f64> {
        self.signs
            .chunks_exact(self.depth)
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(d, &a)| a as f64 / (1u64 << (d + 1)) as f64)
                    .sum()
            })
            .collect()
    }
}

/// Label of a multinomial cell of the depth-`D` discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellIndex(pub u64);

impl CellIndex {
    #[inline]
    pub fn value(self) -> u64 {
        self.0
    }

    /// Low-to-high interval index `c_j ∈ [0, 2^D)` of dimension `j`.
    pub fn interval(self, shape: Shape, j: usize) -> u64 {
        let block = (self.0 & shape.dim_mask(j)) >> (j * shape.depth);
        interval_to_bits(block, shape.depth)
    }

    /// Centre of the cell, one coordinate per dimension.
    pub fn midpoint(self, shape: Shape) -> Vec<f64> {
        BitPattern::from_cell(shape, self).reconstruct()
    }
}

/// Multinomial counts over the `2^(pD)` cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellCounts {
    shape: Shape,
    counts: Vec<u64>,
}

impl CellCounts {
    pub fn new(shape: Shape, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != shape.cells() {
            return Err(Error::Shape(format!(
                "{} counts for {} cells",
                counts.len(),
                shape.cells()
            )));
        }
        Ok(Self { shape, counts })
    }

    /// Counts of the given cell labels.
    pub fn from_cells(shape: Shape, cells: impl IntoIterator<Item = CellIndex>) -> Result<Self> {
        let mut counts = vec![0u64; shape.cells()];
        for c in cells {
            let slot = counts.get_mut(c.0 as usize).ok_or(Error::Index {
                index: c.0,
                len: shape.cells() as u64,
            })?;
            *slot += 1;
        }
        Ok(Self { shape, counts })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Cell label of every row.
pub fn cells(sample: &Sample, depth: usize) -> Result<Vec<CellIndex>> {
    Shape::new(sample.dim(), depth)?;
    sample.rows().map(|r| cell_of(r, depth)).collect()
}

/// Aggregates cell labels of all rows; coordinates must be on the copula
/// scale `[-1, 1]`.
pub fn count_cells(sample: &Sample, depth: usize) -> Result<CellCounts> {
    let shape = Shape::new(sample.dim(), depth)?;
    CellCounts::from_cells(shape, cells(sample, depth)?)
}
