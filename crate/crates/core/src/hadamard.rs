//! Binary interactions and symmetry statistics.
//!
//! An interaction `Λ ∈ {0,1}^{p×D}` is stored as a mask using the same bit
//! layout as [`CellIndex`]. Its value on a cell is
//! `A_Λ = Π (ʲA_d)^{Λ_jd} = (-1)^{popcount(Λ & !cell)}`, so the all-ones cell
//! is `+1` for every `Λ`.
//!
//! The symmetry statistic `S_Λ = Σ_cells A_Λ(cell)·count[cell]` is computed for
//! every `Λ` at once by a Walsh–Hadamard butterfly. The plain butterfly yields
//! `Σ (-1)^{popcount(Λ & cell)} count[cell]`, which differs from `S_Λ` by the
//! row sign `(-1)^{popcount(Λ)}`.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expansion::{CellCounts, CellIndex, Shape};

/// A binary interaction `Λ`, encoded as a bitmask. Mask 0 is `A_∅ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InteractionIndex(pub u64);

impl InteractionIndex {
    #[inline]
    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn is_trivial(self) -> bool {
        self.0 == 0
    }

    /// `Λ_{jd}` with 0-based `j` and `d`.
    pub fn bit(self, shape: Shape, j: usize, d: usize) -> bool {
        self.0 >> shape.bit(j, d) & 1 == 1
    }

    /// The `p×D` 0/1 matrix, one row per dimension.
    pub fn matrix(self, shape: Shape) -> Vec<Vec<u8>> {
        (0..shape.p)
            .map(|j| {
                (0..shape.depth)
                    .map(|d| self.bit(shape, j, d) as u8)
                    .collect()
            })
            .collect()
    }

    /// Matrix rows as strings such as `["000", "110", "100"]`.
    pub fn render(self, shape: Shape) -> Vec<String> {
        self.matrix(shape)
            .into_iter()
            .map(|row| row.into_iter().map(|b| char::from(b'0' + b)).collect())
            .collect()
    }

    /// Whether `Λ` touches bits of more than one dimension.
    pub fn is_cross(self, shape: Shape) -> bool {
        (0..shape.p)
            .filter(|&j| self.0 & shape.dim_mask(j) != 0)
            .count()
            > 1
    }
}

impl fmt::Display for InteractionIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Λ#{}", self.0)
    }
}

/// `A_Λ` evaluated on `cell`.
#[inline]
pub fn walsh_value(lambda: InteractionIndex, cell: CellIndex) -> i8 {
    if (lambda.0 & !cell.0).count_ones() & 1 == 0 {
        1
    } else {
        -1
    }
}

/// `Σ_i A_Λ(cell_i)`, one term per observation.
pub fn naive_symmetry(lambda: InteractionIndex, cells: &[CellIndex]) -> i64 {
    cells.iter().map(|&c| walsh_value(lambda, c) as i64).sum()
}

/// In-place unnormalized Walsh–Hadamard butterfly with the `A_Λ` sign
/// convention: `out[Λ] = Σ_c (-1)^{popcount(Λ & !c)} in[c]`.
pub fn signed_walsh<T>(data: &mut [T]) -> Result<()>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Neg<Output = T>,
{
    butterfly(data)?;
    for (mask, v) in data.iter_mut().enumerate() {
        if mask.count_ones() & 1 == 1 {
            *v = -*v;
        }
    }
    Ok(())
}

/// Transpose of [`signed_walsh`]: `out[c] = Σ_Λ (-1)^{popcount(Λ & !c)} in[Λ]`.
/// Composed with the forward transform it multiplies by the length.
pub fn signed_walsh_transpose<T>(data: &mut [T]) -> Result<()>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Neg<Output = T>,
{
    check_len(data.len())?;
    for (mask, v) in data.iter_mut().enumerate() {
        if mask.count_ones() & 1 == 1 {
            *v = -*v;
        }
    }
    butterfly(data)
}

fn check_len(len: usize) -> Result<()> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::Shape(format!(
            "transform length {len} is not a power of two"
        )));
    }
    Ok(())
}

fn butterfly<T>(data: &mut [T]) -> Result<()>
where
    T: Copy + Add<Output = T> + Sub<Output = T>,
{
    check_len(data.len())?;
    let n = data.len();
    let mut half = 1;
    while half < n {
        for block in data.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        half *= 2;
    }
    Ok(())
}

/// Every symmetry statistic `S_Λ`, trivial entry included, indexed by mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetryTable {
    shape: Shape,
    sums: Vec<i64>,
}

impl SymmetryTable {
    pub fn from_slice(shape: Shape, counts: &[u64]) -> Result<Self> {
        check_len(counts.len())?;
        if counts.len() != shape.cells() {
            return Err(Error::Shape(format!(
                "{} counts for a shape with {} cells",
                counts.len(),
                shape.cells()
            )));
        }
        let mut sums: Vec<i64> = counts.iter().map(|&c| c as i64).collect();
        signed_walsh(&mut sums)?;
        Ok(Self { shape, sums })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// Sample size, equal to `S_∅`.
    pub fn n(&self) -> i64 {
        self.sums[0]
    }

    pub fn sums(&self) -> &[i64] {
        &self.sums
    }

    pub fn get(&self, lambda: InteractionIndex) -> Option<i64> {
        self.sums.get(lambda.0 as usize).copied()
    }

    /// Sum-scale statistics restricted to `set`, in the set's order.
    pub fn select(&self, set: &InteractionSet) -> Result<SymmetryVector> {
        let values = self.gather(set)?.into_iter().map(|s| s as f64).collect();
        Ok(SymmetryVector {
            n: self.n() as u64,
            members: set.members.clone(),
            values,
            scale: Scale::Sum,
        })
    }

    /// Mean-scale statistics `S̄_Λ = S_Λ / n` restricted to `set`.
    pub fn select_means(&self, set: &InteractionSet) -> Result<SymmetryVector> {
        Ok(self.select(set)?.to_means())
    }

    /// Raw sums for `set`, without building a vector.
    pub fn gather(&self, set: &InteractionSet) -> Result<Vec<i64>> {
        set.members
            .iter()
            .map(|m| {
                self.get(*m).ok_or(Error::Index {
                    index: m.0,
                    len: self.sums.len() as u64,
                })
            })
            .collect()
    }
}

/// All symmetry statistics of a count vector, in `O(pD·2^(pD))` integer
/// operations.
pub fn fwht_symmetry(counts: &CellCounts) -> SymmetryTable {
    SymmetryTable::from_slice(counts.shape(), counts.counts())
        .expect("CellCounts length always matches its shape")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    /// `S_Λ`
    Sum,
    /// `S̄_Λ = S_Λ / n`
    Mean,
}

/// Symmetry statistics over an ordered list of interactions.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryVector {
    pub n: u64,
    pub members: Vec<InteractionIndex>,
    pub values: Vec<f64>,
    pub scale: Scale,
}

impl SymmetryVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn to_means(&self) -> SymmetryVector {
        match self.scale {
            Scale::Mean => self.clone(),
            Scale::Sum => {
                let n = self.n as f64;
                SymmetryVector {
                    values: self.values.iter().map(|v| v / n).collect(),
                    scale: Scale::Mean,
                    ..self.clone()
                }
            }
        }
    }

    pub fn to_sums(&self) -> SymmetryVector {
        match self.scale {
            Scale::Sum => self.clone(),
            Scale::Mean => {
                let n = self.n as f64;
                SymmetryVector {
                    values: self.values.iter().map(|v| v * n).collect(),
                    scale: Scale::Sum,
                    ..self.clone()
                }
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (InteractionIndex, f64)> + '_ {
        self.members
            .iter()
            .copied()
            .zip(self.values.iter().copied())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SetKind {
    /// All nontrivial interactions.
    Unif,
    /// `p = 2`: one nonzero row block per variable.
    Cross2,
    /// `p = 3`: nonzero over the first two variables jointly and the third.
    JointCross3,
    /// `p = 2`: exactly one bit in each row.
    Spearman,
    Custom,
}

impl SetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SetKind::Unif => "unif",
            SetKind::Cross2 => "cross2",
            SetKind::JointCross3 => "jointcross3",
            SetKind::Spearman => "spearman",
            SetKind::Custom => "custom",
        }
    }
}

impl fmt::Display for SetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An ordered collection of interactions over a fixed shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionSet {
    pub kind: SetKind,
    pub shape: Shape,
    pub members: Vec<InteractionIndex>,
}

impl InteractionSet {
    /// Every nontrivial `Λ`, `2^(pD) - 1` members in mask order.
    pub fn unif(shape: Shape) -> Self {
        Self {
            kind: SetKind::Unif,
            shape,
            members: (1..shape.cells() as u64).map(InteractionIndex).collect(),
        }
    }

    /// Interactions that are nonzero both on the first `p_x` dimensions and
    /// on the remaining `p_y` dimensions: `(2^{p_x D} - 1)(2^{p_y D} - 1)`
    /// members in mask order.
    pub fn cross(p_x: usize, p_y: usize, depth: usize) -> Result<Self> {
        if p_x == 0 || p_y == 0 {
            return Err(Error::Config(
                "both variable groups need at least one dimension".into(),
            ));
        }
        let shape = Shape::new(p_x + p_y, depth)?;
        let x_bits = p_x * depth;
        let mut members =
            Vec::with_capacity(((1usize << x_bits) - 1) * ((1usize << (p_y * depth)) - 1));
        for hi in 1..1u64 << (p_y * depth) {
            for lo in 1..1u64 << x_bits {
                members.push(InteractionIndex(lo | hi << x_bits));
            }
        }
        let kind = match (p_x, p_y) {
            (1, 1) => SetKind::Cross2,
            (2, 1) => SetKind::JointCross3,
            _ => SetKind::Custom,
        };
        Ok(Self {
            kind,
            shape,
            members,
        })
    }

    pub fn cross2(depth: usize) -> Result<Self> {
        Self::cross(1, 1, depth)
    }

    pub fn jointcross3(depth: usize) -> Result<Self> {
        Self::cross(2, 1, depth)
    }

    /// The `D²` interactions `¹A_{d1}·²A_{d2}`, in mask order.
    pub fn spearman(depth: usize) -> Result<Self> {
        let shape = Shape::new(2, depth)?;
        let mut members = Vec::with_capacity(depth * depth);
        for d2 in 0..depth {
            for d1 in 0..depth {
                members.push(InteractionIndex(
                    1 << shape.bit(0, d1) | 1 << shape.bit(1, d2),
                ));
            }
        }
        Ok(Self {
            kind: SetKind::Spearman,
            shape,
            members,
        })
    }

    /// Caller-chosen members, kept in the given order.
    pub fn custom(shape: Shape, members: Vec<InteractionIndex>) -> Result<Self> {
        if let Some(bad) = members.iter().find(|m| m.0 >= shape.cells() as u64) {
            return Err(Error::Index {
                index: bad.0,
                len: shape.cells() as u64,
            });
        }
        Ok(Self {
            kind: SetKind::Custom,
            shape,
            members,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}
