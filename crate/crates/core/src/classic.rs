//! Classic statistics written as quadratic forms `(1/n) Sᵀ W S` of symmetry
//! statistics.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hadamard::{InteractionIndex, InteractionSet, SymmetryTable, SymmetryVector};

/// Weight matrix of a quadratic form over an interaction set.
#[derive(Debug, Clone, PartialEq)]
pub enum Weight {
    Identity,
    /// `W = r rᵀ`
    RankOne(Vec<f64>),
    Diagonal(Vec<f64>),
    /// Any caller-supplied symmetric matrix.
    Dense(DMatrix<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticTestSpec {
    pub set: InteractionSet,
    pub weight: Weight,
}

impl QuadraticTestSpec {
    pub fn new(set: InteractionSet, weight: Weight) -> Result<Self> {
        let k = set.len();
        let ok = match &weight {
            Weight::Identity => true,
            Weight::RankOne(v) | Weight::Diagonal(v) => v.len() == k,
            Weight::Dense(m) => m.nrows() == k && m.ncols() == k,
        };
        if !ok {
            return Err(Error::Shape(format!(
                "weight does not match a set of {k} interactions"
            )));
        }
        Ok(Self { set, weight })
    }

    /// χ² as a quadratic form: identity weight over `set`.
    pub fn chi2(set: InteractionSet) -> Self {
        Self {
            set,
            weight: Weight::Identity,
        }
    }

    /// Spearman's ρ projection: rank-one weight `r_D r_Dᵀ`.
    pub fn spearman(depth: usize) -> Result<Self> {
        Self::new(
            InteractionSet::spearman(depth)?,
            Weight::RankOne(spearman_weight(depth)),
        )
    }

    /// `(1/n) Sᵀ W S`.
    pub fn evaluate(&self, table: &SymmetryTable) -> Result<f64> {
        let n = table.n();
        if n <= 0 {
            return Err(Error::Domain("quadratic form needs n > 0".into()));
        }
        let s: Vec<f64> = table
            .gather(&self.set)?
            .into_iter()
            .map(|v| v as f64)
            .collect();
        let q = match &self.weight {
            Weight::Identity => s.iter().map(|v| v * v).sum(),
            Weight::RankOne(r) => {
                let dot: f64 = r.iter().zip(&s).map(|(a, b)| a * b).sum();
                dot * dot
            }
            Weight::Diagonal(w) => w.iter().zip(&s).map(|(w, v)| w * v * v).sum(),
            Weight::Dense(m) => {
                let v = nalgebra::DVector::from_vec(s);
                v.dot(&(m * &v))
            }
        };
        Ok(q / n as f64)
    }
}

fn check_n(n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    Ok(n as f64)
}

/// `Q_χ² = (1/n) Σ S_Λ²` over the (cross) set carried by `sym`.
pub fn chi2_stat(sym: &SymmetryVector, n: u64) -> Result<f64> {
    let n = check_n(n)?;
    Ok(sym.to_sums().values.iter().map(|s| s * s).sum::<f64>() / n)
}

/// `r_D` with entry `2^{-(d1+d2)}` for `¹A_{d1}·²A_{d2}`, aligned with
/// [`InteractionSet::spearman`].
pub fn spearman_weight(depth: usize) -> Vec<f64> {
    let mut r = Vec::with_capacity(depth * depth);
    for d2 in 1..=depth {
        for d1 in 1..=depth {
            r.push(((d1 + d2) as f64).exp2().recip());
        }
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpearmanProjection {
    /// `3 r_Dᵀ S̄`, the depth-`D` approximation of Spearman's ρ.
    pub rho: f64,
    /// `(r_Dᵀ S)² / n`
    pub q: f64,
}

pub fn spearman_proj(sym: &SymmetryVector, n: u64) -> Result<SpearmanProjection> {
    let nf = check_n(n)?;
    let depth = (sym.len() as f64).sqrt() as usize;
    if depth * depth != sym.len() || depth == 0 {
        return Err(Error::Shape(format!(
            "{} entries do not form a Spearman set",
            sym.len()
        )));
    }
    let r = spearman_weight(depth);
    let s = sym.to_sums();
    let dot: f64 = r.iter().zip(&s.values).map(|(a, b)| a * b).sum();
    Ok(SpearmanProjection {
        rho: 3.0 * dot / nf,
        q: dot * dot / nf,
    })
}

/// `max |S̄_Λ|` and the interaction attaining it (smallest mask on ties).
pub fn max_bet_stat(sym: &SymmetryVector) -> Result<(f64, InteractionIndex)> {
    let means = sym.to_means();
    means
        .iter()
        .map(|(m, v)| (v.abs(), m))
        .reduce(|best, cur| {
            if cur.0 > best.0 || (cur.0 == best.0 && cur.1 < best.1) {
                cur
            } else {
                best
            }
        })
        .ok_or_else(|| Error::Domain("Max BET needs a nonempty set".into()))
}
