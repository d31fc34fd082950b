//! The adaptive symmetry test.
//!
//! Given full-sample mean symmetry statistics `S̄` and their average `S̄*`
//! over `m` subsamples of size `r`, the statistic is
//!
//! ```text
//! B_λ = T(S̄, λ)ᵀ T(S̄*, λ) / ‖T(S̄, λ)‖₂,     T(x, λ) = sign(x)(|x| - λ)₊
//! ```
//!
//! and `B_λ = 0` when `T(S̄, λ)` vanishes. Large values reject. P-values come
//! from a simulated null distribution with the add-one convention
//! `(1 + #{null ≥ B}) / (N + 1)`.

mod cache;
mod null;
mod oracle;
mod report;
mod subsample;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classic::{self, QuadraticTestSpec};
use crate::error::{Error, Result};
use crate::expansion::{count_cells, empirical_copula, Sample, Shape};
use crate::hadamard::{fwht_symmetry, InteractionSet, SymmetryTable};

pub use cache::{CacheStatus, NullCache, CACHE_ENV};
pub use null::{simulate_null, NullDistribution, NullFingerprint};
pub use oracle::{oracle_statistic, oracle_weights};
pub use report::{run_test, run_test_with_null, top_interactions, InteractionSummary, TestResult};
pub use subsample::{most_frequent_interaction, subsample_means, subsample_vectors};

/// Threshold for the soft-thresholding step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lambda {
    /// `√(pD ln 2 / (8n))`, resolved once `n` is known.
    Auto,
    Fixed(f64),
}

/// How each subsample is mapped to cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubsampleMode {
    /// Fresh empirical copula inside every subsample.
    Rerank,
    /// Reuse the full-sample cell of each row (known-marginals setting).
    FixedCells,
}

impl SubsampleMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SubsampleMode::Rerank => "rerank",
            SubsampleMode::FixedCells => "fixed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeastConfig {
    pub set: InteractionSet,
    pub lambda: Lambda,
    /// Number of subsamples.
    pub m: usize,
    /// Subsample size.
    pub r: usize,
    pub null_sims: usize,
    pub seed: u64,
    pub mode: SubsampleMode,
    /// Number of interactions listed in a report.
    pub top: usize,
}

impl BeastConfig {
    /// Defaults: `m = 128`, `r = 24`, automatic `λ`, 2000 null draws.
    pub fn new(set: InteractionSet) -> Self {
        Self {
            set,
            lambda: Lambda::Auto,
            m: 128,
            r: 24,
            null_sims: 2000,
            seed: 0,
            mode: SubsampleMode::Rerank,
            top: 5,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_lambda(mut self, lambda: Lambda) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_subsamples(mut self, m: usize, r: usize) -> Self {
        self.m = m;
        self.r = r;
        self
    }

    pub fn with_null_sims(mut self, null_sims: usize) -> Self {
        self.null_sims = null_sims;
        self
    }

    pub fn with_mode(mut self, mode: SubsampleMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn shape(&self) -> Shape {
        self.set.shape
    }

    pub fn depth(&self) -> usize {
        self.set.shape.depth
    }

    pub fn lambda_for(&self, n: usize) -> f64 {
        match self.lambda {
            Lambda::Auto => auto_lambda(n, self.shape().p, self.depth()),
            Lambda::Fixed(v) => v,
        }
    }

    /// Checks the parts of the configuration that depend on the data size.
    /// Subsample parameters only matter for [`Statistic::Beast`].
    pub fn validate(&self, n: usize, p: usize, stat: &Statistic) -> Result<()> {
        if p != self.shape().p {
            return Err(Error::Data(format!(
                "sample has {p} columns but the interaction set expects {}",
                self.shape().p
            )));
        }
        if matches!(stat, Statistic::Beast) {
            if self.m == 0 {
                return Err(Error::Config("need at least one subsample".into()));
            }
            if self.r == 0 || self.r > n {
                return Err(Error::Data(format!(
                    "subsample size {} not in [1, n = {n}]",
                    self.r
                )));
            }
        }
        if self.null_sims == 0 {
            return Err(Error::Config("need at least one null draw".into()));
        }
        if let Lambda::Fixed(v) = self.lambda {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("invalid lambda {v}")));
            }
        }
        Ok(())
    }
}

/// Test statistic, with any data it needs beyond the configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum Statistic {
    Beast,
    /// Projection onto fixed weights aligned with the configured set.
    Oracle(Vec<f64>),
    /// `(1/n) Σ S_Λ²` over the configured set.
    Chi2,
    /// `max |S̄_Λ|` over the configured set.
    MaxBet,
    /// `(r_Dᵀ S)² / n`; needs `p = 2`.
    SpearmanQ,
}

impl Statistic {
    pub fn method(&self) -> Method {
        match self {
            Statistic::Beast => Method::Beast,
            Statistic::Oracle(_) => Method::Oracle,
            Statistic::Chi2 => Method::Chi2,
            Statistic::MaxBet => Method::MaxBet,
            Statistic::SpearmanQ => Method::Spearman,
        }
    }
}

/// User-facing name of a statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Beast,
    Oracle,
    Chi2,
    MaxBet,
    Spearman,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Beast,
        Method::Oracle,
        Method::Chi2,
        Method::MaxBet,
        Method::Spearman,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Beast => "beast",
            Method::Oracle => "oracle",
            Method::Chi2 => "chi2",
            Method::MaxBet => "maxbet",
            Method::Spearman => "spearman",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown method '{s}', expected one of beast, oracle, chi2, maxbet, spearman"
                ))
            })
    }
}

/// `sign(x)(|x| - λ)₊` componentwise.
pub fn soft_threshold(x: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::Domain(format!(
            "threshold must be >= 0, got {lambda}"
        )));
    }
    Ok(x.iter()
        .map(|&v| {
            let shrunk = v.abs() - lambda;
            if shrunk > 0.0 {
                shrunk.copysign(v)
            } else {
                0.0
            }
        })
        .collect())
}

/// `√(p·D·ln 2 / (8n))`.
pub fn auto_lambda(n: usize, p: usize, depth: usize) -> f64 {
    ((p * depth) as f64 * std::f64::consts::LN_2 / (8.0 * n as f64)).sqrt()
}

/// `B_λ` from full-sample and subsample-averaged mean symmetry statistics.
pub fn beast_statistic(s_full: &[f64], s_sub: &[f64], lambda: f64) -> Result<f64> {
    if s_full.len() != s_sub.len() {
        return Err(Error::Shape(format!(
            "full vector has {} entries, subsample vector {}",
            s_full.len(),
            s_sub.len()
        )));
    }
    let a = soft_threshold(s_full, lambda)?;
    let b = soft_threshold(s_sub, lambda)?;
    let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Ok(0.0);
    }
    Ok(a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>() / norm)
}

/// Symmetry table of the empirical copula of `sample`.
pub(crate) fn copula_table(sample: &Sample, depth: usize, seed: u64) -> Result<SymmetryTable> {
    let u = empirical_copula(sample, seed);
    Ok(fwht_symmetry(&count_cells(&u, depth)?))
}

/// Runs the whole pipeline on one dataset. `seed` drives tie-breaking and
/// subsampling.
pub(crate) fn evaluate(
    sample: &Sample,
    cfg: &BeastConfig,
    stat: &Statistic,
    seed: u64,
) -> Result<(f64, SymmetryTable)> {
    let n = sample.n();
    let table = copula_table(sample, cfg.depth(), seed)?;
    let value = match stat {
        Statistic::Beast => {
            let full = table.select_means(&cfg.set)?;
            let sub = subsample::subsample_means_seeded(sample, cfg, seed)?;
            beast_statistic(&full.values, &sub.values, cfg.lambda_for(n))?
        }
        Statistic::Oracle(w) => {
            let full = table.select_means(&cfg.set)?;
            oracle_statistic(w, &full.values)?
        }
        Statistic::Chi2 => QuadraticTestSpec::chi2(cfg.set.clone()).evaluate(&table)?,
        Statistic::MaxBet => classic::max_bet_stat(&table.select_means(&cfg.set)?)?.0,
        Statistic::SpearmanQ => {
            if cfg.shape().p != 2 {
                return Err(Error::Config(
                    "the Spearman statistic needs exactly two variables".into(),
                ));
            }
            QuadraticTestSpec::spearman(cfg.depth())?.evaluate(&table)?
        }
    };
    Ok((value, table))
}
