use serde::{Deserialize, Serialize};

use super::{
    evaluate, simulate_null, BeastConfig, Method, NullDistribution, NullFingerprint, Statistic,
};
use crate::error::{Error, Result};
use crate::expansion::Sample;
use crate::hadamard::{InteractionIndex, InteractionSet, SymmetryTable};

/// One interaction in a report, with the region counts it induces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionSummary {
    pub mask: u64,
    /// `p` rows of `D` characters; `1` marks a selected bit.
    pub matrix: Vec<String>,
    pub symmetry: i64,
    /// `S / √n`.
    pub z: f64,
    /// Observations with `A_Λ = +1`, i.e. `(n + S) / 2`.
    pub white: u64,
    /// Observations with `A_Λ = −1`, i.e. `(n − S) / 2`.
    pub blue: u64,
}

impl InteractionSummary {
    pub fn new(table: &SymmetryTable, lambda: InteractionIndex) -> Result<Self> {
        let symmetry = table.get(lambda).ok_or(Error::Index {
            index: lambda.0,
            len: table.sums().len() as u64,
        })?;
        Ok(Self::from_symmetry(table, lambda, symmetry))
    }

    fn from_symmetry(table: &SymmetryTable, lambda: InteractionIndex, symmetry: i64) -> Self {
        let n = table.n();
        Self {
            mask: lambda.0,
            matrix: lambda.render(table.shape()),
            symmetry,
            z: symmetry as f64 / (n as f64).sqrt(),
            white: ((n + symmetry) / 2) as u64,
            blue: ((n - symmetry) / 2) as u64,
        }
    }
}

/// The `k` members of `set` with the largest `|S_Λ|`; ties go to the
/// smaller mask.
pub fn top_interactions(
    table: &SymmetryTable,
    set: &InteractionSet,
    k: usize,
) -> Result<Vec<InteractionSummary>> {
    let sums = table.gather(set)?;
    let mut order: Vec<(i64, InteractionIndex)> =
        sums.into_iter().zip(set.members.iter().copied()).collect();
    order.sort_by(|a, b| b.0.abs().cmp(&a.0.abs()).then(a.1.cmp(&b.1)));
    Ok(order
        .into_iter()
        .take(k)
        .map(|(s, m)| InteractionSummary::from_symmetry(table, m, s))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub method: Method,
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
    pub p: usize,
    pub depth: usize,
    pub set_kind: String,
    pub set_size: usize,
    /// Resolved threshold; only present for the adaptive statistic.
    pub lambda: Option<f64>,
    pub m: Option<usize>,
    pub r: Option<usize>,
    pub null_sims: usize,
    pub seed: u64,
    pub top_interactions: Vec<InteractionSummary>,
}

/// Simulates the null for `(cfg, n, stat)` and tests `sample` against it.
pub fn run_test(sample: &Sample, cfg: &BeastConfig, stat: &Statistic) -> Result<TestResult> {
    cfg.validate(sample.n(), sample.dim(), stat)?;
    let null = simulate_null(cfg, sample.n(), stat)?;
    run_test_with_null(sample, cfg, stat, &null)
}

/// Tests `sample` against a precomputed null, which must carry exactly the
/// fingerprint of `(cfg, n, stat)`.
pub fn run_test_with_null(
    sample: &Sample,
    cfg: &BeastConfig,
    stat: &Statistic,
    null: &NullDistribution,
) -> Result<TestResult> {
    let n = sample.n();
    cfg.validate(n, sample.dim(), stat)?;
    if null.fingerprint != NullFingerprint::new(cfg, n, stat) {
        return Err(Error::Config(format!(
            "null distribution was built for [{}], not for this test",
            null.fingerprint.key()
        )));
    }
    let (statistic, table) = evaluate(sample, cfg, stat, cfg.seed)?;
    let is_beast = matches!(stat, Statistic::Beast);
    Ok(TestResult {
        method: stat.method(),
        statistic,
        p_value: null.p_value(statistic),
        n,
        p: sample.dim(),
        depth: cfg.depth(),
        set_kind: cfg.set.kind.to_string(),
        set_size: cfg.set.len(),
        lambda: is_beast.then(|| cfg.lambda_for(n)),
        m: is_beast.then_some(cfg.m),
        r: is_beast.then_some(cfg.r),
        null_sims: cfg.null_sims,
        seed: cfg.seed,
        top_interactions: top_interactions(&table, &cfg.set, cfg.top)?,
    })
}
