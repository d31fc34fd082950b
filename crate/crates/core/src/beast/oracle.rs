use super::{copula_table, BeastConfig};
use crate::error::{Error, Result};
use crate::hadamard::SymmetryVector;
use crate::rng::{self, TAG_ORACLE};
use crate::scenarios::{sample_scenario, Scenario};

/// Approximate interaction means `μ̃ = S̃ / K` over `cfg.set`, from `k` draws
/// of `scenario` taken to the copula scale.
pub fn oracle_weights(scenario: &Scenario, k: usize, cfg: &BeastConfig) -> Result<SymmetryVector> {
    if k == 0 {
        return Err(Error::Domain("oracle weights need K >= 1 draws".into()));
    }
    if scenario.dim() != cfg.shape().p {
        return Err(Error::Config(format!(
            "scenario {} has {} variables but the interaction set expects {}",
            scenario.name(),
            scenario.dim(),
            cfg.shape().p
        )));
    }
    let seed = rng::derive_seed(cfg.seed, &[TAG_ORACLE]);
    let draws = sample_scenario(scenario, k, seed)?;
    copula_table(&draws, cfg.depth(), seed)?.select_means(&cfg.set)
}

/// `μ̃ᵀ S̄ / ‖μ̃‖₂`.
pub fn oracle_statistic(mu: &[f64], s_full: &[f64]) -> Result<f64> {
    if mu.len() != s_full.len() {
        return Err(Error::Shape(format!(
            "{} oracle weights for {} symmetry statistics",
            mu.len(),
            s_full.len()
        )));
    }
    let norm = mu.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::Domain("oracle weights have zero norm".into()));
    }
    Ok(mu.iter().zip(s_full).map(|(a, b)| a * b).sum::<f64>() / norm)
}
