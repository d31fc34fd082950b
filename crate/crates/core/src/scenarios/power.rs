use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sample_scenario, Scenario, ScenarioKind};
use crate::beast::{
    evaluate, oracle_weights, simulate_null, BeastConfig, Method, NullCache, NullDistribution,
    Statistic,
};
use crate::error::{Error, Result};
use crate::rng::{self, TAG_POWER};

#[derive(Debug, Clone)]
pub struct PowerRequest {
    pub scenario: ScenarioKind,
    pub kappas: Vec<f64>,
    pub replicates: usize,
    /// Level; a replicate rejects when its p-value is at most `alpha`.
    pub alpha: f64,
    pub n: usize,
    /// Master seed for the alternative datasets.
    pub seed: u64,
    /// Draws used to approximate the oracle weights.
    pub oracle_k: usize,
}

impl PowerRequest {
    /// 200 replicates of `n = 128` at level 0.1; `K = 10⁵` oracle draws.
    pub fn new(scenario: ScenarioKind, kappas: Vec<f64>) -> Self {
        Self {
            scenario,
            kappas,
            replicates: 200,
            alpha: 0.1,
            n: 128,
            seed: 0,
            oracle_k: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub scenario: String,
    pub kappa: f64,
    pub method: Method,
    pub n: usize,
    pub replicates: usize,
    pub power: f64,
    /// Binomial standard error `√(power(1 − power)/replicates)`.
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerGrid {
    pub alpha: f64,
    pub rows: Vec<PowerRow>,
}

impl PowerGrid {
    pub fn get(&self, kappa: f64, method: Method) -> Option<&PowerRow> {
        self.rows
            .iter()
            .find(|r| r.kappa == kappa && r.method == method)
    }

    /// Columns `scenario,kappa,method,n,replicates,power,se`; floats use
    /// shortest round-trip formatting.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)
                .map_err(|e| Error::Data(format!("csv: {e}")))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

fn null_for(
    cfg: &BeastConfig,
    n: usize,
    stat: &Statistic,
    cache: Option<&NullCache>,
) -> Result<NullDistribution> {
    match cache {
        Some(c) => c.get_or_simulate(cfg, n, stat).map(|(null, _)| null),
        None => simulate_null(cfg, n, stat),
    }
}

/// Empirical power of each method in `methods` at every `κ` of `req`.
///
/// Null distributions come from `cfg` (seeded by `cfg.seed`); the oracle
/// null is rebuilt for every `κ` since its weights change. All methods see
/// the same alternative datasets, replicate `i` at the `j`-th `κ` being
/// seeded from `(req.seed, j, i)`.
pub fn estimate_power(
    req: &PowerRequest,
    methods: &[Method],
    cfg: &BeastConfig,
    cache: Option<&NullCache>,
) -> Result<PowerGrid> {
    let p = req.scenario.dim();
    if p != cfg.shape().p {
        return Err(Error::Config(format!(
            "scenario {} has {p} variables but the interaction set expects {}",
            req.scenario.name(),
            cfg.shape().p
        )));
    }
    if !(req.alpha > 0.0 && req.alpha < 1.0) {
        return Err(Error::Config(format!(
            "level must lie in (0, 1), got {}",
            req.alpha
        )));
    }
    if req.replicates == 0 || methods.is_empty() {
        return Err(Error::Config(
            "need at least one replicate and one method".into(),
        ));
    }

    let mut fixed: Vec<Option<(Statistic, NullDistribution)>> = Vec::with_capacity(methods.len());
    for m in methods {
        let stat = match m {
            Method::Oracle => {
                fixed.push(None);
                continue;
            }
            Method::Beast => Statistic::Beast,
            Method::Chi2 => Statistic::Chi2,
            Method::MaxBet => Statistic::MaxBet,
            Method::Spearman => Statistic::SpearmanQ,
        };
        let null = null_for(cfg, req.n, &stat, cache)?;
        fixed.push(Some((stat, null)));
    }

    let mut rows = Vec::with_capacity(req.kappas.len() * methods.len());
    for (ki, &kappa) in req.kappas.iter().enumerate() {
        let scenario = Scenario::new(req.scenario.clone(), kappa)?;
        let tests: Vec<(Statistic, NullDistribution)> = fixed
            .iter()
            .map(|f| match f {
                Some(pair) => Ok(pair.clone()),
                None => {
                    let w = oracle_weights(&scenario, req.oracle_k, cfg)?;
                    let stat = Statistic::Oracle(w.values);
                    let null = null_for(cfg, req.n, &stat, cache)?;
                    Ok((stat, null))
                }
            })
            .collect::<Result<_>>()?;

        let rejections = (0..req.replicates)
            .into_par_iter()
            .map(|i| {
                let seed = rng::derive_seed(req.seed, &[TAG_POWER, ki as u64, i as u64]);
                let sample = sample_scenario(&scenario, req.n, seed)?;
                tests
                    .iter()
                    .map(|(stat, null)| {
                        let (v, _) = evaluate(&sample, cfg, stat, seed)?;
                        Ok(null.p_value(v) <= req.alpha)
                    })
                    .collect::<Result<Vec<bool>>>()
            })
            .collect::<Result<Vec<Vec<bool>>>>()?;

        for (mi, &method) in methods.iter().enumerate() {
            let hits = rejections.iter().filter(|r| r[mi]).count();
            let power = hits as f64 / req.replicates as f64;
            rows.push(PowerRow {
                scenario: req.scenario.name(),
                kappa,
                method,
                n: req.n,
                replicates: req.replicates,
                power,
                se: (power * (1.0 - power) / req.replicates as f64).sqrt(),
            });
        }
    }
    Ok(PowerGrid {
        alpha: req.alpha,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hadamard::InteractionSet;

    fn cfg() -> BeastConfig {
        BeastConfig::new(InteractionSet::cross2(2).unwrap())
            .with_subsamples(16, 16)
            .with_null_sims(200)
            .with_seed(3)
    }

    #[test]
    fn csv_shape_and_determinism() {
        let mut req = PowerRequest::new(ScenarioKind::Circle, vec![0.0, 0.5, 1.0]);
        req.replicates = 20;
        req.n = 48;
        req.oracle_k = 2000;
        let methods = [Method::Beast, Method::Chi2, Method::Oracle];
        let grid = estimate_power(&req, &methods, &cfg(), None).unwrap();
        assert_eq!(grid.rows.len(), 9);
        let csv = grid.to_csv().unwrap();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "scenario,kappa,method,n,replicates,power,se"
        );
        assert_eq!(lines.count(), 9);
        let again = estimate_power(&req, &methods, &cfg(), None).unwrap();
        assert_eq!(csv, again.to_csv().unwrap());
        for r in &grid.rows {
            assert!((0.0..=1.0).contains(&r.power));
            assert!((r.se - (r.power * (1.0 - r.power) / 20.0).sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn comonotone_power_is_one() {
        let kind = ScenarioKind::custom("comonotone", 2, |r, _| {
            let u: f64 = rand::Rng::random(r);
            vec![u, u.exp()]
        });
        let mut req = PowerRequest::new(kind, vec![0.0]);
        req.replicates = 20;
        req.oracle_k = 1000;
        let cfg = BeastConfig::new(InteractionSet::cross2(3).unwrap()).with_null_sims(200);
        let grid = estimate_power(&req, &[Method::Beast, Method::Oracle], &cfg, None).unwrap();
        assert!(grid.rows.iter().all(|r| r.power == 1.0));
    }

    #[test]
    fn dimension_mismatch() {
        let req = PowerRequest::new(ScenarioKind::Sphere, vec![0.5]);
        assert!(matches!(
            estimate_power(&req, &[Method::Chi2], &cfg(), None),
            Err(Error::Config(_))
        ));
    }
}
