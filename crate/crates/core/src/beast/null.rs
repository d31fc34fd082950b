use rand::Rng as _;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::{evaluate, BeastConfig, Statistic};
use crate::error::{Error, Result};
use crate::expansion::Sample;
use crate::rng::{self, TAG_NULL};

/// Everything a simulated null distribution depends on.
///
/// Parameters that do not affect a statistic (λ, `m`, `r`, subsample mode
/// for the non-subsampling statistics) are normalized away so equivalent
/// requests share one fingerprint.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NullFingerprint {
    pub n: usize,
    pub p: usize,
    pub depth: usize,
    pub set_kind: String,
    /// SHA-256 of the set's member masks, in order.
    pub set_digest: String,
    pub statistic: String,
    /// SHA-256 of the oracle weights, bit-exact.
    pub weights_digest: Option<String>,
    pub lambda_bits: Option<u64>,
    pub m: usize,
    pub r: usize,
    pub mode: String,
    pub null_sims: usize,
    pub seed: u64,
}

fn digest_u64s(values: impl Iterator<Item = u64>) -> String {
    let mut h = Sha256::new();
    for v in values {
        h.update(v.to_le_bytes());
    }
    hex::encode(&h.finalize()[..16])
}

impl NullFingerprint {
    pub fn new(cfg: &BeastConfig, n: usize, stat: &Statistic) -> Self {
        let is_beast = matches!(stat, Statistic::Beast);
        Self {
            n,
            p: cfg.shape().p,
            depth: cfg.depth(),
            set_kind: cfg.set.kind.to_string(),
            set_digest: digest_u64s(cfg.set.members.iter().map(|m| m.0)),
            statistic: stat.method().to_string(),
            weights_digest: match stat {
                Statistic::Oracle(w) => Some(digest_u64s(w.iter().map(|v| v.to_bits()))),
                _ => None,
            },
            lambda_bits: is_beast.then(|| cfg.lambda_for(n).to_bits()),
            m: if is_beast { cfg.m } else { 0 },
            r: if is_beast { cfg.r } else { 0 },
            mode: if is_beast { cfg.mode.as_str() } else { "-" }.to_string(),
            null_sims: cfg.null_sims,
            seed: cfg.seed,
        }
    }

    /// Canonical single-line rendering; equal keys mean equal fingerprints.
    pub fn key(&self) -> String {
        format!(
            "n={} p={} depth={} set={}:{} stat={} weights={} lambda={} m={} r={} mode={} sims={} seed={}",
            self.n,
            self.p,
            self.depth,
            self.set_kind,
            self.set_digest,
            self.statistic,
            self.weights_digest.as_deref().unwrap_or("-"),
            self.lambda_bits
                .map_or_else(|| "-".to_string(), |b| format!("{b:016x}")),
            self.m,
            self.r,
            self.mode,
            self.null_sims,
            self.seed,
        )
    }

    /// Short content hash of [`key`](Self::key), used for file names.
    pub fn digest(&self) -> String {
        hex::encode(&Sha256::digest(self.key().as_bytes())[..12])
    }
}

/// Sorted Monte Carlo draws of a statistic under independence.
#[derive(Debug, Clone, PartialEq)]
pub struct NullDistribution {
    pub fingerprint: NullFingerprint,
    values: Vec<f64>,
}

impl NullDistribution {
    /// Sorts `values`; the count must match the fingerprint.
    pub fn new(fingerprint: NullFingerprint, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != fingerprint.null_sims {
            return Err(Error::Data(format!(
                "{} null values for a fingerprint of {} draws",
                values.len(),
                fingerprint.null_sims
            )));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::Data("null values contain NaN".into()));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self {
            fingerprint,
            values,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(1 + #{null ≥ statistic}) / (N + 1)`.
    pub fn p_value(&self, statistic: f64) -> f64 {
        let below = self.values.partition_point(|&v| v < statistic);
        let at_or_above = self.values.len() - below;
        (1 + at_or_above) as f64 / (self.values.len() + 1) as f64
    }

    /// Empirical upper quantile: the smallest value with at most a
    /// fraction `alpha` of draws strictly above it.
    pub fn critical_value(&self, alpha: f64) -> f64 {
        let n = self.values.len();
        let k = ((1.0 - alpha) * n as f64).ceil() as usize;
        self.values[k.clamp(1, n) - 1]
    }
}

/// One null dataset: `n` i.i.d. uniform rows of dimension `p`.
pub(crate) fn null_dataset(n: usize, p: usize, seed: u64) -> Sample {
    let mut r = rng::stream(seed, &[TAG_NULL]);
    let data = (0..n * p).map(|_| r.random::<f64>()).collect();
    Sample::from_flat(n, p, data).expect("uniform draws are finite")
}

/// Simulates `cfg.null_sims` independent replicates of `stat` on uniform
/// data through the full pipeline. Replicate `i` uses a stream derived from
/// `(cfg.seed, i)`, so the result does not depend on the thread count.
pub fn simulate_null(cfg: &BeastConfig, n: usize, stat: &Statistic) -> Result<NullDistribution> {
    let p = cfg.shape().p;
    cfg.validate(n, p, stat)?;
    if let Statistic::Oracle(w) = stat {
        if w.len() != cfg.set.len() {
            return Err(Error::Shape(format!(
                "{} oracle weights for {} interactions",
                w.len(),
                cfg.set.len()
            )));
        }
    }
    let values = (0..cfg.null_sims)
        .into_par_iter()
        .map(|i| {
            let seed = rng::derive_seed(cfg.seed, &[TAG_NULL, i as u64]);
            evaluate(&null_dataset(n, p, seed), cfg, stat, seed).map(|(v, _)| v)
        })
        .collect::<Result<Vec<f64>>>()?;
    NullDistribution::new(NullFingerprint::new(cfg, n, stat), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beast::Lambda;
    use crate::hadamard::InteractionSet;

    fn fingerprint(sims: usize) -> NullFingerprint {
        let cfg = BeastConfig::new(InteractionSet::cross2(1).unwrap()).with_null_sims(sims);
        NullFingerprint::new(&cfg, 10, &Statistic::Chi2)
    }

    #[test]
    fn p_value_add_one() {
        let null = NullDistribution::new(fingerprint(4), vec![3.0, 1.0, 2.0, 2.0]).unwrap();
        assert_eq!(null.values(), &[1.0, 2.0, 2.0, 3.0]);
        assert_eq!(null.p_value(0.5), 1.0);
        assert_eq!(null.p_value(2.0), 4.0 / 5.0);
        assert_eq!(null.p_value(2.5), 2.0 / 5.0);
        assert_eq!(null.p_value(10.0), 1.0 / 5.0);
    }

    #[test]
    fn p_value_extremes_at_scale() {
        let values: Vec<f64> = (0..10_000).map(|i| i as f64).collect();
        let null = NullDistribution::new(fingerprint(10_000), values).unwrap();
        assert_eq!(null.p_value(1e9), 1.0 / 10_001.0);
        assert_eq!(null.p_value(-1.0), 1.0);
    }

    #[test]
    fn count_must_match() {
        assert!(NullDistribution::new(fingerprint(3), vec![1.0]).is_err());
    }

    #[test]
    fn fingerprint_normalizes_unused_parameters() {
        let base = BeastConfig::new(InteractionSet::cross2(2).unwrap());
        let other = base
            .clone()
            .with_lambda(Lambda::Fixed(0.3))
            .with_subsamples(7, 5);
        assert_eq!(
            NullFingerprint::new(&base, 50, &Statistic::Chi2),
            NullFingerprint::new(&other, 50, &Statistic::Chi2)
        );
        assert_ne!(
            NullFingerprint::new(&base, 50, &Statistic::Beast),
            NullFingerprint::new(&other, 50, &Statistic::Beast)
        );
        let w1 = Statistic::Oracle(vec![0.5; 9]);
        let w2 = Statistic::Oracle(vec![0.25; 9]);
        assert_ne!(
            NullFingerprint::new(&base, 50, &w1).key(),
            NullFingerprint::new(&base, 50, &w2).key()
        );
    }

    #[test]
    fn simulation_is_deterministic_and_sorted() {
        let cfg = BeastConfig::new(InteractionSet::cross2(2).unwrap())
            .with_subsamples(8, 12)
            .with_null_sims(60)
            .with_seed(17);
        let a = simulate_null(&cfg, 40, &Statistic::Beast).unwrap();
        let b = simulate_null(&cfg, 40, &Statistic::Beast).unwrap();
        assert_eq!(a, b);
        assert!(a.values().windows(2).all(|w| w[0] <= w[1]));
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let c = pool
            .install(|| simulate_null(&cfg, 40, &Statistic::Beast))
            .unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn oracle_weights_must_align() {
        let cfg = BeastConfig::new(InteractionSet::cross2(2).unwrap()).with_null_sims(5);
        assert!(simulate_null(&cfg, 20, &Statistic::Oracle(vec![1.0; 3])).is_err());
    }
}
