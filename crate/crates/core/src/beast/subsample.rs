use std::collections::BTreeMap;

use rand::seq::index;

use super::{copula_table, BeastConfig, SubsampleMode};
use crate::error::{Error, Result};
use crate::expansion::{cells, empirical_copula, CellCounts, Sample};
use crate::hadamard::{fwht_symmetry, InteractionIndex, Scale, SymmetryVector};
use crate::rng::{self, TAG_SUBSAMPLE};

/// Calls `f(k, sums)` with the raw symmetry sums over `cfg.set` of each of
/// the `m` subsamples. Subsample `k` depends only on `(seed, k)`.
fn for_each_subsample(
    sample: &Sample,
    cfg: &BeastConfig,
    seed: u64,
    mut f: impl FnMut(usize, &[i64]),
) -> Result<()> {
    let n = sample.n();
    if cfg.r == 0 || cfg.r > n {
        return Err(Error::Domain(format!(
            "subsample size {} not in [1, n = {n}]",
            cfg.r
        )));
    }
    if sample.dim() != cfg.shape().p {
        return Err(Error::Data(format!(
            "sample has {} columns, expected {}",
            sample.dim(),
            cfg.shape().p
        )));
    }
    let depth = cfg.depth();
    let fixed = match cfg.mode {
        SubsampleMode::FixedCells => Some(cells(&empirical_copula(sample, seed), depth)?),
        SubsampleMode::Rerank => None,
    };
    for k in 0..cfg.m {
        let mut r = rng::stream(seed, &[TAG_SUBSAMPLE, k as u64]);
        let rows = index::sample(&mut r, n, cfg.r).into_vec();
        let table = match &fixed {
            Some(all) => fwht_symmetry(&CellCounts::from_cells(
                cfg.shape(),
                rows.iter().map(|&i| all[i]),
            )?),
            None => {
                let sub = sample.select_rows(&rows);
                copula_table(
                    &sub,
                    depth,
                    rng::derive_seed(seed, &[TAG_SUBSAMPLE, k as u64]),
                )?
            }
        };
        f(k, &table.gather(&cfg.set)?);
    }
    Ok(())
}

pub(crate) fn subsample_means_seeded(
    sample: &Sample,
    cfg: &BeastConfig,
    seed: u64,
) -> Result<SymmetryVector> {
    let mut acc = vec![0i64; cfg.set.len()];
    for_each_subsample(sample, cfg, seed, |_, sums| {
        for (a, s) in acc.iter_mut().zip(sums) {
            *a += s;
        }
    })?;
    let denom = (cfg.m * cfg.r) as f64;
    Ok(SymmetryVector {
        n: cfg.r as u64,
        members: cfg.set.members.clone(),
        values: acc.into_iter().map(|s| s as f64 / denom).collect(),
        scale: Scale::Mean,
    })
}

/// `S̄* = m⁻¹ Σ_k S̄*_k` over `cfg.set`, from `m` subsamples of `r` rows drawn
/// without replacement.
pub fn subsample_means(sample: &Sample, cfg: &BeastConfig) -> Result<SymmetryVector> {
    subsample_means_seeded(sample, cfg, cfg.seed)
}

/// The individual `S̄*_k`, one vector per subsample.
pub fn subsample_vectors(sample: &Sample, cfg: &BeastConfig) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(cfg.m);
    let r = cfg.r as f64;
    for_each_subsample(sample, cfg, cfg.seed, |_, sums| {
        out.push(sums.iter().map(|&s| s as f64 / r).collect());
    })?;
    Ok(out)
}

/// Modal per-subsample argmax of `|S̄_Λ|` and its relative frequency.
///
/// Ties within a subsample and between modes go to the smaller mask.
pub fn most_frequent_interaction(
    sample: &Sample,
    cfg: &BeastConfig,
) -> Result<(InteractionIndex, f64)> {
    if cfg.set.is_empty() {
        return Err(Error::Config("interaction set is empty".into()));
    }
    let mut tally: BTreeMap<InteractionIndex, usize> = BTreeMap::new();
    let members = &cfg.set.members;
    for_each_subsample(sample, cfg, cfg.seed, |_, sums| {
        let mut best = 0;
        for i in 1..sums.len() {
            let (a, b) = (sums[i].abs(), sums[best].abs());
            if a > b || (a == b && members[i] < members[best]) {
                best = i;
            }
        }
        *tally.entry(members[best]).or_default() += 1;
    })?;
    // Mask order plus a strict comparison keeps the smallest modal mask.
    let (idx, count) = tally
        .into_iter()
        .fold(
            None,
            |best: Option<(InteractionIndex, usize)>, (k, c)| match best {
                Some((_, bc)) if bc >= c => best,
                _ => Some((k, c)),
            },
        )
        .expect("at least one subsample");
    Ok((idx, count as f64 / cfg.m as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beast::copula_table;
    use crate::hadamard::InteractionSet;
    use rand::Rng as _;

    fn random_sample(n: usize, p: usize, seed: u64) -> Sample {
        let mut r = rng::stream(seed, &[]);
        Sample::from_flat(n, p, (0..n * p).map(|_| r.random::<f64>()).collect()).unwrap()
    }

    fn comonotone(n: usize) -> Sample {
        let x: Vec<f64> = (0..n).map(|i| ((i * 13) % n) as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        Sample::from_columns(&[x, y]).unwrap()
    }

    #[test]
    fn full_subsample_equals_full_sample() {
        let s = random_sample(40, 2, 1);
        let cfg = BeastConfig::new(InteractionSet::cross2(2).unwrap())
            .with_subsamples(1, 40)
            .with_seed(3);
        let sub = subsample_means(&s, &cfg).unwrap();
        let full = copula_table(&s, 2, 3)
            .unwrap()
            .select_means(&cfg.set)
            .unwrap();
        assert_eq!(sub.values, full.values);
    }

    #[test]
    fn comonotone_cross_entry_saturates() {
        let s = comonotone(8);
        for (m, r) in [(1, 2), (5, 3), (10, 8)] {
            let cfg = BeastConfig::new(InteractionSet::cross2(1).unwrap()).with_subsamples(m, r);
            assert_eq!(subsample_means(&s, &cfg).unwrap().values, vec![1.0]);
        }
    }

    #[test]
    fn deterministic() {
        let s = random_sample(50, 3, 2);
        let cfg = BeastConfig::new(InteractionSet::jointcross3(2).unwrap())
            .with_subsamples(20, 10)
            .with_seed(99);
        assert_eq!(
            subsample_means(&s, &cfg).unwrap(),
            subsample_means(&s, &cfg).unwrap()
        );
        let other = cfg.clone().with_seed(100);
        assert_ne!(
            subsample_means(&s, &cfg).unwrap(),
            subsample_means(&s, &other).unwrap()
        );
    }

    #[test]
    fn rejects_oversized_subsample() {
        let s = random_sample(10, 2, 2);
        let cfg = BeastConfig::new(InteractionSet::cross2(1).unwrap()).with_subsamples(3, 11);
        assert!(matches!(subsample_means(&s, &cfg), Err(Error::Domain(_))));
    }

    #[test]
    fn modal_interaction() {
        let s = comonotone(64);
        let cfg = BeastConfig::new(InteractionSet::cross2(1).unwrap()).with_subsamples(30, 16);
        assert_eq!(
            most_frequent_interaction(&s, &cfg).unwrap(),
            (InteractionIndex(3), 1.0)
        );

        let s = random_sample(64, 2, 4);
        let cfg = BeastConfig::new(InteractionSet::cross2(3).unwrap()).with_subsamples(1, 24);
        let (idx, freq) = most_frequent_interaction(&s, &cfg).unwrap();
        assert_eq!(freq, 1.0);
        let v = &subsample_vectors(&s, &cfg).unwrap()[0];
        let best = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let pos = cfg.set.members.iter().position(|&m| m == idx).unwrap();
        assert_eq!(v[pos].abs(), best);
        assert!(v[..pos].iter().all(|x| x.abs() < best));

        let cfg = BeastConfig::new(InteractionSet::cross2(3).unwrap()).with_subsamples(40, 24);
        let (_, freq) = most_frequent_interaction(&s, &cfg).unwrap();
        assert!(freq > 0.0 && freq <= 1.0);
    }
}
