//! First and second moments of binary interactions.
//!
//! With `H[Λ][c] = A_Λ(c)` the signed Walsh matrix, cell probabilities `p`
//! determine the interaction means `μ_c = H p` and second moments
//! `Σ_c = H diag(p) Hᵀ`. Because `A_a·A_b = A_{a⊕b}`, the second-moment matrix
//! is `Σ_c[a][b] = μ_c[a ⊕ b]`.
//!
//! The identity checks here use dense solves and are meant for `pD ≤ 12`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::expansion::{CellCounts, Shape};
use crate::hadamard::{fwht_symmetry, signed_walsh, signed_walsh_transpose};

/// Largest `p·D` accepted by the dense routines.
pub const MAX_DENSE_BITS: usize = 12;

const SUM_TOL: f64 = 1e-12;

/// Multinomial cell probabilities over the `2^(pD)` cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CellProbabilities {
    shape: Shape,
    probs: Vec<f64>,
}

impl CellProbabilities {
    pub fn new(shape: Shape, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != shape.cells() {
            return Err(Error::Shape(format!(
                "{} probabilities for {} cells",
                probs.len(),
                shape.cells()
            )));
        }
        if let Some(bad) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::Domain(format!("invalid probability {bad}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::Domain(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { shape, probs })
    }

    pub fn uniform(shape: Shape) -> Self {
        let k = shape.cells();
        Self {
            shape,
            probs: vec![1.0 / k as f64; k],
        }
    }

    /// Empirical proportions `p̂_c = count / n`.
    pub fn from_counts(counts: &CellCounts) -> Result<Self> {
        let n = counts.n();
        if n == 0 {
            return Err(Error::Data("no observations".into()));
        }
        let probs = counts
            .counts()
            .iter()
            .map(|&c| c as f64 / n as f64)
            .collect();
        Ok(Self {
            shape: counts.shape(),
            probs,
        })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    fn require_positive(&self) -> Result<()> {
        match self.probs.iter().position(|&p| p <= 0.0) {
            Some(c) => Err(Error::Singular(format!("cell {c} has zero probability"))),
            None => Ok(()),
        }
    }
}

/// `μ_c` and `Σ_c` for a set of cell probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentPair {
    pub shape: Shape,
    pub mu_c: Vec<f64>,
    pub sigma_c: DMatrix<f64>,
    positive: bool,
}

impl MomentPair {
    /// `μ_𝓛`: the means without the trivial entry.
    pub fn mu_l(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.mu_c[1..])
    }

    /// `Σ_𝓛`: second moments without the trivial row and column.
    pub fn sigma_l(&self) -> DMatrix<f64> {
        let k = self.mu_c.len();
        self.sigma_c.view((1, 1), (k - 1, k - 1)).into_owned()
    }

    fn require_positive(&self) -> Result<()> {
        if self.positive {
            Ok(())
        } else {
            Err(Error::Singular(
                "second-moment matrix is singular when a cell has zero probability".into(),
            ))
        }
    }
}

fn xor_matrix(v: &[f64]) -> DMatrix<f64> {
    let k = v.len();
    DMatrix::from_fn(k, k, |a, b| v[a ^ b])
}

pub fn moments_from_probs(probs: &CellProbabilities) -> Result<MomentPair> {
    if probs.shape.bits() > MAX_DENSE_BITS {
        return Err(Error::Domain(format!(
            "dense moments need p*D <= {MAX_DENSE_BITS}"
        )));
    }
    let mut mu_c = probs.probs.clone();
    signed_walsh(&mut mu_c)?;
    let sigma_c = xor_matrix(&mu_c);
    Ok(MomentPair {
        shape: probs.shape,
        mu_c,
        sigma_c,
        positive: probs.require_positive().is_ok(),
    })
}

/// Inverse of the mean equation: `p = 2^{-pD} Hᵀ μ_c`.
pub fn probs_from_means(shape: Shape, mu_c: &[f64]) -> Result<Vec<f64>> {
    let mut p = mu_c.to_vec();
    signed_walsh_transpose(&mut p)?;
    let k = shape.cells() as f64;
    Ok(p.into_iter().map(|v| v / k).collect())
}

fn solve_spd(m: DMatrix<f64>, rhs: &DVector<f64>, what: &str) -> Result<DVector<f64>> {
    if let Some(ch) = m.clone().cholesky() {
        return Ok(ch.solve(rhs));
    }
    m.lu()
        .solve(rhs)
        .ok_or_else(|| Error::Singular(format!("{what} is not invertible")))
}

/// `|μ_cᵀ Σ_c⁻¹ μ_c - 1|`.
pub fn identity_a_residual(mp: &MomentPair) -> Result<f64> {
    mp.require_positive()?;
    let mu = DVector::from_column_slice(&mp.mu_c);
    let x = solve_spd(mp.sigma_c.clone(), &mu, "Σ_c")?;
    Ok((mu.dot(&x) - 1.0).abs())
}

/// The three sides of the harmonic-mean / Hotelling identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicHotelling {
    /// `2^{-2pD} Σ_c p_c⁻¹`
    pub harmonic_lhs: f64,
    /// `1 + μ_𝓛ᵀ (Σ_𝓛 - μ_𝓛 μ_𝓛ᵀ)⁻¹ μ_𝓛`
    pub hotelling_mid: f64,
    /// `(1 - μ_𝓛ᵀ Σ_𝓛⁻¹ μ_𝓛)⁻¹`
    pub inverse_rhs: f64,
}

impl HarmonicHotelling {
    pub fn max_spread(&self) -> f64 {
        let v = [self.harmonic_lhs, self.hotelling_mid, self.inverse_rhs];
        let hi = v.iter().copied().fold(f64::MIN, f64::max);
        let lo = v.iter().copied().fold(f64::MAX, f64::min);
        hi - lo
    }
}

/// The harmonic sum runs over all `2^(pD)` cell probabilities.
pub fn identity_b_values(mp: &MomentPair, probs: &CellProbabilities) -> Result<HarmonicHotelling> {
    probs.require_positive()?;
    if probs.shape != mp.shape {
        return Err(Error::Shape(
            "moments and probabilities disagree in shape".into(),
        ));
    }
    let k = mp.shape.cells() as f64;
    let harmonic_lhs = probs.probs.iter().map(|p| p.recip()).sum::<f64>() / (k * k);
    let mu = mp.mu_l();
    let sigma = mp.sigma_l();
    let cov = &sigma - &mu * mu.transpose();
    let hotelling_mid = 1.0 + mu.dot(&solve_spd(cov, &mu, "Σ_𝓛 - μμᵀ")?);
    let inverse_rhs = (1.0 - mu.dot(&solve_spd(sigma, &mu, "Σ_𝓛")?)).recip();
    Ok(HarmonicHotelling {
        harmonic_lhs,
        hotelling_mid,
        inverse_rhs,
    })
}

/// Checks `‖μ‖² - c‖μ‖³ ≤ μᵀ Σ_𝓛 μ ≤ ‖μ‖² + c‖μ‖³` with
/// `c = (2^{pD} - 2)/√(2^{pD} - 1)`. Returns [`Error::NotApplicable`] when
/// `‖μ_𝓛‖ > (2^{pD} - 1)^{-1/2}`.
pub fn identity_c_check(mp: &MomentPair) -> Result<bool> {
    let k = mp.shape.cells() as f64;
    let mu = mp.mu_l();
    let norm = mu.norm();
    let bound = (k - 1.0).sqrt().recip();
    if norm > bound {
        return Err(Error::NotApplicable(format!(
            "‖μ‖ = {norm} exceeds {bound}"
        )));
    }
    let c = (k - 2.0) / (k - 1.0).sqrt();
    let q = mu.dot(&(mp.sigma_l() * &mu));
    let (n2, n3) = (norm * norm, norm.powi(3));
    Ok(q >= n2 - c * n3 - 1e-12 && q <= n2 + c * n3 + 1e-12)
}

/// `‖(Σ_𝓛 - μμᵀ)⁻¹ μ - μ‖ / ‖μ‖`, which vanishes as `μ_𝓛 → 0`.
pub fn identity_d_gap(mp: &MomentPair) -> Result<f64> {
    let mu = mp.mu_l();
    let norm = mu.norm();
    if norm == 0.0 {
        return Err(Error::NotApplicable("μ_𝓛 is zero".into()));
    }
    mp.require_positive()?;
    let cov = mp.sigma_l() - &mu * mu.transpose();
    let g = solve_spd(cov, &mu, "Σ_𝓛 - μμᵀ")?;
    Ok((g - &mu).norm() / norm)
}

/// Covariance of one subsample's mean symmetry vector (size `r`, drawn
/// without replacement), over all nontrivial interactions:
/// `(n-r)/(r(n-1)) · (H diag(p̂) Hᵀ - S̄ S̄ᵀ)` with the trivial row and column
/// dropped.
pub fn subsample_covariance(counts: &CellCounts, r: u64) -> Result<DMatrix<f64>> {
    let n = counts.n();
    if r == 0 || r > n {
        return Err(Error::Domain(format!("subsample size {r} not in [1, {n}]")));
    }
    let table = fwht_symmetry(counts);
    let means: Vec<f64> = table.sums().iter().map(|&s| s as f64 / n as f64).collect();
    let k = means.len();
    let factor = if r == n {
        0.0
    } else {
        (n - r) as f64 / (r as f64 * (n - 1) as f64)
    };
    Ok(DMatrix::from_fn(k - 1, k - 1, |a, b| {
        let (a, b) = (a + 1, b + 1);
        factor * (means[a ^ b] - means[a] * means[b])
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::CellIndex;
    use crate::hadamard::{walsh_value, InteractionIndex};
    use crate::rng;
    use rand::Rng as _;

    fn shape(p: usize, d: usize) -> Shape {
        Shape::new(p, d).unwrap()
    }

    fn probs(p: usize, d: usize, v: &[f64]) -> CellProbabilities {
        CellProbabilities::new(shape(p, d), v.to_vec()).unwrap()
    }

    fn random_positive(s: Shape, seed: u64) -> CellProbabilities {
        let mut r = rng::stream(seed, &[]);
        let raw: Vec<f64> = (0..s.cells()).map(|_| r.random::<f64>() + 0.05).collect();
        let total: f64 = raw.iter().sum();
        CellProbabilities::new(s, raw.iter().map(|v| v / total).collect()).unwrap()
    }

    /// Explicit `H`, built entry by entry from the sign definition.
    fn dense_h(s: Shape) -> DMatrix<f64> {
        let k = s.cells();
        DMatrix::from_fn(k, k, |l, c| {
            walsh_value(InteractionIndex(l as u64), CellIndex(c as u64)) as f64
        })
    }

    #[test]
    fn validation() {
        assert!(CellProbabilities::new(shape(1, 1), vec![0.5, 0.6]).is_err());
        assert!(CellProbabilities::new(shape(1, 1), vec![-0.1, 1.1]).is_err());
        assert!(CellProbabilities::new(shape(1, 1), vec![1.0]).is_err());
    }

    #[test]
    fn mean_examples() {
        let mp = moments_from_probs(&CellProbabilities::uniform(shape(2, 2))).unwrap();
        assert!((mp.mu_c[0] - 1.0).abs() < 1e-15);
        assert!(mp.mu_c[1..].iter().all(|v| v.abs() < 1e-15));

        let mp = moments_from_probs(&probs(1, 1, &[0.3, 0.7])).unwrap();
        assert!((mp.mu_c[1] - 0.4).abs() < 1e-15);
        assert!((mp.sigma_c[(0, 1)] - 0.4).abs() < 1e-15);
        assert!((mp.sigma_c[(1, 1)] - 1.0).abs() < 1e-15);

        let s = shape(2, 2);
        let mut point = vec![0.0; 16];
        point[15] = 1.0;
        let mp = moments_from_probs(&CellProbabilities::new(s, point).unwrap()).unwrap();
        assert!(mp.mu_c.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn sigma_matches_dense_product_and_inverse_round_trips() {
        for (p, d) in [(1, 2), (2, 1), (2, 2), (1, 3), (3, 1)] {
            let s = shape(p, d);
            let pr = random_positive(s, (p * 10 + d) as u64);
            let mp = moments_from_probs(&pr).unwrap();
            let h = dense_h(s);
            let pv = DVector::from_column_slice(pr.probs());
            let mu_dense = &h * &pv;
            let sigma_dense = &h * DMatrix::from_diagonal(&pv) * h.transpose();
            for i in 0..s.cells() {
                assert!((mu_dense[i] - mp.mu_c[i]).abs() < 1e-12);
                assert!((mp.sigma_c[(i, i)] - 1.0).abs() < 1e-12);
            }
            assert!((sigma_dense - &mp.sigma_c).amax() < 1e-12);
            let back = probs_from_means(s, &mp.mu_c).unwrap();
            for (a, b) in back.iter().zip(pr.probs()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn identity_a_examples() {
        let mp = moments_from_probs(&probs(1, 1, &[0.3, 0.7])).unwrap();
        assert!(identity_a_residual(&mp).unwrap() < 1e-12);
        let mp = moments_from_probs(&CellProbabilities::uniform(shape(2, 2))).unwrap();
        assert!(identity_a_residual(&mp).unwrap() < 1e-15);
        let mp = moments_from_probs(&random_positive(shape(2, 2), 3)).unwrap();
        assert!(identity_a_residual(&mp).unwrap() < 1e-8);
        let mp = moments_from_probs(&probs(1, 1, &[0.0, 1.0])).unwrap();
        assert!(matches!(identity_a_residual(&mp), Err(Error::Singular(_))));
    }

    #[test]
    fn identity_b_examples() {
        let pr = probs(1, 1, &[0.3, 0.7]);
        let v = identity_b_values(&moments_from_probs(&pr).unwrap(), &pr).unwrap();
        let expected: f64 = 0.25 * (1.0 / 0.3 + 1.0 / 0.7);
        assert!((expected - (1.0 + 0.16 / 0.84)).abs() < 1e-14);
        for x in [v.harmonic_lhs, v.hotelling_mid, v.inverse_rhs] {
            assert!((x - expected).abs() < 1e-12, "{x}");
        }
        let pr = CellProbabilities::uniform(shape(1, 3));
        let v = identity_b_values(&moments_from_probs(&pr).unwrap(), &pr).unwrap();
        assert!((v.harmonic_lhs - 1.0).abs() < 1e-14 && v.max_spread() < 1e-14);
        let pr = random_positive(shape(1, 2), 8);
        let v = identity_b_values(&moments_from_probs(&pr).unwrap(), &pr).unwrap();
        assert!(v.max_spread() < 1e-8);
    }

    #[test]
    fn identity_c_examples() {
        let mp = moments_from_probs(&CellProbabilities::uniform(shape(1, 2))).unwrap();
        assert!(identity_c_check(&mp).unwrap());
        let mp = moments_from_probs(&probs(1, 2, &[0.251, 0.249, 0.2505, 0.2495])).unwrap();
        assert!(identity_c_check(&mp).unwrap());
        let mp = moments_from_probs(&probs(1, 1, &[0.3, 0.7])).unwrap();
        assert!(identity_c_check(&mp).unwrap());
        let mp = moments_from_probs(&probs(1, 2, &[0.7, 0.1, 0.1, 0.1])).unwrap();
        assert!(matches!(
            identity_c_check(&mp),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn identity_d_examples() {
        let mp = moments_from_probs(&probs(1, 1, &[0.3, 0.7])).unwrap();
        let g = 0.4 / (1.0 - 0.16);
        assert!((identity_d_gap(&mp).unwrap() - (g - 0.4) / 0.4).abs() < 1e-12);
        let mp = moments_from_probs(&CellProbabilities::uniform(shape(1, 2))).unwrap();
        assert!(matches!(identity_d_gap(&mp), Err(Error::NotApplicable(_))));

        let v = [1.0, -0.5, 0.25, -0.75];
        let ratio = |eps: f64| {
            let p: Vec<f64> = v.iter().map(|x| 0.25 + eps * x).collect();
            identity_d_gap(&moments_from_probs(&probs(1, 2, &p)).unwrap()).unwrap()
        };
        assert!(ratio(1e-2) < 0.05);
        assert!(ratio(1e-4) < 5e-4);
    }

    #[test]
    fn subsample_covariance_examples() {
        let counts = CellCounts::new(shape(1, 1), vec![4, 4]).unwrap();
        let c = subsample_covariance(&counts, 4).unwrap();
        assert!((c[(0, 0)] - 1.0 / 7.0).abs() < 1e-15);
        assert!(subsample_covariance(&counts, 8)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
        assert!(subsample_covariance(&counts, 0).is_err());
        assert!(subsample_covariance(&counts, 9).is_err());

        let counts = CellCounts::new(shape(2, 1), vec![4, 0, 0, 4]).unwrap();
        let c = subsample_covariance(&counts, 4).unwrap();
        // Order: ¹A₁, ²A₁, cross.
        assert_eq!(c[(2, 2)], 0.0);
        assert!((c[(0, 0)] - 4.0 / 28.0).abs() < 1e-15);
    }
}
