//! Binary-expansion approximation of characteristic functions.
//!
//! For `U` on `[-1, 1]^p` and its depth-`D` truncation `U_D`,
//! `e^{i tᵀU_D} = Σ_Λ A_Λ Ψ_Λ(t)` with
//! `Ψ_Λ(t) = Π_{j,d} cos(ʲt/2^d)^{1-Λ_jd} (i sin(ʲt/2^d))^{Λ_jd}`, so the
//! characteristic function of `U_D` is `Σ_Λ Ψ_Λ(t) E[A_Λ]`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expansion::{CellIndex, Shape};
use crate::hadamard::{signed_walsh, InteractionIndex};
use crate::moments::CellProbabilities;

fn check_t(shape: Shape, t: &[f64]) -> Result<()> {
    if t.len() != shape.p {
        return Err(Error::Shape(format!(
            "frequency has {} coordinates, expected {}",
            t.len(),
            shape.p
        )));
    }
    if t.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("frequency must be finite".into()));
    }
    Ok(())
}

/// `Ψ_Λ(t)`.
pub fn psi(lambda: InteractionIndex, t: &[f64], shape: Shape) -> Result<Complex64> {
    check_t(shape, t)?;
    let mut acc = Complex64::new(1.0, 0.0);
    for (j, &tj) in t.iter().enumerate() {
        for d in 0..shape.depth {
            let x = tj / (1u64 << (d + 1)) as f64;
            acc *= if lambda.bit(shape, j, d) {
                Complex64::new(0.0, x.sin())
            } else {
                Complex64::new(x.cos(), 0.0)
            };
        }
    }
    Ok(acc)
}

/// `E[e^{i tᵀU_D}] = Σ_c p_c e^{i tᵀu_c}` with `u_c` the cell midpoints.
pub fn phi_approx(probs: &CellProbabilities, t: &[f64]) -> Result<Complex64> {
    let shape = probs.shape();
    check_t(shape, t)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (c, &pc) in probs.probs().iter().enumerate() {
        if pc == 0.0 {
            continue;
        }
        let mid = CellIndex(c as u64).midpoint(shape);
        let phase: f64 = mid.iter().zip(t).map(|(u, tj)| u * tj).sum();
        acc += pc * Complex64::from_polar(1.0, phase);
    }
    Ok(acc)
}

/// Same quantity through the interaction expansion `Σ_Λ Ψ_Λ(t) μ_c[Λ]`.
pub fn phi_approx_by_interactions(probs: &CellProbabilities, t: &[f64]) -> Result<Complex64> {
    let shape = probs.shape();
    check_t(shape, t)?;
    let mut mu = probs.probs().to_vec();
    signed_walsh(&mut mu)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (mask, &m) in mu.iter().enumerate() {
        acc += psi(InteractionIndex(mask as u64), t, shape)? * m;
    }
    Ok(acc)
}

/// `|e^{iax} - (cos x + i a sin x)|` for a sign `a`.
pub fn binary_euler_check(a: i8, x: f64) -> Result<f64> {
    if a != 1 && a != -1 {
        return Err(Error::Domain(format!("sign must be -1 or +1, got {a}")));
    }
    let a = a as f64;
    let lhs = Complex64::from_polar(1.0, a * x);
    let rhs = Complex64::new(x.cos(), a * x.sin());
    Ok((lhs - rhs).norm())
}
