//! Parametric alternatives indexed by a noise level `κ ∈ [0, 1]`, and a
//! harness estimating the power of several statistics against them.
//!
//! Unless noted, `ε` is standard normal, `U ~ Unif[−1, 1]`,
//! `ϑ ~ Unif[−π, π]`, and all auxiliary variables are independent.
//!
//! | name | X | Y |
//! |---|---|---|
//! | `bivariate_normal` | `√(0.4−0.3κ)ε₁ + √(0.6+0.3κ)ε₂` | `√(0.4−0.3κ)ε₁ + √(0.6+0.3κ)ε₃` |
//! | `parabolic` | `U` | `0.25X² + (0.4κ+0.1)ε₄` |
//! | `circle` | `cos ϑ + (0.6κ+0.1)ε₅` | `sin ϑ + (0.6κ+0.1)ε₆` |
//! | `checkerboard` | `W + (0.3κ+0.05)ε₇` | `V₁·1(W=2) + V₂·1(W≠2) + (1.2κ+0.2)ε₈` |
//!
//! with `W` uniform on {1,2,3}, `V₁` on {2,4} and `V₂` on {1,3,5}. The
//! three-variable scenarios produce columns `(¹X, ²X, Y)`:
//!
//! | name | (¹X, ²X) | Y |
//! |---|---|---|
//! | `linear3` | `N₂(0, I)` | `0.4(1−κ)(¹X+²X) + h(κ)ε₁` |
//! | `sphere` | `(G₁, G₂)/‖G‖` | `G₃/‖G‖ + (0.7κ+0.3)ε₂` |
//! | `sine3` | `(U₁, U₂)`, `Uⱼ ~ Unif[0,1]` | `sin(4π(¹X+²X)) + (2κ+0.2)ε₃` |
//! | `double_helix` | `(R cos ϑ + c₀ε₄, R sin ϑ + c₀ε₅)` | `ϑ + c₀ε₆` |
//!
//! where `h(κ) = √(0.68 + 0.64κ − 0.32κ²)`, `G` is standard normal in ℝ³,
//! `R` is a random sign and `c₀ = 0.4κ + 0.5`.

mod power;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::expansion::Sample;
use crate::rng::{self, Rng};

pub use power::{estimate_power, PowerGrid, PowerRequest, PowerRow};

/// Draws one row at noise level `κ`.
pub type SamplerFn = dyn Fn(&mut Rng, f64) -> Vec<f64> + Send + Sync;

#[derive(Clone)]
pub enum ScenarioKind {
    BivariateNormal,
    Parabolic,
    Circle,
    Checkerboard,
    Linear3,
    Sphere,
    Sine3,
    DoubleHelix,
    /// `p` independent `Unif[0, 1]` variables; `κ` is ignored.
    Independence(usize),
    Custom {
        name: String,
        p: usize,
        sampler: Arc<SamplerFn>,
    },
}

const NAMES: &str = "bivariate_normal, parabolic, circle, checkerboard, linear3, sphere, \
                     sine3, double_helix, independence, independence3";

impl ScenarioKind {
    pub fn custom(
        name: impl Into<String>,
        p: usize,
        sampler: impl Fn(&mut Rng, f64) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        ScenarioKind::Custom {
            name: name.into(),
            p,
            sampler: Arc::new(sampler),
        }
    }

    pub fn name(&self) -> String {
        match self {
            ScenarioKind::BivariateNormal => "bivariate_normal".into(),
            ScenarioKind::Parabolic => "parabolic".into(),
            ScenarioKind::Circle => "circle".into(),
            ScenarioKind::Checkerboard => "checkerboard".into(),
            ScenarioKind::Linear3 => "linear3".into(),
            ScenarioKind::Sphere => "sphere".into(),
            ScenarioKind::Sine3 => "sine3".into(),
            ScenarioKind::DoubleHelix => "double_helix".into(),
            ScenarioKind::Independence(2) => "independence".into(),
            ScenarioKind::Independence(p) => format!("independence{p}"),
            ScenarioKind::Custom { name, .. } => name.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ScenarioKind::BivariateNormal
            | ScenarioKind::Parabolic
            | ScenarioKind::Circle
            | ScenarioKind::Checkerboard => 2,
            ScenarioKind::Linear3
            | ScenarioKind::Sphere
            | ScenarioKind::Sine3
            | ScenarioKind::DoubleHelix => 3,
            ScenarioKind::Independence(p) => *p,
            ScenarioKind::Custom { p, .. } => *p,
        }
    }

    fn draw(&self, r: &mut Rng, k: f64) -> Vec<f64> {
        match self {
            ScenarioKind::BivariateNormal => {
                let (e1, e2, e3) = (eps(r), eps(r), eps(r));
                let (a, b) = ((0.4 - 0.3 * k).sqrt(), (0.6 + 0.3 * k).sqrt());
                vec![a * e1 + b * e2, a * e1 + b * e3]
            }
            ScenarioKind::Parabolic => {
                let x = r.random_range(-1.0..1.0);
                vec![x, 0.25 * x * x + (0.4 * k + 0.1) * eps(r)]
            }
            ScenarioKind::Circle => {
                let t: f64 = r.random_range(-PI..PI);
                let s = 0.6 * k + 0.1;
                let (e5, e6) = (eps(r), eps(r));
                vec![t.cos() + s * e5, t.sin() + s * e6]
            }
            ScenarioKind::Checkerboard => {
                let w = r.random_range(1..=3);
                let v1 = [2.0, 4.0][r.random_range(0..2)];
                let v2 = [1.0, 3.0, 5.0][r.random_range(0..3)];
                let (e7, e8) = (eps(r), eps(r));
                let y = if w == 2 { v1 } else { v2 };
                vec![w as f64 + (0.3 * k + 0.05) * e7, y + (1.2 * k + 0.2) * e8]
            }
            ScenarioKind::Linear3 => {
                let (x1, x2, e1) = (eps(r), eps(r), eps(r));
                let h = (0.68 + 0.64 * k - 0.32 * k * k).sqrt();
                vec![x1, x2, 0.4 * (1.0 - k) * (x1 + x2) + h * e1]
            }
            ScenarioKind::Sphere => {
                let (g1, g2, g3, e2) = (eps(r), eps(r), eps(r), eps(r));
                let norm = (g1 * g1 + g2 * g2 + g3 * g3).sqrt();
                vec![g1 / norm, g2 / norm, g3 / norm + (0.7 * k + 0.3) * e2]
            }
            ScenarioKind::Sine3 => {
                let (u1, u2): (f64, f64) = (r.random(), r.random());
                let e3 = eps(r);
                vec![u1, u2, (4.0 * PI * (u1 + u2)).sin() + (2.0 * k + 0.2) * e3]
            }
            ScenarioKind::DoubleHelix => {
                let sign = if r.random::<bool>() { 1.0 } else { -1.0 };
                let t: f64 = r.random_range(-PI..PI);
                let c0 = 0.4 * k + 0.5;
                let (e4, e5, e6) = (eps(r), eps(r), eps(r));
                vec![
                    sign * t.cos() + c0 * e4,
                    sign * t.sin() + c0 * e5,
                    t + c0 * e6,
                ]
            }
            ScenarioKind::Independence(p) => (0..*p).map(|_| r.random()).collect(),
            ScenarioKind::Custom { sampler, .. } => sampler(r, k),
        }
    }
}

fn eps(r: &mut Rng) -> f64 {
    r.sample(StandardNormal)
}

impl fmt::Debug for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScenarioKind({}, p = {})", self.name(), self.dim())
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "bivariate_normal" => ScenarioKind::BivariateNormal,
            "parabolic" => ScenarioKind::Parabolic,
            "circle" => ScenarioKind::Circle,
            "checkerboard" => ScenarioKind::Checkerboard,
            "linear3" => ScenarioKind::Linear3,
            "sphere" => ScenarioKind::Sphere,
            "sine3" => ScenarioKind::Sine3,
            "double_helix" => ScenarioKind::DoubleHelix,
            "independence" => ScenarioKind::Independence(2),
            "independence3" => ScenarioKind::Independence(3),
            _ => {
                return Err(Error::Config(format!(
                    "unknown scenario '{s}', expected one of {NAMES}"
                )))
            }
        })
    }
}

/// A scenario at a fixed noise level.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub kappa: f64,
}

impl Scenario {
    pub fn new(kind: ScenarioKind, kappa: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&kappa) {
            return Err(Error::Domain(format!(
                "kappa must lie in [0, 1], got {kappa}"
            )));
        }
        if kind.dim() == 0 {
            return Err(Error::Config(
                "scenario must have at least one variable".into(),
            ));
        }
        Ok(Self { kind, kappa })
    }

    pub fn name(&self) -> String {
        self.kind.name()
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }
}

/// `n` i.i.d. rows from `s`, deterministic in `seed`.
pub fn sample_scenario(s: &Scenario, n: usize, seed: u64) -> Result<Sample> {
    if n == 0 {
        return Err(Error::Domain("need at least one row".into()));
    }
    let p = s.dim();
    let mut r = rng::stream(seed, &[]);
    let mut data = Vec::with_capacity(n * p);
    for _ in 0..n {
        let row = s.kind.draw(&mut r, s.kappa);
        if row.len() != p {
            return Err(Error::Shape(format!(
                "scenario {} produced a row of length {}, expected {p}",
                s.name(),
                row.len()
            )));
        }
        data.extend(row);
    }
    Sample::from_flat(n, p, data)
}
