//! Binary-expansion statistics for nonparametric tests of independence and
//! uniformity.
//!
//! The pipeline runs raw samples through an empirical copula, discretizes
//! every coordinate by its depth-`D` dyadic expansion, and summarizes the
//! resulting multinomial cell counts by *symmetry statistics*
//! `S_Λ = Σ_i A_{Λ,i}`, one for every binary interaction `Λ`. All symmetry
//! statistics are produced at once by a signed fast Walsh–Hadamard transform.
//!
//! On top of that sit:
//!
//! * [`moments`]: the first/second moment equations relating cell
//!   probabilities to interaction means, with numerical identity checks;
//! * [`beauty`]: the binary-expansion approximation of characteristic
//!   functions;
//! * [`classic`]: χ², Spearman and Max BET statistics as quadratic forms;
//! * [`beast`]: the adaptive soft-thresholded subsampling statistic, the
//!   oracle projection, Monte Carlo null calibration and a disk cache;
//! * [`scenarios`]: alternative-distribution generators and a power harness.

pub mod beast;
pub mod beauty;
pub mod classic;
pub mod error;
pub mod expansion;
pub mod hadamard;
pub mod moments;
pub mod rng;
pub mod scenarios;

pub use beast::{
    BeastConfig, Lambda, Method, NullCache, NullDistribution, NullFingerprint, Statistic,
    SubsampleMode, TestResult,
};
pub use error::{Error, Result};
pub use expansion::{BitPattern, CellCounts, CellIndex, Sample, Shape};
pub use hadamard::{InteractionIndex, InteractionSet, SetKind, SymmetryTable, SymmetryVector};
pub use moments::{CellProbabilities, MomentPair};
pub use scenarios::{PowerGrid, PowerRequest, Scenario, ScenarioKind};
