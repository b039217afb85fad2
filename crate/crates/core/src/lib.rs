// SPDX-License-Identifier: MIT OR Apache-2.0

//! Exact Bayesian change-point inference and cross-series comparison.
//!
//! Given a series segmented into a known number `K` of segments under a
//! conjugate-exponential-family emission model, this crate computes — exactly,
//! by dynamic programming over all partitions — the evidence `P(Y|K)`, the
//! posterior distribution of each change-point location, credibility
//! intervals, the posterior of the shift between change-points of two series,
//! and the posterior probability that designated change-points of several
//! independent series coincide (with its Bayes factor).
//!
//! Count emissions (negative binomial with known dispersion, Poisson) target
//! read-count profiles such as per-base RNA-Seq coverage; Gaussian emissions
//! (known variance, heteroscedastic) cover continuous signals.
//!
//! All positions are 1-based: a length-`n` series occupies `[1, n+1)` and a
//! change-point `τ_k = t` marks the first point of segment `k+1`.
//!
//! The math is generic over the floating-point scalar via [`Scalar`]; the
//! aliases below fix `f64`, which the documented tolerances assume.

#![forbid(unsafe_code)]

pub mod comparison;
pub mod dispersion;
pub mod emission;
pub mod error;
pub mod numeric;
pub mod oracle;
pub mod scalar;
pub mod segmentation;
pub mod series;
pub mod simulation;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Observed profile with `f64` storage.
pub type Series = series::CountSeries<f64>;
/// Emission model with `f64` parameters.
pub type Model = emission::EmissionModel<f64>;
/// Log segment-marginal matrix over `f64`.
pub type Matrix = segmentation::SegmentMatrix<f64>;
/// Forward/backward power tables over `f64`.
pub type Tables = segmentation::PowerTables<f64>;
/// Change-point posterior over `f64`.
pub type Posterior = segmentation::ChangePointPosterior<f64>;
/// Credibility interval over `f64`.
pub type Interval = segmentation::CredibleInterval<f64>;
/// Shift posterior over `f64`.
pub type Shift = comparison::ShiftDistribution<f64>;
/// Common-change-point comparison result over `f64`.
pub type Comparison = comparison::ComparisonResult<f64>;
