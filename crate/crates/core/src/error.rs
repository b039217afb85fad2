// SPDX-License-Identifier: MIT OR Apache-2.0

//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("segment bounds [{i}, {j}) out of range for series of length {n} (need 1 <= i < j <= n+1)")]
    SegmentOutOfRange { i: usize, j: usize, n: usize },

    #[error("count family requires non-negative integer values; found {value} at position {index}")]
    NonIntegerCount { index: usize, value: f64 },

    #[error("series too short: length {len}, need at least {min}")]
    SeriesTooShort { len: usize, min: usize },

    #[error("series length mismatch: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },

    #[error("segment count K={k} out of range for series of length {n} (need 1 <= K <= n)")]
    SegmentCountOutOfRange { k: usize, n: usize },

    #[error("change-point index k={k} out of range (need 1 <= k <= K-1 with K={big_k})")]
    ChangePointIndexOutOfRange { k: usize, big_k: usize },

    #[error("constant series: variance is zero in every window, dispersion undefined (data are Poisson-or-less dispersed)")]
    ConstantSeries,

    #[error("partition enumeration too large: C({n_minus_1}, {k_minus_1}) = {count} exceeds cap {cap}")]
    EnumerationCapExceeded {
        n_minus_1: usize,
        k_minus_1: usize,
        count: u128,
        cap: u128,
    },

    #[error("degenerate coincidence prior q0 = {q0}: the common-change-point event space is trivial for this configuration")]
    DegeneratePrior { q0: f64 },

    #[error("numerical inconsistency: {0}")]
    NumericalInconsistency(String),

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
