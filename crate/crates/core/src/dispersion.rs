// SPDX-License-Identifier: MIT OR Apache-2.0

//! Sliding-window method-of-moments estimation of the negative binomial
//! dispersion φ.
//!
//! Over every window of the working size, compute `φ̂ = m̄² / (s² − m̄)` from
//! the sample mean and unbiased sample variance, then take the median across
//! window positions. A non-positive median (common in zero-heavy data, where
//! `s² ≤ m̄` windows dominate) triggers a doubling of the window size; when
//! doubling exhausts the series the estimator gives up and recommends the
//! Poisson model (the φ → ∞ limit) instead of inventing a value.
//!
//! Windows where `s² = m̄` exactly make the estimator undefined (`0/0` or
//! `±∞`); those windows still count as evaluated but are excluded from the
//! median ordering.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::CountSeries;

/// Default first window size.
pub const DEFAULT_INITIAL_WINDOW: usize = 15;

/// Outcome of [`estimate_dispersion`].
///
/// `phi_hat` is `None` exactly when `fallback_applied` is set: the window
/// doubling ran past the series length without ever producing a positive
/// median, so the data look Poisson-or-less dispersed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DispersionEstimate<S> {
    pub phi_hat: Option<S>,
    /// Window size the result refers to (the last size actually evaluated).
    pub window_used: usize,
    /// Number of window positions at that size: `n − window_used + 1`.
    pub windows_evaluated: usize,
    pub fallback_applied: bool,
}

/// Estimate φ with the default initial window of 15.
pub fn estimate_dispersion<S: Scalar>(series: &CountSeries<S>) -> Result<DispersionEstimate<S>> {
    estimate_dispersion_with(series, DEFAULT_INITIAL_WINDOW)
}

/// Estimate φ starting from the given window size.
pub fn estimate_dispersion_with<S: Scalar>(
    series: &CountSeries<S>,
    initial_window: usize,
) -> Result<DispersionEstimate<S>> {
    if initial_window < 2 {
        return Err(Error::InvalidParameter(format!(
            "initial window must be at least 2, got {initial_window}"
        )));
    }
    series.validate_counts()?;
    let n = series.len();
    if n < initial_window {
        return Err(Error::SeriesTooShort {
            len: n,
            min: initial_window,
        });
    }
    let values = series.values();
    if values.iter().all(|&v| v == values[0]) {
        return Err(Error::ConstantSeries);
    }

    // Prefix sums make each window O(1).
    let mut sum = Vec::with_capacity(n + 1);
    let mut sum_sq = Vec::with_capacity(n + 1);
    sum.push(S::zero());
    sum_sq.push(S::zero());
    for &v in values {
        sum.push(*sum.last().unwrap() + v);
        sum_sq.push(*sum_sq.last().unwrap() + v * v);
    }

    let mut window = initial_window;
    loop {
        let positions = n - window + 1;
        let w = S::of(window as f64);
        let mut estimates: Vec<S> = Vec::with_capacity(positions);
        for start in 0..positions {
            let s1 = sum[start + window] - sum[start];
            let s2 = sum_sq[start + window] - sum_sq[start];
            let mean = s1 / w;
            let var = (s2 - s1 * mean) / (w - S::one());
            let est = mean * mean / (var - mean);
            if est.is_finite() {
                estimates.push(est);
            }
        }
        let med = median(&mut estimates);
        match med {
            Some(m) if m > S::zero() => {
                return Ok(DispersionEstimate {
                    phi_hat: Some(m),
                    window_used: window,
                    windows_evaluated: positions,
                    fallback_applied: false,
                });
            }
            _ => {
                // non-positive (or everywhere-undefined) median: double up
                let next = window * 2;
                if next > n {
                    return Ok(DispersionEstimate {
                        phi_hat: None,
                        window_used: window,
                        windows_evaluated: positions,
                        fallback_applied: true,
                    });
                }
                window = next;
            }
        }
    }
}

fn median<S: Scalar>(values: &mut [S]) -> Option<S> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite estimates"));
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        Some(values[mid])
    } else {
        Some((values[mid - 1] + values[mid]) / S::of(2.0))
    }
}
