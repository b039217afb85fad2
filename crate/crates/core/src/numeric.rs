// SPDX-License-Identifier: MIT OR Apache-2.0

//! Log-domain accumulation primitives.

use crate::scalar::Scalar;

/// Streaming log-sum-exp accumulator (max-shifted).
///
/// Keeps the running maximum `m` and the rescaled sum `r = Σ exp(xᵢ − m)`,
/// so terms spanning thousands of orders of magnitude accumulate without
/// underflow. Empty accumulators evaluate to −∞.
#[derive(Clone, Copy, Debug)]
pub struct LogSumExp<S> {
    max: S,
    sum: S,
}

impl<S: Scalar> Default for LogSumExp<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Scalar> LogSumExp<S> {
    #[inline]
    pub fn new() -> Self {
        Self {
            max: S::neg_infinity(),
            sum: S::zero(),
        }
    }

    /// Add a term given in log space.
    #[inline]
    pub fn push(&mut self, log_term: S) {
        if log_term == S::neg_infinity() {
            return;
        }
        if log_term <= self.max {
            self.sum = self.sum + (log_term - self.max).exp();
        } else {
            // New maximum: rescale the accumulated sum.
            self.sum = self.sum * (self.max - log_term).exp() + S::one();
            self.max = log_term;
        }
    }

    /// `log Σ exp(xᵢ)` over everything pushed so far.
    #[inline]
    pub fn value(&self) -> S {
        if self.max == S::neg_infinity() {
            S::neg_infinity()
        } else {
            self.max + self.sum.ln()
        }
    }
}

/// `log Σ exp(xᵢ)` over a slice, two-pass (max then sum).
pub fn log_sum_exp<S: Scalar>(terms: &[S]) -> S {
    let max = terms.iter().copied().fold(S::neg_infinity(), S::max);
    if max == S::neg_infinity() {
        return S::neg_infinity();
    }
    let sum: S = terms.iter().map(|&t| (t - max).exp()).sum();
    max + sum.ln()
}

/// `log(exp(a) + exp(b))`.
#[inline]
pub fn log_add_exp<S: Scalar>(a: S, b: S) -> S {
    if a == S::neg_infinity() {
        return b;
    }
    if b == S::neg_infinity() {
        return a;
    }
    if a >= b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}
