// SPDX-License-Identifier: MIT OR Apache-2.0

//! Segment-probability matrix and the matrix-power dynamic program.
//!
//! The strict upper-triangular matrix `A` holds the log marginal likelihood
//! of every segment `[i, j)`. Powers of `A` accumulate partitions:
//! `[A^k]_{1,t}` sums `∏_J P(Y_J|J)` over all ways to cover `[1, t)` with
//! `k` non-empty segments, so the posterior of the `k`th change-point and
//! the evidence for `K` segments are ratios of matrix-power entries. The
//! whole DP runs in log space with streaming log-sum-exp; at n ≈ 700 the raw
//! probabilities underflow `f64` by thousands of orders of magnitude.

use crate::emission::{CumulativeStats, EmissionModel};
use crate::error::{Error, Result};
use crate::numeric::LogSumExp;
use crate::scalar::{ln_choose, Scalar};
use crate::series::CountSeries;

/// Strict upper-triangular `(n+1)×(n+1)` table of log segment marginals,
/// entry `(i, j)` = `log P(Y_[i,j) | [i,j))` for `1 ≤ i < j ≤ n+1`.
#[derive(Clone, Debug)]
pub struct SegmentMatrix<S> {
    n: usize,
    stride: usize,
    log_a: Vec<S>,
    model: EmissionModel<S>,
}

impl<S: Scalar> SegmentMatrix<S> {
    /// Fill all `n(n+1)/2` entries in `O(n²)` via prefix statistics.
    pub fn build(series: &CountSeries<S>, model: &EmissionModel<S>) -> Result<Self> {
        let stats = CumulativeStats::new(series, model)?;
        let n = series.len();
        let stride = n + 2;
        let mut log_a = vec![S::neg_infinity(); stride * stride];
        for i in 1..=n {
            let row = &mut log_a[i * stride..(i + 1) * stride];
            for (j, slot) in row.iter_mut().enumerate().take(n + 2).skip(i + 1) {
                *slot = stats.log_segment_marginal_unchecked(i, j);
            }
        }
        Ok(Self {
            n,
            stride,
            log_a,
            model: *model,
        })
    }

    pub fn series_len(&self) -> usize {
        self.n
    }

    pub fn model(&self) -> &EmissionModel<S> {
        &self.model
    }

    /// `log [A]_{i,j}`; −∞ outside the strict upper triangle.
    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> S {
        self.log_a[i * self.stride + j]
    }

    #[inline]
    fn row(&self, i: usize) -> &[S] {
        &self.log_a[i * self.stride..(i + 1) * self.stride]
    }
}

/// Forward/backward log matrix-power tables for one series and one `K`.
///
/// `forward(k, t) = log [A^k]_{1,t}` and `backward(j, t) = log [A^j]_{t,n+1}`;
/// only the `O(Kn)` rows and columns actually needed are stored, never a full
/// matrix power.
#[derive(Clone, Debug)]
pub struct PowerTables<S> {
    n: usize,
    big_k: usize,
    forward: Vec<Vec<S>>,
    backward: Vec<Vec<S>>,
}

impl<S: Scalar> PowerTables<S> {
    /// Build tables for `K` segments in `O(Kn²)` time and `O(Kn)` memory.
    pub fn build(matrix: &SegmentMatrix<S>, big_k: usize) -> Result<Self> {
        let n = matrix.series_len();
        if big_k < 1 || big_k > n {
            return Err(Error::SegmentCountOutOfRange { k: big_k, n });
        }

        // Forward: row k from row k−1 by scatter-accumulation along rows of
        // A (cache-friendly for the row-major layout).
        let mut forward: Vec<Vec<S>> = Vec::with_capacity(big_k);
        let mut first: Vec<S> = vec![S::neg_infinity(); n + 2];
        first[2..=n + 1].copy_from_slice(&matrix.row(1)[2..=n + 1]);
        forward.push(first);
        for k in 2..=big_k {
            let prev = &forward[k - 2];
            let mut maxs = vec![S::neg_infinity(); n + 2];
            let mut sums = vec![S::zero(); n + 2];
            for (s, &base) in prev.iter().enumerate().take(n + 1).skip(k) {
                if base == S::neg_infinity() {
                    continue;
                }
                let row = matrix.row(s);
                for t in (s + 1)..=(n + 1) {
                    let v = base + row[t];
                    if v <= maxs[t] {
                        sums[t] = sums[t] + (v - maxs[t]).exp();
                    } else {
                        sums[t] = sums[t] * (maxs[t] - v).exp() + S::one();
                        maxs[t] = v;
                    }
                }
            }
            let mut next = vec![S::neg_infinity(); n + 2];
            for t in (k + 1)..=(n + 1) {
                if maxs[t] > S::neg_infinity() {
                    next[t] = maxs[t] + sums[t].ln();
                }
            }
            forward.push(next);
        }

        // Backward: column j from column j−1, gathering along rows of A.
        let mut backward: Vec<Vec<S>> = Vec::with_capacity(big_k);
        let mut last: Vec<S> = vec![S::neg_infinity(); n + 2];
        for (t, slot) in last.iter_mut().enumerate().take(n + 1).skip(1) {
            *slot = matrix.entry(t, n + 1);
        }
        backward.push(last);
        for j in 2..=big_k {
            let prev = &backward[j - 2];
            let mut next = vec![S::neg_infinity(); n + 2];
            for (t, slot) in next.iter_mut().enumerate().take(n + 2 - j).skip(1) {
                let row = matrix.row(t);
                let mut acc = LogSumExp::new();
                for s in (t + 1)..=(n + 2 - j) {
                    acc.push(row[s] + prev[s]);
                }
                *slot = acc.value();
            }
            backward.push(next);
        }

        let tables = Self {
            n,
            big_k,
            forward,
            backward,
        };

        // Same total from either direction.
        let f = tables.forward(big_k, n + 1);
        let b = tables.backward(big_k, 1);
        let tol = S::of(1e-9).max(S::epsilon() * S::of(1e3));
        if (f - b).abs() > tol * f.abs().max(S::one()) {
            return Err(Error::NumericalInconsistency(format!(
                "forward/backward evidence mismatch: {f} vs {b}"
            )));
        }
        Ok(tables)
    }

    pub fn series_len(&self) -> usize {
        self.n
    }

    /// The `K` the tables were built for.
    pub fn segment_count(&self) -> usize {
        self.big_k
    }

    /// `log [A^k]_{1,t}` for `1 ≤ k ≤ K`; −∞ where `t < k+1`.
    #[inline]
    pub fn forward(&self, k: usize, t: usize) -> S {
        self.forward[k - 1][t]
    }

    /// `log [A^j]_{t,n+1}` for `1 ≤ j ≤ K`; −∞ where `t > n+1−j`.
    #[inline]
    pub fn backward(&self, j: usize, t: usize) -> S {
        self.backward[j - 1][t]
    }

    /// `log Σ_{partitions into K segments} ∏_J P(Y_J|J)`, i.e. `F_K(n+1)`.
    pub fn log_marginal_sum(&self) -> S {
        self.forward(self.big_k, self.n + 1)
    }
}

/// Log evidence of one series for a fixed segment count.
///
/// `log_sum` is the DP total `log Σ_m ∏_J P(Y_J|J)`; the uniform partition
/// prior contributes the separately reported constant
/// `log_partition_count = ln C(n−1, K−1)`, so
/// `log P(Y|K) = log_sum − log_partition_count`.
#[derive(Clone, Copy, Debug)]
pub struct LogEvidence<S> {
    pub log_sum: S,
    pub log_partition_count: S,
}

impl<S: Scalar> LogEvidence<S> {
    /// `log P(Y|K)` under the uniform partition prior.
    pub fn log_prob(&self) -> S {
        self.log_sum - self.log_partition_count
    }
}

/// Evidence from built tables.
pub fn log_evidence<S: Scalar>(tables: &PowerTables<S>) -> LogEvidence<S> {
    let n = tables.series_len();
    let k = tables.segment_count();
    LogEvidence {
        log_sum: tables.log_marginal_sum(),
        log_partition_count: ln_choose(S::of((n - 1) as f64), S::of((k - 1) as f64)),
    }
}

/// Posterior distribution of the `k`th change-point location given `K`.
///
/// Locations follow the convention that `τ_k = t` is the 1-based index of
/// the first point of segment `k+1`; the support is
/// `k+1 ≤ t ≤ n−(K−k)+1`, with zero probability outside.
#[derive(Clone, Debug)]
pub struct ChangePointPosterior<S> {
    k: usize,
    big_k: usize,
    n: usize,
    first_t: usize,
    probs: Vec<S>,
}

impl<S: Scalar> ChangePointPosterior<S> {
    /// Assemble a posterior from an explicit support window (crate-internal,
    /// used to build synthetic distributions in tests).
    #[cfg(test)]
    pub(crate) fn from_window(
        k: usize,
        big_k: usize,
        n: usize,
        first_t: usize,
        probs: Vec<S>,
    ) -> Self {
        Self {
            k,
            big_k,
            n,
            first_t,
            probs,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn segment_count(&self) -> usize {
        self.big_k
    }

    pub fn series_len(&self) -> usize {
        self.n
    }

    /// First location of the support window.
    pub fn first_location(&self) -> usize {
        self.first_t
    }

    /// Last location of the support window.
    pub fn last_location(&self) -> usize {
        self.first_t + self.probs.len() - 1
    }

    /// Probabilities over the support window, in location order.
    pub fn probs(&self) -> &[S] {
        &self.probs
    }

    /// `P(τ_k = t | Y, K)`; zero outside the support window.
    pub fn prob(&self, t: usize) -> S {
        if t < self.first_t || t > self.last_location() {
            S::zero()
        } else {
            self.probs[t - self.first_t]
        }
    }

    /// Location with maximal posterior probability (smallest on ties).
    pub fn mode(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = i;
            }
        }
        self.first_t + best
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, S)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, &p)| (self.first_t + i, p))
    }
}

/// Posterior of the `k`th change-point,
/// `p_k(t) = [A^k]_{1,t} [A^{K−k}]_{t,n+1} / [A^K]_{1,n+1}`.
pub fn changepoint_posterior<S: Scalar>(
    tables: &PowerTables<S>,
    k: usize,
) -> Result<ChangePointPosterior<S>> {
    let big_k = tables.segment_count();
    if k < 1 || k >= big_k {
        return Err(Error::ChangePointIndexOutOfRange { k, big_k });
    }
    let n = tables.series_len();
    let log_z = tables.log_marginal_sum();
    let first_t = k + 1;
    let last_t = n - (big_k - k) + 1;
    let mut probs: Vec<S> = (first_t..=last_t)
        .map(|t| (tables.forward(k, t) + tables.backward(big_k - k, t) - log_z).exp())
        .collect();
    let total: S = probs.iter().copied().sum();
    if total <= S::zero() || !total.is_finite() {
        return Err(Error::NumericalInconsistency(format!(
            "change-point posterior mass {total} is not positive and finite"
        )));
    }
    for p in &mut probs {
        *p = *p / total;
    }
    Ok(ChangePointPosterior {
        k,
        big_k,
        n,
        first_t,
        probs,
    })
}

/// Contiguous credibility interval on an integer-located distribution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CredibleInterval<S> {
    pub level: S,
    pub lo: i64,
    pub hi: i64,
    pub attained_mass: S,
}

/// Smallest-width contiguous window holding at least `level` posterior mass;
/// width ties break toward the smaller lower endpoint.
pub(crate) fn minimal_width_window<S: Scalar>(
    first_loc: i64,
    probs: &[S],
    level: S,
) -> Result<CredibleInterval<S>> {
    if !(level > S::zero() && level < S::one()) {
        return Err(Error::InvalidParameter(format!(
            "credibility level must lie in (0, 1), got {level}"
        )));
    }
    let len = probs.len();
    // prefix[i] = mass of the first i entries
    let mut prefix = Vec::with_capacity(len + 1);
    prefix.push(S::zero());
    let mut run = S::zero();
    for &p in probs {
        run = run + p;
        prefix.push(run);
    }
    for width in 1..=len {
        for start in 0..=(len - width) {
            let mass = prefix[start + width] - prefix[start];
            if mass >= level {
                return Ok(CredibleInterval {
                    level,
                    lo: first_loc + start as i64,
                    hi: first_loc + (start + width - 1) as i64,
                    attained_mass: mass,
                });
            }
        }
    }
    // Total mass can round below the level only by float error; return the
    // full support in that case.
    Ok(CredibleInterval {
        level,
        lo: first_loc,
        hi: first_loc + (len - 1) as i64,
        attained_mass: run,
    })
}

/// Credibility interval for a change-point posterior.
pub fn credible_interval<S: Scalar>(
    post: &ChangePointPosterior<S>,
    level: S,
) -> Result<CredibleInterval<S>> {
    minimal_width_window(post.first_location() as i64, post.probs(), level)
}
