// SPDX-License-Identifier: MIT OR Apache-2.0

//! Brute-force reference implementations by exhaustive partition
//! enumeration.
//!
//! Everything here evaluates the definitional sums literally — sums of
//! `∏_J P(Y_J|J)` over explicitly enumerated partitions (or tuples of
//! partitions), with the hierarchical prior applied directly — so the test
//! suite can certify the matrix-power dynamic program on small instances.
//! The segment marginals themselves are shared with the emission module;
//! they are validated separately against numerical quadrature, giving two
//! independent checking axes.
//!
//! Not built for scale: enumeration is capped at 10⁶ partitions.

use crate::emission::{CumulativeStats, EmissionModel};
use crate::error::{Error, Result};
use crate::numeric::LogSumExp;
use crate::scalar::Scalar;
use crate::series::CountSeries;

/// Hard cap on `C(n−1, K−1)` for a single series enumeration.
pub const ENUMERATION_CAP: u128 = 1_000_000;

/// One partition `m = (τ₀=1, τ₁, …, τ_K = n+1)` of `[1, n+1)` into `K`
/// non-empty segments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    taus: Vec<usize>,
}

impl Partition {
    /// All change-points including the fixed endpoints.
    pub fn taus(&self) -> &[usize] {
        &self.taus
    }

    pub fn segment_count(&self) -> usize {
        self.taus.len() - 1
    }

    /// `τ_k` for `0 ≤ k ≤ K`.
    pub fn changepoint(&self, k: usize) -> usize {
        self.taus[k]
    }

    /// The segments `[τ_{k−1}, τ_k)` in order.
    pub fn segments(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.taus.windows(2).map(|w| (w[0], w[1]))
    }
}

/// Exact `C(n, k)` in `u128`, saturating far above the enumeration cap.
fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Enumerate all `C(n−1, K−1)` partitions of `[1, n+1)` into `K` non-empty
/// segments (internal change-points are `K−1` distinct values in `2..=n`).
pub fn enumerate_partitions(n: usize, big_k: usize) -> Result<Vec<Partition>> {
    if big_k < 1 || big_k > n {
        return Err(Error::SegmentCountOutOfRange { k: big_k, n });
    }
    let count = binomial(n - 1, big_k - 1);
    if count > ENUMERATION_CAP {
        return Err(Error::EnumerationCapExceeded {
            n_minus_1: n - 1,
            k_minus_1: big_k - 1,
            count,
            cap: ENUMERATION_CAP,
        });
    }
    let mut out = Vec::with_capacity(count as usize);
    let inner = big_k - 1;
    // lexicographic combinations of `inner` values from 2..=n
    let mut idx: Vec<usize> = (0..inner).map(|i| i + 2).collect();
    loop {
        let mut taus = Vec::with_capacity(big_k + 1);
        taus.push(1);
        taus.extend_from_slice(&idx);
        taus.push(n + 1);
        out.push(Partition { taus });
        // advance
        let mut pos = inner;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            if idx[pos] < n - (inner - 1 - pos) {
                idx[pos] += 1;
                for j in pos + 1..inner {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
        if inner == 0 {
            return Ok(out); // single partition when K = 1
        }
    }
}

/// `log P(Y|m) = Σ_{J∈m} log P(Y_J|J)` for every enumerated partition.
fn partition_log_weights<S: Scalar>(
    series: &CountSeries<S>,
    model: &EmissionModel<S>,
    partitions: &[Partition],
) -> Result<Vec<S>> {
    let stats = CumulativeStats::new(series, model)?;
    Ok(partitions
        .iter()
        .map(|m| {
            m.segments()
                .map(|(i, j)| stats.log_segment_marginal_unchecked(i, j))
                .sum()
        })
        .collect())
}

/// `log Σ_{m ∈ ℳ_K} ∏_J P(Y_J|J)` by literal enumeration.
pub fn brute_evidence<S: Scalar>(
    series: &CountSeries<S>,
    model: &EmissionModel<S>,
    big_k: usize,
) -> Result<S> {
    let partitions = enumerate_partitions(series.len(), big_k)?;
    let weights = partition_log_weights(series, model, &partitions)?;
    let mut acc = LogSumExp::new();
    for w in weights {
        acc.push(w);
    }
    Ok(acc.value())
}

/// Posterior of the `k`th change-point by restricted sums: index `t` of the
/// returned vector (length `n+2`) is the location, so `out[t] = P(τ_k = t)`.
pub fn brute_changepoint_posterior<S: Scalar>(
    series: &CountSeries<S>,
    model: &EmissionModel<S>,
    big_k: usize,
    k: usize,
) -> Result<Vec<S>> {
    if k < 1 || k >= big_k {
        return Err(Error::ChangePointIndexOutOfRange { k, big_k });
    }
    let n = series.len();
    let partitions = enumerate_partitions(n, big_k)?;
    let weights = partition_log_weights(series, model, &partitions)?;
    let mut per_location = vec![LogSumExp::new(); n + 2];
    let mut total = LogSumExp::new();
    for (m, &w) in partitions.iter().zip(&weights) {
        per_location[m.changepoint(k)].push(w);
        total.push(w);
    }
    let z = total.value();
    Ok(per_location
        .into_iter()
        .map(|acc| {
            let v = acc.value();
            if v == S::neg_infinity() {
                S::zero()
            } else {
                (v - z).exp()
            }
        })
        .collect())
}

/// Shift posterior by enumerating pairs of partitions: returns
/// `(first_shift, probs)` with `probs[i] = P(Δ = first_shift + i)`.
pub fn brute_shift_posterior<S: Scalar>(
    series1: &CountSeries<S>,
    model1: &EmissionModel<S>,
    spec1: (usize, usize),
    series2: &CountSeries<S>,
    model2: &EmissionModel<S>,
    spec2: (usize, usize),
) -> Result<(i64, Vec<S>)> {
    if series1.len() != series2.len() {
        return Err(Error::LengthMismatch {
            a: series1.len(),
            b: series2.len(),
        });
    }
    let n = series1.len() as i64;
    let parts1 = enumerate_partitions(series1.len(), spec1.0)?;
    let parts2 = enumerate_partitions(series2.len(), spec2.0)?;
    let w1 = partition_log_weights(series1, model1, &parts1)?;
    let w2 = partition_log_weights(series2, model2, &parts2)?;

    let first_shift = -(n - 1);
    let mut per_shift = vec![LogSumExp::new(); (2 * n - 1) as usize];
    let mut total = LogSumExp::new();
    for (m1, &lw1) in parts1.iter().zip(&w1) {
        let t1 = m1.changepoint(spec1.1) as i64;
        for (m2, &lw2) in parts2.iter().zip(&w2) {
            let t2 = m2.changepoint(spec2.1) as i64;
            let d = t1 - t2;
            per_shift[(d - first_shift) as usize].push(lw1 + lw2);
            total.push(lw1 + lw2);
        }
    }
    let z = total.value();
    let probs = per_shift
        .into_iter()
        .map(|acc| {
            let v = acc.value();
            if v == S::neg_infinity() {
                S::zero()
            } else {
                (v - z).exp()
            }
        })
        .collect();
    Ok((first_shift, probs))
}

/// Result of the literal hierarchical-model computation over partition
/// tuples.
#[derive(Clone, Copy, Debug)]
pub struct BruteComparison<S> {
    pub q0: S,
    pub posterior_e0: S,
    pub bayes_factor: S,
}

/// Common-change-point posterior by enumerating partition *tuples* and
/// applying the hierarchical prior literally: coincident tuples are uniform
/// within `E₀` (total prior mass `p0`), the rest uniform within `E₁`.
pub fn brute_common_posterior<S: Scalar>(
    inputs: &[(&CountSeries<S>, &EmissionModel<S>)],
    specs: &[(usize, usize)],
    p0: S,
) -> Result<BruteComparison<S>> {
    if inputs.len() != specs.len() || inputs.is_empty() {
        return Err(Error::InvalidParameter(
            "need one (K, k) spec per series".into(),
        ));
    }
    let n = inputs[0].0.len();
    for (s, _) in inputs {
        if s.len() != n {
            return Err(Error::LengthMismatch { a: n, b: s.len() });
        }
    }

    // Per-series enumeration with the designated change-point location
    // attached to each partition weight.
    let mut per_series: Vec<Vec<(usize, S)>> = Vec::with_capacity(inputs.len());
    for ((series, model), &(big_k, k)) in inputs.iter().zip(specs) {
        let parts = enumerate_partitions(n, big_k)?;
        let weights = partition_log_weights(series, model, &parts)?;
        per_series.push(
            parts
                .iter()
                .zip(&weights)
                .map(|(m, &w)| (m.changepoint(k), w))
                .collect(),
        );
    }

    // Walk the cartesian product with an odometer.
    let sizes: Vec<usize> = per_series.iter().map(Vec::len).collect();
    let tuple_total: u128 = sizes.iter().map(|&s| s as u128).product();
    if tuple_total > ENUMERATION_CAP {
        return Err(Error::EnumerationCapExceeded {
            n_minus_1: n - 1,
            k_minus_1: 0,
            count: tuple_total,
            cap: ENUMERATION_CAP,
        });
    }
    let mut sum0 = LogSumExp::new();
    let mut sum1 = LogSumExp::new();
    let mut count0: u128 = 0;
    let mut odometer = vec![0usize; per_series.len()];
    'outer: loop {
        let mut log_w = S::zero();
        let mut coincide = true;
        let first_loc = per_series[0][odometer[0]].0;
        for (series_idx, &pos) in odometer.iter().enumerate() {
            let (loc, w) = per_series[series_idx][pos];
            log_w = log_w + w;
            coincide = coincide && loc == first_loc;
        }
        if coincide {
            sum0.push(log_w);
            count0 += 1;
        } else {
            sum1.push(log_w);
        }
        // advance odometer
        for pos in (0..odometer.len()).rev() {
            odometer[pos] += 1;
            if odometer[pos] < sizes[pos] {
                continue 'outer;
            }
            odometer[pos] = 0;
        }
        break;
    }

    let count1 = tuple_total - count0;
    let q0 = S::of(count0 as f64) / S::of(tuple_total as f64);
    if count0 == 0 || count1 == 0 {
        return Err(Error::DegeneratePrior {
            q0: q0.to_f64_lossy(),
        });
    }
    // Uniform-within-event averages: avg_e = S_e / |E_e|.
    let log_avg0 = sum0.value() - S::of(count0 as f64).ln();
    let log_avg1 = sum1.value() - S::of(count1 as f64).ln();
    // P(E0|Y) = p0·avg0 / (p0·avg0 + (1−p0)·avg1)
    let log_num = p0.ln() + log_avg0;
    let log_alt = (S::one() - p0).ln() + log_avg1;
    let posterior_e0 = if log_num >= log_alt {
        S::one() / (S::one() + (log_alt - log_num).exp())
    } else {
        let ratio = (log_num - log_alt).exp();
        ratio / (S::one() + ratio)
    };
    let bayes_factor = (log_avg0 - log_avg1).exp();
    Ok(BruteComparison {
        q0,
        posterior_e0,
        bayes_factor,
    })
}
