// SPDX-License-Identifier: MIT OR Apache-2.0

//! Comparison of change-point locations across independent series.
//!
//! Two tools: the posterior distribution of the shift
//! `Δ = τ_{k₁}¹ − τ_{k₂}²` between two series (a discrete cross-correlation
//! of the two change-point posteriors), and, for `I ≥ 2` series, the
//! posterior probability of the event `E₀` that all designated
//! change-points coincide, together with its Bayes factor.
//!
//! `E₀` inference works through a surrogate measure `Q` under which all
//! partitions are uniform and independent of `E₀`; the probability change
//! back to the real prior `p₀` only involves the coincidence probability
//! `q₀` under `Q`, so everything reduces to forward/backward table sums.

use crate::error::{Error, Result};
use crate::numeric::LogSumExp;
use crate::scalar::{ln_choose, Scalar};
use crate::segmentation::{
    minimal_width_window, ChangePointPosterior, CredibleInterval, PowerTables,
};

/// Posterior distribution of the shift `Δ = τ_{k₁}¹ − τ_{k₂}²`.
#[derive(Clone, Debug)]
pub struct ShiftDistribution<S> {
    k1: usize,
    k2: usize,
    n: usize,
    first_d: i64,
    probs: Vec<S>,
}

impl<S: Scalar> ShiftDistribution<S> {
    pub fn k1(&self) -> usize {
        self.k1
    }

    pub fn k2(&self) -> usize {
        self.k2
    }

    pub fn series_len(&self) -> usize {
        self.n
    }

    /// Smallest attainable shift.
    pub fn first_shift(&self) -> i64 {
        self.first_d
    }

    /// Largest attainable shift.
    pub fn last_shift(&self) -> i64 {
        self.first_d + self.probs.len() as i64 - 1
    }

    /// Probabilities over the attainable shifts, in shift order.
    pub fn probs(&self) -> &[S] {
        &self.probs
    }

    /// `P(Δ = d | Y¹, Y², K¹, K²)`; zero outside the attainable range.
    pub fn prob(&self, d: i64) -> S {
        if d < self.first_d || d > self.last_shift() {
            S::zero()
        } else {
            self.probs[(d - self.first_d) as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, S)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, &p)| (self.first_d + i as i64, p))
    }
}

/// Exact shift posterior: `δ(d) = Σ_t p_{k₁}(t; Y¹) p_{k₂}(t−d; Y²)`.
pub fn shift_posterior<S: Scalar>(
    p1: &ChangePointPosterior<S>,
    p2: &ChangePointPosterior<S>,
) -> Result<ShiftDistribution<S>> {
    if p1.series_len() != p2.series_len() {
        return Err(Error::LengthMismatch {
            a: p1.series_len(),
            b: p2.series_len(),
        });
    }
    let first_d = p1.first_location() as i64 - p2.last_location() as i64;
    let last_d = p1.last_location() as i64 - p2.first_location() as i64;
    let mut probs = Vec::with_capacity((last_d - first_d + 1) as usize);
    for d in first_d..=last_d {
        // overlap of the two support windows at offset d, ascending t
        let t_lo = (p1.first_location() as i64).max(p2.first_location() as i64 + d);
        let t_hi = (p1.last_location() as i64).min(p2.last_location() as i64 + d);
        let mut mass = S::zero();
        for t in t_lo..=t_hi {
            mass = mass + p1.prob(t as usize) * p2.prob((t - d) as usize);
        }
        probs.push(mass);
    }
    Ok(ShiftDistribution {
        k1: p1.k(),
        k2: p2.k(),
        n: p1.series_len(),
        first_d,
        probs,
    })
}

/// Credibility interval on a shift posterior, plus whether the shift 0
/// (identical locations) lies inside it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShiftInterval<S> {
    pub interval: CredibleInterval<S>,
    pub contains_zero: bool,
}

/// Smallest-width contiguous interval of shifts holding mass ≥ `level`.
pub fn shift_credible_interval<S: Scalar>(
    delta: &ShiftDistribution<S>,
    level: S,
) -> Result<ShiftInterval<S>> {
    let interval = minimal_width_window(delta.first_shift(), delta.probs(), level)?;
    Ok(ShiftInterval {
        contains_zero: interval.lo <= 0 && 0 <= interval.hi,
        interval,
    })
}

/// Designated change-points to compare: one `(K_ℓ, k_ℓ)` pair per series,
/// all series sharing length `n`, with prior coincidence probability `p0`.
#[derive(Clone, Debug)]
pub struct CommonChangePointQuery<S> {
    n: usize,
    specs: Vec<(usize, usize)>,
    p0: S,
}

impl<S: Scalar> CommonChangePointQuery<S> {
    pub fn new(n: usize, specs: Vec<(usize, usize)>, p0: S) -> Result<Self> {
        if specs.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "common-change-point comparison needs at least 2 series, got {}",
                specs.len()
            )));
        }
        if !(p0 > S::zero() && p0 < S::one()) {
            return Err(Error::InvalidParameter(format!(
                "prior p0 must lie in (0, 1), got {p0}"
            )));
        }
        validate_specs(n, &specs)?;
        Ok(Self { n, specs, p0 })
    }

    pub fn series_len(&self) -> usize {
        self.n
    }

    pub fn specs(&self) -> &[(usize, usize)] {
        &self.specs
    }

    pub fn p0(&self) -> S {
        self.p0
    }
}

fn validate_specs(n: usize, specs: &[(usize, usize)]) -> Result<()> {
    if specs.is_empty() {
        return Err(Error::InvalidParameter("no (K, k) specs given".into()));
    }
    for &(big_k, k) in specs {
        if big_k < 1 || big_k > n {
            return Err(Error::SegmentCountOutOfRange { k: big_k, n });
        }
        if k < 1 || k >= big_k {
            return Err(Error::ChangePointIndexOutOfRange { k, big_k });
        }
    }
    Ok(())
}

/// Support window shared by every series' designated change-point.
fn common_window(n: usize, specs: &[(usize, usize)]) -> (usize, usize) {
    let t_lo = specs.iter().map(|&(_, k)| k + 1).max().unwrap();
    let t_hi = specs
        .iter()
        .map(|&(big_k, k)| n - (big_k - k) + 1)
        .min()
        .unwrap();
    (t_lo, t_hi)
}

/// Prior probability, under independent uniform partitions, that all the
/// designated change-points coincide:
/// `q₀ = Σ_t ∏_ℓ C(t−2, k_ℓ−1) C(n−t, K_ℓ−k_ℓ−1) / C(n−1, K_ℓ−1)`.
pub fn q0_prior<S: Scalar>(n: usize, specs: &[(usize, usize)]) -> Result<S> {
    if n < 2 {
        return Err(Error::SeriesTooShort { len: n, min: 2 });
    }
    validate_specs(n, specs)?;
    let (t_lo, t_hi) = common_window(n, specs);
    if t_lo > t_hi {
        return Ok(S::zero());
    }
    let mut acc = LogSumExp::new();
    for t in t_lo..=t_hi {
        let mut term = S::zero();
        for &(big_k, k) in specs {
            term = term + ln_choose(S::of((t - 2) as f64), S::of((k - 1) as f64))
                + ln_choose(S::of((n - t) as f64), S::of((big_k - k - 1) as f64))
                - ln_choose(S::of((n - 1) as f64), S::of((big_k - 1) as f64));
        }
        acc.push(term);
    }
    Ok(acc.value().exp().min(S::one()))
}

/// `log Σ_t ∏_ℓ [A_ℓ^{k_ℓ}]_{1,t} [A_ℓ^{K_ℓ−k_ℓ}]_{t,n+1}`, the joint
/// (unnormalized) weight of data and coincidence under the surrogate
/// uniform measure. Subtracting each series' `log_marginal_sum` turns it
/// into `log Q(E₀ | Y, K)`; for a single series it collapses to the
/// marginal sum because the change-point posterior sums to one.
pub fn log_joint_e0<S: Scalar>(
    tables: &[&PowerTables<S>],
    specs: &[(usize, usize)],
) -> Result<S> {
    if tables.is_empty() || tables.len() != specs.len() {
        return Err(Error::InvalidParameter(format!(
            "need one (K, k) spec per series: {} tables, {} specs",
            tables.len(),
            specs.len()
        )));
    }
    let n = tables[0].series_len();
    for t in tables.iter().skip(1) {
        if t.series_len() != n {
            return Err(Error::LengthMismatch {
                a: n,
                b: t.series_len(),
            });
        }
    }
    validate_specs(n, specs)?;
    for (t, &(big_k, _)) in tables.iter().zip(specs) {
        if t.segment_count() != big_k {
            return Err(Error::InvalidParameter(format!(
                "tables built for K={} but spec says K={}",
                t.segment_count(),
                big_k
            )));
        }
    }
    let (t_lo, t_hi) = common_window(n, specs);
    let mut acc = LogSumExp::new();
    for t in t_lo..=t_hi {
        let mut term = S::zero();
        for (tbl, &(big_k, k)) in tables.iter().zip(specs) {
            term = term + tbl.forward(k, t) + tbl.backward(big_k - k, t);
        }
        acc.push(term);
    }
    Ok(acc.value())
}

/// Posterior probability of a common change-point, Bayes factor, and the
/// surrogate-measure ingredients they came from.
#[derive(Clone, Copy, Debug)]
pub struct ComparisonResult<S> {
    /// Prior coincidence probability used.
    pub p0: S,
    /// Coincidence probability under independent uniform partitions.
    pub q0: S,
    /// `P(E₀ | Y, K)`.
    pub posterior_e0: S,
    /// Natural log of `posterior_e0`, kept for very small posteriors.
    pub log_posterior_e0: S,
    /// `P(Y|E₀,K) / P(Y|E₁,K)`; `+∞` when the complement's mass underflows.
    pub bayes_factor: S,
    /// `log Σ_t ∏_ℓ F^ℓ_{k_ℓ}(t) B^ℓ_{K_ℓ−k_ℓ}(t)` (unnormalized `Q(Y, E₀|K)`).
    pub log_q_joint: S,
    /// `Σ_ℓ log [A_ℓ^{K_ℓ}]_{1,n+1}` (unnormalized `Q(Y|K)`).
    pub log_q_marg: S,
}

impl<S: Scalar> ComparisonResult<S> {
    /// `log Q(E₀ | Y, K)` — the posterior under the surrogate `p0 = q0`.
    pub fn log_surrogate_posterior(&self) -> S {
        self.log_q_joint - self.log_q_marg
    }
}

/// Posterior probability that the designated change-points of all series
/// coincide, with the Bayes factor
/// `(1−q₀)/q₀ · Q(Y,E₀|K) / (Q(Y|K) − Q(Y,E₀|K))`.
pub fn posterior_common<S: Scalar>(
    query: &CommonChangePointQuery<S>,
    tables: &[&PowerTables<S>],
) -> Result<ComparisonResult<S>> {
    let q0: S = q0_prior(query.series_len(), query.specs())?;
    if !(q0 > S::zero() && q0 < S::one()) {
        return Err(Error::DegeneratePrior {
            q0: q0.to_f64_lossy(),
        });
    }
    let log_q_joint = log_joint_e0(tables, query.specs())?;
    let log_q_marg = tables.iter().map(|t| t.log_marginal_sum()).sum::<S>();

    // r = Q(E₀|Y,K) ∈ [0,1]; a ratio slightly above 1 is float noise, well
    // above 1 means the tables and specs disagree.
    let log_r = log_q_joint - log_q_marg;
    if log_r > S::of(1e-9) {
        return Err(Error::NumericalInconsistency(format!(
            "joint exceeds marginal: log Q(Y,E0) - log Q(Y) = {log_r} > 0"
        )));
    }
    let log_r = log_r.min(S::zero());
    let r = log_r.exp();
    let one_m_r = -log_r.exp_m1(); // 1 − r without cancellation

    let w1 = query.p0() / q0; // reweight inside E₀
    let w0 = (S::one() - query.p0()) / (S::one() - q0); // reweight outside
    let denom = w0 * one_m_r + w1 * r;
    let log_posterior_e0 = w1.ln() + log_r - denom.ln();
    let posterior_e0 = (w1 * r / denom).min(S::one());

    let bayes_factor = if one_m_r > S::zero() {
        (S::one() - q0) / q0 * r / one_m_r
    } else {
        S::infinity()
    };

    Ok(ComparisonResult {
        p0: query.p0(),
        q0,
        posterior_e0,
        log_posterior_e0,
        bayes_factor,
        log_q_joint,
        log_q_marg,
    })
}
