// SPDX-License-Identifier: MIT OR Apache-2.0

//! Closed-form log marginal likelihoods `log P(Y_J | J)` for segments under
//! conjugate-exponential-family emission models.
//!
//! A segment `[i, j)` (1-based, half-open) has its segment parameter
//! integrated against the conjugate prior, leaving an `O(1)` expression in
//! the segment's sufficient statistics. The data-dependent combinatorial
//! constant (`∏ 1/y!`, `∏ C(y+φ−1, y)`) is kept, not dropped, so evidences
//! stay comparable across segment counts and across models.
//!
//! Supported families, each with its conjugate prior:
//! negative binomial with known dispersion (Beta), Poisson (Gamma),
//! Gaussian with known variance (Normal on the mean), and heteroscedastic
//! Gaussian (Normal–Inverse-Gamma).

use crate::error::{Error, Result};
use crate::scalar::{ln_beta, Scalar};
use crate::series::CountSeries;

#[allow(clippy::excessive_precision)]
const LN_2PI: f64 = 1.8378770664093454835606594728112352797227949472756;

/// Beta(α, β) prior on the negative binomial success probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetaPrior<S> {
    pub alpha: S,
    pub beta: S,
}

/// Gamma(shape, rate) prior on the Poisson intensity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaPrior<S> {
    pub shape: S,
    pub rate: S,
}

/// Normal(μ₀, v₀·σ²) prior on the mean of a known-variance Gaussian.
/// `v0` scales the (known) observation variance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalPrior<S> {
    pub mu0: S,
    pub v0: S,
}

/// Normal–Inverse-Gamma(μ₀, v₀, a₀, b₀) prior for the heteroscedastic
/// Gaussian: σ² ~ InvGamma(a₀, b₀) and μ | σ² ~ Normal(μ₀, v₀·σ²).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NigPrior<S> {
    pub mu0: S,
    pub v0: S,
    pub a0: S,
    pub b0: S,
}

impl<S: Scalar> BetaPrior<S> {
    pub fn jeffreys() -> Self {
        Self {
            alpha: S::of(0.5),
            beta: S::of(0.5),
        }
    }

    fn validate(&self) -> Result<()> {
        ensure_positive(self.alpha, "Beta prior alpha")?;
        ensure_positive(self.beta, "Beta prior beta")
    }
}

impl<S: Scalar> GammaPrior<S> {
    pub fn jeffreys() -> Self {
        Self {
            shape: S::of(0.5),
            rate: S::of(0.5),
        }
    }

    fn validate(&self) -> Result<()> {
        ensure_positive(self.shape, "Gamma prior shape")?;
        ensure_positive(self.rate, "Gamma prior rate")
    }
}

impl<S: Scalar> NormalPrior<S> {
    /// Unit-scale default: prior variance equals the observation variance.
    pub fn unit() -> Self {
        Self {
            mu0: S::zero(),
            v0: S::one(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.mu0.is_finite() {
            return Err(Error::InvalidParameter("Normal prior mu0 must be finite".into()));
        }
        ensure_positive(self.v0, "Normal prior v0")
    }
}

impl<S: Scalar> NigPrior<S> {
    pub fn weakly_informative() -> Self {
        Self {
            mu0: S::zero(),
            v0: S::one(),
            a0: S::of(0.5),
            b0: S::of(0.5),
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.mu0.is_finite() {
            return Err(Error::InvalidParameter("NIG prior mu0 must be finite".into()));
        }
        ensure_positive(self.v0, "NIG prior v0")?;
        ensure_positive(self.a0, "NIG prior a0")?;
        ensure_positive(self.b0, "NIG prior b0")
    }
}

fn ensure_positive<S: Scalar>(value: S, what: &str) -> Result<()> {
    if value.is_finite() && value > S::zero() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{what} must be finite and > 0, got {value}"
        )))
    }
}

/// Emission family plus its conjugate-prior hyperparameters and fixed
/// nuisance parameter (dispersion φ or variance σ²).
///
/// The hyperparameter variant always matches the family by construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EmissionModel<S> {
    /// Counts `y ~ NB(p, φ)` with pmf `C(y+φ−1, y) p^φ (1−p)^y` and mean
    /// `φ(1−p)/p`; known dispersion `φ`, conjugate Beta prior on `p`.
    NegativeBinomial { phi: S, prior: BetaPrior<S> },
    /// Counts `y ~ Poisson(λ)` with conjugate Gamma prior on `λ`.
    Poisson { prior: GammaPrior<S> },
    /// Reals `y ~ N(μ, σ²)` with known `σ²` and Normal prior on `μ`.
    GaussianKnownVariance { sigma2: S, prior: NormalPrior<S> },
    /// Reals `y ~ N(μ, σ²)` with both segment parameters unknown and a
    /// Normal–Inverse-Gamma prior.
    GaussianHeteroscedastic { prior: NigPrior<S> },
}

impl<S: Scalar> EmissionModel<S> {
    /// Negative binomial with dispersion `phi` and the Jeffreys-style
    /// default Beta(1/2, 1/2) prior.
    pub fn neg_binomial(phi: S) -> Result<Self> {
        Self::neg_binomial_with(phi, BetaPrior::jeffreys())
    }

    pub fn neg_binomial_with(phi: S, prior: BetaPrior<S>) -> Result<Self> {
        ensure_positive(phi, "negative binomial dispersion phi")?;
        prior.validate()?;
        Ok(Self::NegativeBinomial { phi, prior })
    }

    /// Poisson with the default Gamma(1/2, 1/2) prior.
    pub fn poisson() -> Self {
        Self::Poisson {
            prior: GammaPrior::jeffreys(),
        }
    }

    pub fn poisson_with(prior: GammaPrior<S>) -> Result<Self> {
        prior.validate()?;
        Ok(Self::Poisson { prior })
    }

    /// Known-variance Gaussian with the default Normal(0, σ²) prior.
    pub fn gaussian_known_variance(sigma2: S) -> Result<Self> {
        Self::gaussian_known_variance_with(sigma2, NormalPrior::unit())
    }

    pub fn gaussian_known_variance_with(sigma2: S, prior: NormalPrior<S>) -> Result<Self> {
        ensure_positive(sigma2, "Gaussian variance sigma2")?;
        prior.validate()?;
        Ok(Self::GaussianKnownVariance { sigma2, prior })
    }

    /// Heteroscedastic Gaussian with the default NIG(0, 1, 1/2, 1/2) prior.
    pub fn gaussian_heteroscedastic() -> Self {
        Self::GaussianHeteroscedastic {
            prior: NigPrior::weakly_informative(),
        }
    }

    pub fn gaussian_heteroscedastic_with(prior: NigPrior<S>) -> Result<Self> {
        prior.validate()?;
        Ok(Self::GaussianHeteroscedastic { prior })
    }

    /// Whether the family models counts (and so requires integer data).
    pub fn is_count_family(&self) -> bool {
        matches!(
            self,
            Self::NegativeBinomial { .. } | Self::Poisson { .. }
        )
    }

    /// `log P(Y_[i,j) | [i,j))`: the segment marginal likelihood with the
    /// segment parameter integrated against its conjugate prior.
    ///
    /// Indices are 1-based with `1 ≤ i < j ≤ n+1`; singleton segments are
    /// legal. For repeated queries over one series build a
    /// [`CumulativeStats`] table instead.
    pub fn log_segment_marginal(&self, series: &CountSeries<S>, i: usize, j: usize) -> Result<S> {
        let n = series.len();
        check_segment(i, j, n)?;
        if self.is_count_family() {
            series.validate_counts()?;
        }
        let seg = &series.values()[i - 1..j - 1];
        let len = S::of(seg.len() as f64);
        let sum: S = seg.iter().copied().sum();
        let stats = match self {
            Self::NegativeBinomial { phi, .. } => SegmentStats {
                len,
                sum,
                sum_sq: S::zero(),
                log_const: seg
                    .iter()
                    .map(|&y| nb_log_binomial_term(y, *phi))
                    .sum(),
            },
            Self::Poisson { .. } => SegmentStats {
                len,
                sum,
                sum_sq: S::zero(),
                log_const: -seg.iter().map(|&y| (y + S::one()).lgamma()).sum::<S>(),
            },
            _ => SegmentStats {
                len,
                sum,
                sum_sq: seg.iter().map(|&y| y * y).sum(),
                log_const: S::zero(),
            },
        };
        Ok(self.marginal_from_stats(&stats))
    }

    fn marginal_from_stats(&self, stats: &SegmentStats<S>) -> S {
        match *self {
            Self::NegativeBinomial { phi, prior } => {
                // ∏ C(y+φ−1, y) · B(α + Lφ, β + Σy) / B(α, β)
                stats.log_const
                    + ln_beta(prior.alpha + stats.len * phi, prior.beta + stats.sum)
                    - ln_beta(prior.alpha, prior.beta)
            }
            Self::Poisson { prior } => {
                // ∏ 1/y! · b^a Γ(a + Σy) / (Γ(a) (b + L)^{a+Σy})
                let a = prior.shape;
                let b = prior.rate;
                let a_post = a + stats.sum;
                stats.log_const + a * b.ln() - a.lgamma() + a_post.lgamma()
                    - a_post * (b + stats.len).ln()
            }
            Self::GaussianKnownVariance { sigma2, prior } => {
                let half = S::of(0.5);
                let ln_2pi = S::of(LN_2PI);
                let len = stats.len;
                let mean = stats.sum / len;
                // within-segment sum of squares, Σ(y−ȳ)²
                let ss = (stats.sum_sq - stats.sum * mean).max(S::zero());
                let shrink = S::one() + len * prior.v0;
                let resid = mean - prior.mu0;
                -half * len * (ln_2pi + sigma2.ln())
                    - ss / (S::of(2.0) * sigma2)
                    - half * shrink.ln()
                    - resid * resid / (S::of(2.0) * sigma2 * (S::one() / len + prior.v0))
            }
            Self::GaussianHeteroscedastic { prior } => {
                let half = S::of(0.5);
                let ln_2pi = S::of(LN_2PI);
                let len = stats.len;
                let v_n = S::one() / (S::one() / prior.v0 + len);
                let mu_n = v_n * (prior.mu0 / prior.v0 + stats.sum);
                let a_n = prior.a0 + half * len;
                let b_n = prior.b0
                    + half * (stats.sum_sq + prior.mu0 * prior.mu0 / prior.v0 - mu_n * mu_n / v_n);
                -half * len * ln_2pi + half * (v_n.ln() - prior.v0.ln()) + prior.a0 * prior.b0.ln()
                    - a_n * b_n.ln()
                    + a_n.lgamma()
                    - prior.a0.lgamma()
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct SegmentStats<S> {
    len: S,
    sum: S,
    sum_sq: S,
    log_const: S,
}

/// `ln C(y+φ−1, y)`, the data-side constant of one NB observation.
#[inline]
fn nb_log_binomial_term<S: Scalar>(y: S, phi: S) -> S {
    (y + phi).lgamma() - phi.lgamma() - (y + S::one()).lgamma()
}

/// Fixed-parameter log pmfs, used by the simulation harness and by tests of
/// the φ → ∞ Poisson limit.
pub fn nb_log_pmf<S: Scalar>(y: u64, p: S, phi: S) -> S {
    let y = S::of(y as f64);
    nb_log_binomial_term(y, phi) + phi * p.ln() + y * (S::one() - p).ln()
}

pub fn poisson_log_pmf<S: Scalar>(y: u64, lambda: S) -> S {
    let y = S::of(y as f64);
    y * lambda.ln() - lambda - (y + S::one()).lgamma()
}

fn check_segment(i: usize, j: usize, n: usize) -> Result<()> {
    if i >= 1 && i < j && j <= n + 1 {
        Ok(())
    } else {
        Err(Error::SegmentOutOfRange { i, j, n })
    }
}

/// Prefix sufficient-statistics table for one (series, model) pair.
///
/// `table[i]` holds the statistics of the prefix `[1, i)`, so any segment
/// `[i, j)` reduces to two lookups and a subtraction. This is what makes the
/// `O(n²)` segment-matrix construction possible.
#[derive(Clone, Debug)]
pub struct CumulativeStats<S> {
    n: usize,
    model: EmissionModel<S>,
    // index 0 unused; index i in 1..=n+1 covers the prefix [1, i)
    sum: Vec<S>,
    sum_sq: Vec<S>,
    log_const: Vec<S>,
}

impl<S: Scalar> CumulativeStats<S> {
    pub fn new(series: &CountSeries<S>, model: &EmissionModel<S>) -> Result<Self> {
        if model.is_count_family() {
            series.validate_counts()?;
        }
        let n = series.len();
        let mut sum = vec![S::zero(); n + 2];
        let mut sum_sq = vec![S::zero(); n + 2];
        let mut log_const = vec![S::zero(); n + 2];
        for (t, &y) in series.values().iter().enumerate() {
            let i = t + 1;
            sum[i + 1] = sum[i] + y;
            sum_sq[i + 1] = sum_sq[i] + y * y;
            log_const[i + 1] = log_const[i]
                + match model {
                    EmissionModel::NegativeBinomial { phi, .. } => nb_log_binomial_term(y, *phi),
                    EmissionModel::Poisson { .. } => -(y + S::one()).lgamma(),
                    _ => S::zero(),
                };
        }
        Ok(Self {
            n,
            model: *model,
            sum,
            sum_sq,
            log_const,
        })
    }

    pub fn series_len(&self) -> usize {
        self.n
    }

    pub fn model(&self) -> &EmissionModel<S> {
        &self.model
    }

    /// Σ y over `[i, j)`.
    pub fn segment_sum(&self, i: usize, j: usize) -> S {
        self.sum[j] - self.sum[i]
    }

    /// Σ y² over `[i, j)`.
    pub fn segment_sum_sq(&self, i: usize, j: usize) -> S {
        self.sum_sq[j] - self.sum_sq[i]
    }

    /// Log of the data-only constant over `[i, j)`.
    pub fn segment_log_const(&self, i: usize, j: usize) -> S {
        self.log_const[j] - self.log_const[i]
    }

    /// O(1) segment marginal from the prefix table.
    pub fn log_segment_marginal(&self, i: usize, j: usize) -> Result<S> {
        check_segment(i, j, self.n)?;
        Ok(self.log_segment_marginal_unchecked(i, j))
    }

    #[inline]
    pub(crate) fn log_segment_marginal_unchecked(&self, i: usize, j: usize) -> S {
        let stats = SegmentStats {
            len: S::of((j - i) as f64),
            sum: self.segment_sum(i, j),
            sum_sq: self.segment_sum_sq(i, j),
            log_const: self.segment_log_const(i, j),
        };
        self.model.marginal_from_stats(&stats)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(vals: &[f64]) -> CountSeries<f64> {
        CountSeries::new(vals.to_vec(), "test").unwrap()
    }

    #[test]
    fn poisson_single_zero_gamma11() {
        // ∫ e^{-λ} · e^{-λ} dλ = 1/2
        let model = EmissionModel::poisson_with(GammaPrior {
            shape: 1.0,
            rate: 1.0,
        })
        .unwrap();
        let s = series(&[0.0, 0.0]);
        let got = model.log_segment_marginal(&s, 1, 2).unwrap();
        assert!((got - 0.5f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn nb_single_zero_uniform_prior() {
        // pmf at 0 is p; ∫₀¹ p dp = 1/2
        let model = EmissionModel::neg_binomial_with(
            1.0,
            BetaPrior {
                alpha: 1.0,
                beta: 1.0,
            },
        )
        .unwrap();
        let s = series(&[0.0, 0.0]);
        let got = model.log_segment_marginal(&s, 1, 2).unwrap();
        assert!((got - 0.5f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn poisson_302_gamma11_closed_form() {
        // (1/ 3!0!2!) ∫ λ^5 e^{-4λ} dλ = Γ(6) / (12 · 4^6) = 10/4096
        let model = EmissionModel::poisson_with(GammaPrior {
            shape: 1.0,
            rate: 1.0,
        })
        .unwrap();
        let s = series(&[3.0, 0.0, 2.0]);
        let got = model.log_segment_marginal(&s, 1, 4).unwrap();
        let want = (10.0f64 / 4096.0).ln();
        assert!((got - want).abs() < 1e-13, "got {got}, want {want}");
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn marginals_match_frozen_quadrature_values() {
        // Reference values from 40-digit numerical integration of
        // ∫ ∏_t P(y_t|θ) P(θ) dθ (mpmath), independent of the closed forms.
        let pois = EmissionModel::poisson(); // Gamma(1/2, 1/2)
        let s = series(&[3.0, 0.0, 2.0]);
        let got = pois.log_segment_marginal(&s, 1, 4).unwrap();
        assert!((got - -6.336227542098480734).abs() < 1e-12, "poisson {got}");

        let nb = EmissionModel::neg_binomial(2.0).unwrap(); // Beta(1/2, 1/2)
        let s = series(&[2.0, 0.0, 5.0]);
        let got = nb.log_segment_marginal(&s, 1, 4).unwrap();
        assert!((got - -7.609595684460783884).abs() < 1e-12, "nb {got}");

        let nb2 = EmissionModel::neg_binomial_with(
            0.6,
            BetaPrior {
                alpha: 2.0,
                beta: 3.0,
            },
        )
        .unwrap();
        let s = series(&[4.0, 1.0]);
        let got = nb2.log_segment_marginal(&s, 1, 3).unwrap();
        assert!((got - -5.174437784662144249).abs() < 1e-12, "nb2 {got}");

        let reals = series(&[0.5, -1.2, 2.0, 0.3]);
        let gauss = EmissionModel::gaussian_known_variance(2.0).unwrap();
        let got = gauss.log_segment_marginal(&reals, 1, 5).unwrap();
        assert!((got - -7.183767450155631773).abs() < 1e-12, "gauss {got}");

        let hetero = EmissionModel::gaussian_heteroscedastic();
        let got = hetero.log_segment_marginal(&reals, 1, 5).unwrap();
        assert!((got - -7.970504111602067450).abs() < 1e-12, "hetero {got}");
    }

    #[test]
    fn nb_log_const_sums_per_point_terms() {
        // [2,0,5] with φ=2: C(3,2)·C(1,0)·C(6,5) = 18
        let model = EmissionModel::neg_binomial(2.0).unwrap();
        let s = series(&[2.0, 0.0, 5.0]);
        let stats = CumulativeStats::new(&s, &model).unwrap();
        let got = stats.segment_log_const(1, 4);
        assert!((got - 18.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn prefix_sums_match_spec_examples() {
        let model = EmissionModel::poisson();
        let s = series(&[1.0, 1.0, 1.0]);
        let stats = CumulativeStats::new(&s, &model).unwrap();
        assert_eq!(stats.segment_sum(1, 3), 2.0);
        assert_eq!(stats.segment_sum(1, 1), 0.0); // empty prefix
    }

    #[test]
    fn table_agrees_with_direct_computation() {
        let model = EmissionModel::neg_binomial(0.7).unwrap();
        let s = series(&[4.0, 0.0, 1.0, 9.0, 2.0, 0.0, 3.0]);
        let stats = CumulativeStats::new(&s, &model).unwrap();
        for i in 1..=7 {
            for j in (i + 1)..=8 {
                let a = stats.log_segment_marginal(i, j).unwrap();
                let b = model.log_segment_marginal(&s, i, j).unwrap();
                assert!((a - b).abs() < 1e-11, "[{i},{j}): {a} vs {b}");
            }
        }
    }

    #[test]
    fn additivity_of_sufficient_statistics() {
        let model = EmissionModel::neg_binomial(1.3).unwrap();
        let s = series(&[5.0, 1.0, 0.0, 7.0, 3.0, 2.0]);
        let stats = CumulativeStats::new(&s, &model).unwrap();
        for i in 1..=5 {
            for j in (i + 1)..=6 {
                for k in (j + 1)..=7 {
                    assert_eq!(
                        stats.segment_sum(i, k),
                        stats.segment_sum(i, j) + stats.segment_sum(j, k)
                    );
                    let lc = stats.segment_log_const(i, k)
                        - stats.segment_log_const(i, j)
                        - stats.segment_log_const(j, k);
                    assert!(lc.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn count_family_rejects_fractional_values() {
        let model = EmissionModel::poisson();
        let s = series(&[1.0, 2.5]);
        assert!(matches!(
            model.log_segment_marginal(&s, 1, 3),
            Err(Error::NonIntegerCount { .. })
        ));
        // but the Gaussian families accept reals
        let g = EmissionModel::gaussian_known_variance(1.0).unwrap();
        assert!(g.log_segment_marginal(&s, 1, 3).is_ok());
    }

    #[test]
    fn segment_bounds_are_checked() {
        let model = EmissionModel::poisson();
        let s = series(&[1.0, 2.0, 3.0]);
        assert!(model.log_segment_marginal(&s, 0, 2).is_err());
        assert!(model.log_segment_marginal(&s, 2, 2).is_err());
        assert!(model.log_segment_marginal(&s, 1, 5).is_err());
        assert!(model.log_segment_marginal(&s, 1, 4).is_ok());
    }

    #[test]
    fn count_marginals_never_exceed_one() {
        // pmf ≤ 1 pointwise, prior integrates to 1, so log marginal ≤ 0;
        // appending an observation can only decrease it.
        let nb = EmissionModel::neg_binomial(2.0).unwrap();
        let po = EmissionModel::poisson();
        let vals = [13.0, 0.0, 4.0, 4.0, 1.0, 20.0, 2.0, 0.0];
        let s = series(&vals);
        for model in [nb, po] {
            let stats = CumulativeStats::new(&s, &model).unwrap();
            for j in 2..=9 {
                let m = stats.log_segment_marginal(1, j).unwrap();
                assert!(m <= 0.0);
                if j > 2 {
                    let prev = stats.log_segment_marginal(1, j - 1).unwrap();
                    assert!(m <= prev + 1e-12);
                }
            }
        }
    }

    #[test]
    fn nb_poisson_limit_per_point_pmf() {
        // With λ = φ(1−p)/p fixed and φ → 10⁶, the NB pmf approaches the
        // Poisson pmf; differences stay below 1e-3 per point for y ≤ 20.
        let phi = 1e6f64;
        for lambda in [0.5, 1.25, 5.0, 11.68] {
            let p = phi / (phi + lambda);
            for y in 0..=20u64 {
                let d = (nb_log_pmf(y, p, phi) - poisson_log_pmf(y, lambda)).abs();
                assert!(d <= 1e-3, "lambda={lambda} y={y} diff={d}");
            }
        }
    }

    #[test]
    fn invalid_hyperparameters_are_rejected() {
        assert!(EmissionModel::neg_binomial(0.0).is_err());
        assert!(EmissionModel::neg_binomial(-1.0).is_err());
        assert!(EmissionModel::neg_binomial_with(
            1.0,
            BetaPrior {
                alpha: 0.0,
                beta: 1.0
            }
        )
        .is_err());
        assert!(EmissionModel::poisson_with(GammaPrior {
            shape: 1.0,
            rate: -2.0
        })
        .is_err());
        assert!(EmissionModel::gaussian_known_variance(0.0).is_err());
        assert!(EmissionModel::gaussian_heteroscedastic_with(NigPrior {
            mu0: 0.0,
            v0: 1.0,
            a0: 0.5,
            b0: 0.0
        })
        .is_err());
    }
}
