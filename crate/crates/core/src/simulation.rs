// SPDX-License-Identifier: MIT OR Apache-2.0

//! Three-profile simulation benchmark and the abacus study.
//!
//! The benchmark draws three independent length-700 profiles with 7 segments
//! each. Profiles 1 and 2 share the partition
//! `m = (1, 101, 201, 301, 401, 501, 601, 701)`; profile 3 has its `k`th
//! change-point shifted by `d_k = 2^{k−1}`. Odd segments draw from the
//! baseline distribution (`p₀` or `λ₀`), even segments from the signal
//! distribution (`p₁` or `λ₁`), where the odds ratio `s` fixes
//! `odds(p₁) = odds(p₀)/s` (equivalently `λ₁ = s·λ₀`).
//!
//! The abacus study runs many replicates: for each one it computes, per
//! change-point index `k`, the posterior probability that the three
//! profiles share that change-point (`p₀ = 1/2`, `K = 7`), both in the
//! shifted design (`d = 2^{k−1}`) and in a control configuration where a
//! fresh third profile uses the unshifted partition (`d = 0`). Negative
//! binomial analyses either use the true dispersion or estimate it per
//! profile with the sliding-window moments estimator.
//!
//! Everything is deterministic given the seed; replicates are independent
//! and run in parallel.

use crate::comparison::{posterior_common, CommonChangePointQuery};
use crate::dispersion::estimate_dispersion;
use crate::emission::EmissionModel;
use crate::error::{Error, Result};
use crate::segmentation::{PowerTables, SegmentMatrix};
use crate::series::CountSeries;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use rayon::prelude::*;
use std::io::Write;

/// Series length of the benchmark design.
pub const SERIES_LEN: usize = 700;
/// Segments per profile.
pub const SEGMENT_COUNT: usize = 7;

/// Emission family of the benchmark with its baseline parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SimulationFamily {
    /// `NB(p₀, φ)` on odd segments, `NB(p₁, φ)` on even segments.
    NegBinomial { p0: f64, phi: f64 },
    /// `Poisson(λ₀)` on odd segments, `Poisson(λ₁)` on even segments.
    Poisson { lambda0: f64 },
}

/// Full configuration of one simulation cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimulationConfig {
    pub family: SimulationFamily,
    /// Odds ratio `s = odds(p₀)/odds(p₁)` (for Poisson, `λ₁/λ₀`).
    pub odds_ratio: f64,
    pub replicates: usize,
    pub seed: u64,
    /// Analyze with the generating φ instead of estimating it (NB only).
    pub use_true_phi: bool,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        match self.family {
            SimulationFamily::NegBinomial { p0, phi } => {
                if !(p0 > 0.0 && p0 < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "p0 must lie in (0, 1), got {p0}"
                    )));
                }
                if !(phi > 0.0 && phi.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "phi must be finite and > 0, got {phi}"
                    )));
                }
            }
            SimulationFamily::Poisson { lambda0 } => {
                if !(lambda0 > 0.0 && lambda0.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "lambda0 must be finite and > 0, got {lambda0}"
                    )));
                }
            }
        }
        if !(self.odds_ratio > 0.0 && self.odds_ratio.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "odds ratio must be finite and > 0, got {}",
                self.odds_ratio
            )));
        }
        if self.replicates == 0 {
            return Err(Error::InvalidParameter("need at least one replicate".into()));
        }
        Ok(())
    }

    /// Baseline and signal parameters: `(p₀, p₁)` or `(λ₀, λ₁)`.
    ///
    /// `p₁` comes from the exact odds equation `odds(p₁) = odds(p₀)/s`
    /// rather than any rounded tabulation; `λ₁ = s·λ₀`.
    pub fn segment_params(&self) -> (f64, f64) {
        match self.family {
            SimulationFamily::NegBinomial { p0, .. } => {
                let odds1 = p0 / (1.0 - p0) / self.odds_ratio;
                (p0, odds1 / (1.0 + odds1))
            }
            SimulationFamily::Poisson { lambda0 } => (lambda0, lambda0 * self.odds_ratio),
        }
    }
}

/// Partition boundaries of the design: unshifted
/// `m = (1, 101, …, 701)`, or with `τ_k` moved ahead by `2^{k−1}`.
pub fn profile_boundaries(shifted: bool) -> [usize; SEGMENT_COUNT + 1] {
    let mut b = [0usize; SEGMENT_COUNT + 1];
    for (k, slot) in b.iter_mut().enumerate() {
        *slot = 1 + 100 * k;
        if shifted && (1..SEGMENT_COUNT).contains(&k) {
            *slot += 1usize << (k - 1);
        }
    }
    b
}

fn sample_count(rng: &mut ChaCha8Rng, family: &SimulationFamily, param: f64, phi: f64) -> f64 {
    match family {
        SimulationFamily::NegBinomial { .. } => {
            // gamma–Poisson mixture: robust for small φ
            let scale = (1.0 - param) / param;
            let lam: f64 = Gamma::new(phi, scale).expect("valid gamma").sample(rng);
            if lam > 1e-12 {
                Poisson::new(lam).expect("valid poisson").sample(rng)
            } else {
                0.0
            }
        }
        SimulationFamily::Poisson { .. } => {
            Poisson::new(param).expect("valid poisson").sample(rng)
        }
    }
}

fn sample_profile(
    rng: &mut ChaCha8Rng,
    config: &SimulationConfig,
    boundaries: &[usize; SEGMENT_COUNT + 1],
    label: &str,
) -> CountSeries<f64> {
    let (param0, param1) = config.segment_params();
    let phi = match config.family {
        SimulationFamily::NegBinomial { phi, .. } => phi,
        SimulationFamily::Poisson { .. } => f64::NAN,
    };
    let mut values = Vec::with_capacity(SERIES_LEN);
    for seg in 0..SEGMENT_COUNT {
        // segments 1,3,5,7 are baseline; 2,4,6 carry the signal
        let param = if seg % 2 == 0 { param0 } else { param1 };
        for _ in boundaries[seg]..boundaries[seg + 1] {
            values.push(sample_count(rng, &config.family, param, phi));
        }
    }
    CountSeries::new(values, label).expect("design length is fixed")
}

fn replicate_rng(seed: u64, replicate: usize) -> ChaCha8Rng {
    // splitmix64 over (seed, replicate) gives independent streams
    let mut z = seed
        .wrapping_add(0x9e3779b97f4a7c15u64.wrapping_mul(replicate as u64 + 1));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    ChaCha8Rng::seed_from_u64(z ^ (z >> 31))
}

/// The three benchmark profiles of one replicate (replicate 0 of the
/// config's seed): profiles 1 and 2 on `m`, profile 3 shifted.
pub fn generate_profiles(
    config: &SimulationConfig,
) -> Result<[CountSeries<f64>; 3]> {
    config.validate()?;
    let mut rng = replicate_rng(config.seed, 0);
    Ok(generate_replicate_profiles(&mut rng, config).0)
}

/// Draws the shifted trio plus the control copy of profile 3, in a fixed
/// order so the stream is reproducible.
fn generate_replicate_profiles(
    rng: &mut ChaCha8Rng,
    config: &SimulationConfig,
) -> ([CountSeries<f64>; 3], CountSeries<f64>) {
    let m = profile_boundaries(false);
    let m3 = profile_boundaries(true);
    let p1 = sample_profile(rng, config, &m, "profile-1");
    let p2 = sample_profile(rng, config, &m, "profile-2");
    let p3 = sample_profile(rng, config, &m3, "profile-3");
    let p3_control = sample_profile(rng, config, &m, "profile-3-control");
    ([p1, p2, p3], p3_control)
}

/// One abacus observation: the posterior probability of a common `k`th
/// change-point across the three profiles of one replicate.
///
/// `d` is the designed shift of profile 3 at that change-point: `2^{k−1}`
/// in the shifted configuration, `0` in the control configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct AbacusRow {
    pub replicate: usize,
    pub k: usize,
    pub d: usize,
    pub posterior_e0: f64,
    /// Estimated dispersion per profile; `None` when not estimated
    /// (Poisson family, `use_true_phi`, or estimator fallback).
    pub phi_hat: [Option<f64>; 3],
    /// Per profile: the dispersion estimator fell back and the profile was
    /// analyzed under the Poisson model.
    pub fallback: [bool; 3],
}

struct AnalyzedProfile {
    tables: PowerTables<f64>,
    phi_hat: Option<f64>,
    fallback: bool,
}

fn analyze_profile(series: &CountSeries<f64>, config: &SimulationConfig) -> Result<AnalyzedProfile> {
    let (model, phi_hat, fallback) = match config.family {
        SimulationFamily::Poisson { .. } => (EmissionModel::poisson(), None, false),
        SimulationFamily::NegBinomial { phi, .. } => {
            if config.use_true_phi {
                (EmissionModel::neg_binomial(phi)?, None, false)
            } else {
                match estimate_dispersion(series) {
                    Ok(est) => match est.phi_hat {
                        Some(phi_hat) => {
                            (EmissionModel::neg_binomial(phi_hat)?, Some(phi_hat), false)
                        }
                        // estimator recommends the Poisson limit
                        None => (EmissionModel::poisson(), None, true),
                    },
                    Err(Error::ConstantSeries) => (EmissionModel::poisson(), None, true),
                    Err(e) => return Err(e),
                }
            }
        }
    };
    let matrix = SegmentMatrix::build(series, &model)?;
    let tables = PowerTables::build(&matrix, SEGMENT_COUNT)?;
    Ok(AnalyzedProfile {
        tables,
        phi_hat,
        fallback,
    })
}

fn replicate_rows(config: &SimulationConfig, replicate: usize) -> Result<Vec<AbacusRow>> {
    let mut rng = replicate_rng(config.seed, replicate);
    let ([p1, p2, p3], p3_control) = generate_replicate_profiles(&mut rng, config);

    let a1 = analyze_profile(&p1, config)?;
    let a2 = analyze_profile(&p2, config)?;
    let a3 = analyze_profile(&p3, config)?;
    let a3c = analyze_profile(&p3_control, config)?;

    let mut rows = Vec::with_capacity(2 * (SEGMENT_COUNT - 1));
    // control configuration first: all three profiles on m, so d = 0
    for (third, is_control) in [(&a3c, true), (&a3, false)] {
        let tables = [&a1.tables, &a2.tables, &third.tables];
        let phi_hat = [a1.phi_hat, a2.phi_hat, third.phi_hat];
        let fallback = [a1.fallback, a2.fallback, third.fallback];
        for k in 1..SEGMENT_COUNT {
            let specs = vec![(SEGMENT_COUNT, k); 3];
            let query = CommonChangePointQuery::new(SERIES_LEN, specs, 0.5)?;
            let res = posterior_common(&query, &tables)?;
            rows.push(AbacusRow {
                replicate,
                k,
                d: if is_control { 0 } else { 1usize << (k - 1) },
                posterior_e0: res.posterior_e0,
                phi_hat,
                fallback,
            });
        }
    }
    Ok(rows)
}

/// Run the abacus study: every replicate yields one row per change-point
/// index for the control (`d = 0`) and the shifted (`d = 2^{k−1}`)
/// configuration. Replicates run in parallel; the output order (and
/// content, given a seed) is deterministic.
pub fn run_abacus(config: &SimulationConfig) -> Result<Vec<AbacusRow>> {
    config.validate()?;
    let per_rep: Vec<Result<Vec<AbacusRow>>> = (0..config.replicates)
        .into_par_iter()
        .map(|rep| replicate_rows(config, rep))
        .collect();
    let mut rows = Vec::with_capacity(config.replicates * 2 * (SEGMENT_COUNT - 1));
    for rep in per_rep {
        rows.extend(rep?);
    }
    Ok(rows)
}

/// Median of the `posterior_e0` values in the rows selected by `pred`.
pub fn median_posterior<F: Fn(&AbacusRow) -> bool>(rows: &[AbacusRow], pred: F) -> Option<f64> {
    let mut vals: Vec<f64> = rows
        .iter()
        .filter(|r| pred(r))
        .map(|r| r.posterior_e0)
        .collect();
    if vals.is_empty() {
        return None;
    }
    vals.sort_by(f64::total_cmp);
    let mid = vals.len() / 2;
    Some(if vals.len() % 2 == 1 {
        vals[mid]
    } else {
        0.5 * (vals[mid - 1] + vals[mid])
    })
}

/// Write rows as plot-ready CSV, one row per (replicate, configuration, k).
pub fn write_abacus_csv<W: Write>(
    out: &mut W,
    config: &SimulationConfig,
    rows: &[AbacusRow],
) -> std::io::Result<()> {
    writeln!(
        out,
        "family,p0_or_lambda0,s,phi,use_true_phi,replicate,k,d,posterior_e0,\
         phi_hat_1,phi_hat_2,phi_hat_3,fallback_1,fallback_2,fallback_3"
    )?;
    let (family, base, phi) = match config.family {
        SimulationFamily::NegBinomial { p0, phi } => ("nb", p0, Some(phi)),
        SimulationFamily::Poisson { lambda0 } => ("poisson", lambda0, None),
    };
    let fmt_opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for row in rows {
        writeln!(
            out,
            "{family},{base},{s},{phi},{utp},{rep},{k},{d},{post},{h1},{h2},{h3},{f1},{f2},{f3}",
            s = config.odds_ratio,
            phi = fmt_opt(phi),
            utp = config.use_true_phi,
            rep = row.replicate,
            k = row.k,
            d = row.d,
            post = row.posterior_e0,
            h1 = fmt_opt(row.phi_hat[0]),
            h2 = fmt_opt(row.phi_hat[1]),
            h3 = fmt_opt(row.phi_hat[2]),
            f1 = row.fallback[0],
            f2 = row.fallback[1],
            f3 = row.fallback[2],
        )?;
    }
    Ok(())
}
