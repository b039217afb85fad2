// SPDX-License-Identifier: MIT OR Apache-2.0

//! Shared test support: an adaptive-quadrature oracle for segment marginals
//! and random case generation.
//!
//! The quadrature path evaluates `∫ ∏_t P(y_t|θ) P(θ) dθ` literally — prior
//! density times likelihood, point by point — so it shares no algebra with
//! the closed forms in the emission module.

#![allow(dead_code)]

use ebcp::emission::EmissionModel;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[allow(clippy::excessive_precision)]
pub const LN_2PI: f64 = 1.8378770664093454835606594728112352797227949472756;

/// `x · ln(y)` with the `0 · ln(0) = 0` convention.
fn xlogy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

fn lgamma(x: f64) -> f64 {
    ebcp::Scalar::lgamma(x)
}

// ---------------------------------------------------------------------------
// scaled adaptive Simpson over a log-domain integrand
// ---------------------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
fn simpson_piece<F: Fn(f64) -> f64>(
    g: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = g(lm);
    let frm = g(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let refined = left + right;
    if depth == 0 || (refined - whole).abs() <= 15.0 * tol {
        refined + (refined - whole) / 15.0
    } else {
        simpson_piece(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_piece(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// `log ∫_lo^hi exp(log_f(x)) dx` by max-scaled piecewise-adaptive Simpson
/// seeded on a uniform scan grid (so narrow peaks cannot be skipped).
pub fn log_quad<F: Fn(f64) -> f64>(log_f: F, lo: f64, hi: f64, scan: usize) -> f64 {
    assert!(hi > lo && scan >= 8);
    let h = (hi - lo) / scan as f64;
    let logs: Vec<f64> = (0..=scan).map(|i| log_f(lo + h * i as f64)).collect();
    let m = logs
        .iter()
        .copied()
        .filter(|v| !v.is_nan())
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(m.is_finite(), "integrand vanished everywhere on the grid");
    // The scan maximum can undershoot the true peak by a little; clamp the
    // exponent so a between-node evaluation can never overflow.
    let g = |x: f64| {
        let v = log_f(x) - m;
        if v.is_nan() {
            0.0
        } else {
            v.min(700.0).exp()
        }
    };
    // rough scale for the absolute tolerance
    let rough: f64 = logs
        .iter()
        .map(|&l| if l.is_nan() { 0.0 } else { (l - m).exp() })
        .sum::<f64>()
        .max(1.0)
        * h;
    // Log values of magnitude |m| carry float jitter of about ε·|m|, which
    // bounds the achievable relative accuracy; demanding more makes the
    // refinement chase rounding noise forever.
    let noise_floor = 8.0 * f64::EPSILON * m.abs().max(1.0);
    let tol_piece = noise_floor.max(1e-12) * rough / scan as f64;
    let mut total = 0.0;
    for i in 0..scan {
        let a = lo + h * i as f64;
        let b = a + h;
        let fa = g(a);
        let fb = g(b);
        let mid = 0.5 * (a + b);
        let fm = g(mid);
        let whole = h / 6.0 * (fa + 4.0 * fm + fb);
        total += simpson_piece(&g, a, b, fa, fm, fb, whole, tol_piece, 22);
    }
    m + total.ln()
}

/// Gauss–Legendre nodes and weights on `[−1, 1]` (Newton on the Legendre
/// recurrence), for fixed-order integration of entire integrands.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = pk;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `log ∫_lo^hi exp(log_f(x)) dx` with a fixed Gauss–Legendre rule.
fn log_gl<F: Fn(f64) -> f64>(log_f: F, lo: f64, hi: f64, nodes: &[f64], weights: &[f64]) -> f64 {
    let c = 0.5 * (hi + lo);
    let h = 0.5 * (hi - lo);
    let logs: Vec<f64> = nodes.iter().map(|&t| log_f(c + h * t)).collect();
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = logs.iter().zip(weights).map(|(&l, &w)| w * (l - m).exp()).sum();
    m + (sum * h).ln()
}

// ---------------------------------------------------------------------------
// quadrature versions of each family's segment marginal
// ---------------------------------------------------------------------------

/// Quadrature `log P(Y_J|J)` for any emission model.
pub fn quad_log_marginal(model: &EmissionModel<f64>, seg: &[f64]) -> f64 {
    match *model {
        EmissionModel::NegativeBinomial { phi, prior } => {
            nb_quad(seg, phi, prior.alpha, prior.beta)
        }
        EmissionModel::Poisson { prior } => poisson_quad(seg, prior.shape, prior.rate),
        EmissionModel::GaussianKnownVariance { sigma2, prior } => {
            gauss_kv_quad(seg, sigma2, prior.mu0, prior.v0)
        }
        EmissionModel::GaussianHeteroscedastic { prior } => {
            nig_quad(seg, prior.mu0, prior.v0, prior.a0, prior.b0)
        }
    }
}

/// NB with Beta prior, integrated over `p = sin²u` to absorb the endpoint
/// singularities of Jeffreys-style priors.
fn nb_quad(seg: &[f64], phi: f64, alpha: f64, beta: f64) -> f64 {
    let ln_beta_norm = lgamma(alpha) + lgamma(beta) - lgamma(alpha + beta);
    let log_f = |u: f64| {
        let (sin, cos) = (u.sin(), u.cos());
        let p = sin * sin;
        let q = cos * cos;
        let mut acc = 0.0;
        for &y in seg {
            // log NB pmf at p
            acc += lgamma(y + phi) - lgamma(phi) - lgamma(y + 1.0) + phi * p.ln() + xlogy(y, q);
        }
        // Beta prior density at p, then the jacobian 2 sin u cos u
        acc += xlogy(alpha - 1.0, p) + xlogy(beta - 1.0, q) - ln_beta_norm;
        acc + (2.0 * sin * cos).ln()
    };
    let eps = 1e-13;
    log_quad(log_f, eps, std::f64::consts::FRAC_PI_2 - eps, 512)
}

/// Poisson with Gamma prior, integrated over `λ = u²`.
fn poisson_quad(seg: &[f64], shape: f64, rate: f64) -> f64 {
    let total: f64 = seg.iter().sum();
    let len = seg.len() as f64;
    let lambda_max = ((shape + total + 1.0) + 45.0 * (shape + total + 1.0).sqrt()) / (rate + len);
    let log_f = |u: f64| {
        let lam = u * u;
        let mut acc = 0.0;
        for &y in seg {
            acc += xlogy(y, lam) - lam - lgamma(y + 1.0);
        }
        acc += shape * rate.ln() - lgamma(shape) + xlogy(shape - 1.0, lam) - rate * lam;
        acc + (2.0 * u).ln()
    };
    log_quad(log_f, 1e-13, lambda_max.sqrt(), 512)
}

/// Bounds for a product of Gaussians in `μ`: all likelihood terms share
/// variance `var`, the prior has variance `v0·var`, so the product is itself
/// Gaussian with precision `(L + 1/v0)/var` around the weighted mean.
fn gaussian_product_bounds(seg: &[f64], var: f64, mu0: f64, v0: f64, sds: f64) -> (f64, f64) {
    let total: f64 = seg.iter().sum();
    let center = (total + mu0 / v0) / (seg.len() as f64 + 1.0 / v0);
    let halfwidth = sds * (var / (seg.len() as f64 + 1.0 / v0)).sqrt();
    (center - halfwidth, center + halfwidth)
}

fn gauss_kv_quad(seg: &[f64], sigma2: f64, mu0: f64, v0: f64) -> f64 {
    let (lo, hi) = gaussian_product_bounds(seg, sigma2, mu0, v0, 20.0);
    let log_f = |mu: f64| {
        let mut acc = 0.0;
        for &y in seg {
            acc += -0.5 * (LN_2PI + sigma2.ln()) - (y - mu) * (y - mu) / (2.0 * sigma2);
        }
        let pv = v0 * sigma2;
        acc - 0.5 * (LN_2PI + pv.ln()) - (mu - mu0) * (mu - mu0) / (2.0 * pv)
    };
    log_quad(log_f, lo, hi, 512)
}

/// Heteroscedastic Gaussian under the NIG prior: genuinely two-dimensional
/// quadrature, outer over `w = ln σ²`, inner over `μ`.
fn nig_quad(seg: &[f64], mu0: f64, v0: f64, a0: f64, b0: f64) -> f64 {
    let sum_sq: f64 = seg.iter().map(|y| y * y).sum();
    let w_lo = (b0 / (a0 + seg.len() as f64 / 2.0 + 1.0)).ln() - 30.0;
    let w_hi = (b0 + 0.5 * sum_sq + 0.5 * mu0 * mu0 / v0 + 1.0).ln() + 30.0;
    // The inner integrand in μ is an entire function (product of Gaussians),
    // so a fixed 64-node Gauss–Legendre rule over ±12 posterior sds already
    // integrates it to ~1e-15 relative.
    let (nodes, weights) = gauss_legendre(64);
    let log_outer = |w: f64| {
        let var = w.exp();
        let (lo, hi) = gaussian_product_bounds(seg, var, mu0, v0, 12.0);
        let log_inner = |mu: f64| {
            let mut acc = 0.0;
            for &y in seg {
                acc += -0.5 * (LN_2PI + var.ln()) - (y - mu) * (y - mu) / (2.0 * var);
            }
            let pv = v0 * var;
            acc - 0.5 * (LN_2PI + pv.ln()) - (mu - mu0) * (mu - mu0) / (2.0 * pv)
        };
        let mu_integral = log_gl(log_inner, lo, hi, &nodes, &weights);
        // inverse-gamma prior density on σ², then the jacobian dσ² = e^w dw
        let ig = a0 * b0.ln() - lgamma(a0) - (a0 + 1.0) * var.ln() - b0 / var;
        mu_integral + ig + w
    };
    log_quad(log_outer, w_lo, w_hi, 256)
}

// ---------------------------------------------------------------------------
// randomized cases
// ---------------------------------------------------------------------------

/// Uniformly chosen emission model for randomized sweeps. `idx` cycles
/// through the families so every sweep covers all of them.
pub fn random_model(rng: &mut ChaCha8Rng, idx: usize) -> EmissionModel<f64> {
    match idx % 5 {
        0 => EmissionModel::neg_binomial(0.5).unwrap(),
        1 => EmissionModel::neg_binomial(2.0).unwrap(),
        2 => EmissionModel::neg_binomial(10.0).unwrap(),
        3 => EmissionModel::poisson(),
        _ => EmissionModel::gaussian_known_variance(rng.random_range(0.5..3.0)).unwrap(),
    }
}

/// Random values valid for the given model (counts ≤ 20 or reals).
pub fn random_values(rng: &mut ChaCha8Rng, model: &EmissionModel<f64>, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| {
            if model.is_count_family() {
                rng.random_range(0..=20u64) as f64
            } else {
                rng.random_range(-5.0..5.0)
            }
        })
        .collect()
}

/// `|a − b| ≤ tol · max(1, |b|)` — the log-space relative comparison.
pub fn log_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

/// Relative closeness for probabilities and ratios, with an absolute floor.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    if a == b {
        return true; // covers 0 == 0 and ∞ == ∞
    }
    (a - b).abs() <= tol * b.abs().max(1e-12)
}
