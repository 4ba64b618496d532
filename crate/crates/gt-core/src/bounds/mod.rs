//! Closed-form analysis: concentration functions, non-asymptotic error
//! bounds, asymptotic achievability/converse threshold coefficients, the
//! joint-decoding optima, and rate-curve generation.
//!
//! Threshold conventions: with k = p^theta, a threshold is reported as the
//! leading coefficient `coeff_nats` such that n = coeff_nats * k * ln(p/k)
//! tests suffice (or are required), using the exact substitutions
//! ln p = ln(p/k)/(1-theta) and ln k = theta * ln(p/k)/(1-theta). The rate
//! constant on the curve axis is c = 1/(coeff_nats * ln 2), so that
//! n = (1/c) * k * log2(p/k). Slack factors are dropped: coefficients are
//! the eta -> 0, delta1 -> 0 limits.

mod optimize;

use std::f64::consts::LN_2;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{info_density_table, ChannelMarginals, InfoDensityStats};
use crate::error::{Error, Result};
use crate::fmtnum::sig9;
use crate::rng::stream;

use optimize::{maximize, minimize};

/// Grid used before golden-section refinement.
const OPT_GRID: usize = 2048;
/// Golden-section interval tolerance.
const OPT_TOL: f64 = 1e-10;
/// Search interval for delta2 minimizations.
const DELTA2_LO: f64 = 1e-6;
const DELTA2_HI: f64 = 1.0 - 1e-6;
/// Search interval for nu optimizations.
const NU_LO: f64 = 1e-3;
const NU_HI: f64 = 10.0;

/// Binary entropy in nats, with 0 ln 0 = 0.
pub fn binary_entropy(x: f64) -> f64 {
    debug_assert!(
        (-1e-9..=1.0 + 1e-9).contains(&x),
        "probability out of range: {x}"
    );
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.ln() - (1.0 - x) * (1.0 - x).ln()
}

/// Binary KL divergence D2(a || b) in nats. Returns +inf when b is 0 or 1
/// with mismatched a.
pub fn kl_binary(a: f64, b: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&a), "a out of range: {a}");
    debug_assert!((0.0..=1.0).contains(&b), "b out of range: {b}");
    let mut acc = 0.0;
    if a > 0.0 {
        acc += a * (a / b).ln();
    }
    if a < 1.0 {
        acc += (1.0 - a) * ((1.0 - a) / (1.0 - b)).ln();
    }
    acc
}

/// Binary convolution a * b = a(1-b) + b(1-a).
pub fn binary_convolution(a: f64, b: f64) -> f64 {
    a * (1.0 - b) + b * (1.0 - a)
}

/// Concentration bound for the noiseless channel at the balanced design:
/// exp(-(n (ln 2)^2 / k) ((1-d2) ln(1-d2) + d2)), clamped to [0, 1].
pub fn psi_noiseless(n: usize, k: usize, delta2: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    if !(delta2 > 0.0 && delta2 < 1.0) {
        return Err(Error::invalid(format!(
            "delta2 must lie in (0, 1) (got {delta2})"
        )));
    }
    let rate = LN_2 * LN_2 / k as f64 * ((1.0 - delta2) * (1.0 - delta2).ln() + delta2);
    Ok((-(n as f64) * rate).exp().clamp(0.0, 1.0))
}

/// Bernstein concentration bound:
/// 2 exp(-(1/2)(n/k) c_mean^2 d2^2 / (c_var + c_mean c_max d2 / 3)),
/// clamped to [0, 1]. Requires a finite c_max.
pub fn psi_bernstein(n: usize, k: usize, stats: &InfoDensityStats, delta2: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    if delta2.is_nan() || delta2 <= 0.0 {
        return Err(Error::invalid(format!(
            "delta2 must be positive (got {delta2})"
        )));
    }
    if !stats.c_max.is_finite() {
        return Err(Error::InfiniteCMax);
    }
    let numer = 0.5 * n as f64 / k as f64 * stats.c_mean * stats.c_mean * delta2 * delta2;
    let denom = stats.c_var + stats.c_mean * stats.c_max * delta2 / 3.0;
    let exponent = if denom > 0.0 { -numer / denom } else { 0.0 };
    Ok((2.0 * exponent.exp()).clamp(0.0, 1.0))
}

/// Monte Carlo estimate of a score tail probability.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TailEstimate {
    /// Estimated P[i1^n <= threshold].
    pub probability: f64,
    /// Binomial standard error of the estimate.
    pub std_error: f64,
    pub samples: u64,
}

fn binom_draw<R: Rng>(rng: &mut R, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("valid binomial").sample(rng)
}

/// Score of an outcome-count composition against an information-density
/// table; zero counts contribute nothing even where the table is -inf.
fn composition_score(iota: &[[f64; 2]; 2], n11: u64, n10: u64, n01: u64, n00: u64) -> f64 {
    let mut score = 0.0;
    for (count, v) in [
        (n11, iota[1][1]),
        (n10, iota[1][0]),
        (n01, iota[0][1]),
        (n00, iota[0][0]),
    ] {
        if count > 0 {
            score += count as f64 * v;
        }
    }
    score
}

/// Estimate P[i1^n(X1, Y) <= gamma] by Monte Carlo over i.i.d. draws from
/// the exact marginals. The n-test score depends on the draw only through
/// its four outcome counts, so each replicate is three binomial draws.
pub fn score_tail_mc(
    marginals: &ChannelMarginals,
    n: usize,
    gamma: f64,
    samples: u64,
    seed: u64,
) -> Result<TailEstimate> {
    if samples == 0 {
        return Err(Error::invalid("samples must be positive"));
    }
    let iota = info_density_table(marginals).iota;
    let px1 = marginals.p_x[1];
    let p11 = marginals.p_y_given_x[1][1];
    let p01 = marginals.p_y_given_x[0][1];
    let mut rng = stream(seed, "score-tail", &[n as u64]);
    let mut hits = 0u64;
    for _ in 0..samples {
        let n1 = binom_draw(&mut rng, n as u64, px1);
        let n11 = binom_draw(&mut rng, n1, p11);
        let n01 = binom_draw(&mut rng, n as u64 - n1, p01);
        let score = composition_score(&iota, n11, n1 - n11, n01, (n as u64 - n1) - n01);
        if score <= gamma {
            hits += 1;
        }
    }
    let probability = hits as f64 / samples as f64;
    Ok(TailEstimate {
        probability,
        std_error: (probability * (1.0 - probability) / samples as f64).sqrt(),
        samples,
    })
}

/// Exact P[i1^n <= gamma] by enumerating all outcome-count compositions.
/// Cubic in n; offered as a cross-check oracle for n <= 40.
pub fn score_tail_exact(marginals: &ChannelMarginals, n: usize, gamma: f64) -> Result<f64> {
    if n > 40 {
        return Err(Error::invalid(format!(
            "exact enumeration is limited to n <= 40 (got {n})"
        )));
    }
    let iota = info_density_table(marginals).iota;
    let joint = [
        [
            marginals.p_x[0] * marginals.p_y_given_x[0][0],
            marginals.p_x[0] * marginals.p_y_given_x[0][1],
        ],
        [
            marginals.p_x[1] * marginals.p_y_given_x[1][0],
            marginals.p_x[1] * marginals.p_y_given_x[1][1],
        ],
    ];
    let mut ln_fact = vec![0.0f64; n + 1];
    for i in 1..=n {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    let ln_or_skip = |p: f64, count: usize| -> Option<f64> {
        if count == 0 {
            Some(0.0)
        } else if p > 0.0 {
            Some(count as f64 * p.ln())
        } else {
            None
        }
    };
    let mut acc = 0.0f64;
    for n11 in 0..=n {
        for n10 in 0..=n - n11 {
            for n01 in 0..=n - n11 - n10 {
                let n00 = n - n11 - n10 - n01;
                let (Some(a), Some(b), Some(c), Some(d)) = (
                    ln_or_skip(joint[1][1], n11),
                    ln_or_skip(joint[1][0], n10),
                    ln_or_skip(joint[0][1], n01),
                    ln_or_skip(joint[0][0], n00),
                ) else {
                    continue;
                };
                let score =
                    composition_score(&iota, n11 as u64, n10 as u64, n01 as u64, n00 as u64);
                if score <= gamma {
                    let lp = ln_fact[n] - ln_fact[n11] - ln_fact[n10] - ln_fact[n01] - ln_fact[n00]
                        + a
                        + b
                        + c
                        + d;
                    acc += lp.exp();
                }
            }
        }
    }
    Ok(acc.clamp(0.0, 1.0))
}

/// Union-bound upper bound on the exact-recovery error probability:
/// k P[i1^n <= gamma] + (p - k) e^{-gamma}. The second term is exact; the
/// first is estimated by Monte Carlo. `bound` is not clamped (it can exceed
/// one); clamp at presentation time.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct UpperBoundEvaluation {
    pub bound: f64,
    /// k * P[i1^n <= gamma].
    pub miss_term: f64,
    /// (p - k) e^{-gamma}, exact.
    pub false_alarm_term: f64,
    /// Standard error of `bound` (k times the tail standard error).
    pub std_error: f64,
    pub tail: TailEstimate,
}

pub fn pe_upper_bound_exact(
    n: usize,
    p: usize,
    marginals: &ChannelMarginals,
    gamma: f64,
    samples: u64,
    seed: u64,
) -> Result<UpperBoundEvaluation> {
    let k = marginals.k;
    if k >= p {
        return Err(Error::invalid(format!("need k < p (k = {k}, p = {p})")));
    }
    if gamma.is_nan() || gamma <= 0.0 {
        return Err(Error::invalid(format!(
            "gamma must be positive (got {gamma})"
        )));
    }
    let tail = score_tail_mc(marginals, n, gamma, samples, seed)?;
    let miss_term = k as f64 * tail.probability;
    let false_alarm_term = (p - k) as f64 * (-gamma).exp();
    Ok(UpperBoundEvaluation {
        bound: miss_term + false_alarm_term,
        miss_term,
        false_alarm_term,
        std_error: k as f64 * tail.std_error,
        tail,
    })
}

/// Per-item converse lower bound: (k/p) P[i1^n <= ln((p-k)/k)].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LowerBoundEvaluation {
    pub bound: f64,
    /// The score threshold ln((p - k)/k).
    pub threshold: f64,
    /// Standard error of `bound`.
    pub std_error: f64,
    pub tail: TailEstimate,
}

pub fn pe_lower_bound_item(
    n: usize,
    p: usize,
    marginals: &ChannelMarginals,
    samples: u64,
    seed: u64,
) -> Result<LowerBoundEvaluation> {
    let k = marginals.k;
    if k >= p {
        return Err(Error::invalid(format!("need k < p (k = {k}, p = {p})")));
    }
    let threshold = ((p - k) as f64 / k as f64).ln();
    let tail = score_tail_mc(marginals, n, threshold, samples, seed)?;
    let ratio = k as f64 / p as f64;
    Ok(LowerBoundEvaluation {
        bound: ratio * tail.probability,
        threshold,
        std_error: ratio * tail.std_error,
        tail,
    })
}

/// Sparsity regime k = Theta(p^theta), theta in (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparsityRegime(f64);

impl SparsityRegime {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::invalid(format!(
                "theta must lie in (0, 1) (got {theta})"
            )));
        }
        Ok(SparsityRegime(theta))
    }

    pub fn theta(&self) -> f64 {
        self.0
    }

    /// log k / log(p/k) = theta / (1 - theta), exact for k = p^theta.
    fn log_k_ratio(&self) -> f64 {
        self.0 / (1.0 - self.0)
    }
}

/// Which error budgets scale with k.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartialMode {
    Exact,
    FpOnly,
    FnOnly,
    Both,
}

/// Model selector for threshold computations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdModel {
    Noiseless,
    Symmetric {
        rho: f64,
    },
    /// Any channel whose Bernstein parameters are Theta(1), given as the
    /// large-k limits of (c_mean, c_var, c_max).
    General {
        c_mean: f64,
        c_var: f64,
        c_max: f64,
    },
}

impl ThresholdModel {
    pub fn symmetric(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 0.5) {
            return Err(Error::invalid(format!(
                "rho must lie in (0, 1/2) (got {rho})"
            )));
        }
        Ok(ThresholdModel::Symmetric { rho })
    }

    pub fn label(&self) -> String {
        match self {
            ThresholdModel::Noiseless => "noiseless".to_string(),
            ThresholdModel::Symmetric { rho } => format!("symmetric:{}", sig9(*rho)),
            ThresholdModel::General { .. } => "general".to_string(),
        }
    }
}

/// Design-intensity policy for the separate-decoding thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NuPolicy {
    /// nu = ln 2 (the experimental default).
    #[default]
    Log2,
    /// The balanced-design limit; identical leading constants to `Log2`.
    NuSymmLimit,
    /// Maximize nu D2(rho || rho * e^{-nu}) over nu.
    Optimize,
}

/// A threshold, reported as the leading coefficient of k ln(p/k) together
/// with its curve constant c = 1/(coeff ln 2).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ThresholdResult {
    pub coeff_nats: f64,
    pub c_theta: f64,
    pub argmin_delta2: Option<f64>,
    pub argopt_nu: Option<f64>,
}

impl ThresholdResult {
    fn new(coeff_nats: f64, argmin_delta2: Option<f64>, argopt_nu: Option<f64>) -> Self {
        ThresholdResult {
            coeff_nats,
            c_theta: 1.0 / (coeff_nats * LN_2),
            argmin_delta2,
            argopt_nu,
        }
    }
}

/// (c_mean, c_var, c_max) large-k limits for the symmetric channel at the
/// balanced design (nu -> ln 2): c_mean = ln2 (ln2 - H2(rho)),
/// c_var = ln2 ((1-rho) ln^2(2(1-rho)) + rho ln^2(2 rho)), c_max = ln(1/(2 rho)).
pub fn symmetric_bernstein_limits(rho: f64) -> (f64, f64, f64) {
    let c_mean = LN_2 * (LN_2 - binary_entropy(rho));
    let l1 = (2.0 * (1.0 - rho)).ln();
    let l0 = (2.0 * rho).ln();
    let c_var = LN_2 * ((1.0 - rho) * l1 * l1 + rho * l0 * l0);
    let c_max = (1.0 / (2.0 * rho)).ln();
    (c_mean, c_var, c_max)
}

/// Same limits at an arbitrary design intensity nu, where the output law
/// tends to P[Y = 0] -> zeta = rho * e^{-nu}.
pub fn symmetric_bernstein_limits_at_nu(rho: f64, nu: f64) -> (f64, f64, f64) {
    let zeta = binary_convolution(rho, (-nu).exp());
    let l1 = ((1.0 - rho) / (1.0 - zeta)).ln();
    let l0 = (rho / zeta).ln();
    let c_mean = nu * kl_binary(rho, zeta);
    let c_var = nu * ((1.0 - rho) * l1 * l1 + rho * l0 * l0);
    let c_max = l1.abs().max(l0.abs());
    (c_mean, c_var, c_max)
}

/// Maximize nu D2(rho || rho * e^{-nu}) over nu; returns (argmax, max).
pub fn optimal_nu_symmetric(rho: f64) -> Result<(f64, f64)> {
    if !(rho > 0.0 && rho < 0.5) {
        return Err(Error::invalid(format!(
            "rho must lie in (0, 1/2) (got {rho})"
        )));
    }
    Ok(maximize(
        |nu| nu * kl_binary(rho, binary_convolution(rho, (-nu).exp())),
        NU_LO,
        NU_HI,
        OPT_GRID,
        OPT_TOL,
    ))
}

/// Minimize max(information term, concentration term) over delta2.
fn minimax_delta2(t1: impl Fn(f64) -> f64, t2: impl Fn(f64) -> f64) -> (f64, f64) {
    let (d2, coeff) = minimize(
        |d| t1(d).max(t2(d)),
        DELTA2_LO,
        DELTA2_HI,
        OPT_GRID,
        OPT_TOL,
    );
    (coeff, d2)
}

/// Noiseless concentration exponent factor (1-d2) ln(1-d2) + d2.
fn noiseless_rate(d2: f64) -> f64 {
    (1.0 - d2) * (1.0 - d2).ln() + d2
}

/// Bernstein concentration term as a coefficient of k ln k:
/// (c_var + c_mean c_max d2 / 3) / (c_mean^2 d2^2 / 2).
fn bernstein_rate_inverse(c_mean: f64, c_var: f64, c_max: f64, d2: f64) -> f64 {
    (c_var + c_mean * c_max * d2 / 3.0) / (0.5 * c_mean * c_mean * d2 * d2)
}

/// Asymptotic number-of-tests coefficient for separate decoding.
///
/// Exact and false-positive-only modes minimize over delta2 the maximum of
/// the information term and the concentration term; false-negative-only and
/// both-sided modes keep the information term alone (with ln p or ln(p/k)
/// in the numerator respectively).
pub fn achievability_coeff(
    regime: SparsityRegime,
    model: &ThresholdModel,
    mode: PartialMode,
    nu_policy: NuPolicy,
) -> Result<ThresholdResult> {
    let one_minus = 1.0 - regime.theta();
    let s = regime.log_k_ratio();
    match *model {
        ThresholdModel::Noiseless => {
            // Information rate (ln 2)^2 at the balanced design; the nu
            // policies coincide asymptotically for this channel.
            let l2sq = LN_2 * LN_2;
            let nu = Some(LN_2);
            Ok(match mode {
                PartialMode::Both => ThresholdResult::new(1.0 / l2sq, None, nu),
                PartialMode::FnOnly => ThresholdResult::new(1.0 / (one_minus * l2sq), None, nu),
                PartialMode::Exact => {
                    let (coeff, d2) = minimax_delta2(
                        |d| 1.0 / (one_minus * l2sq * (1.0 - d)),
                        |d| s / (l2sq * noiseless_rate(d)),
                    );
                    ThresholdResult::new(coeff, Some(d2), nu)
                }
                PartialMode::FpOnly => {
                    let (coeff, d2) = minimax_delta2(
                        |d| 1.0 / (l2sq * (1.0 - d)),
                        |d| s / (l2sq * noiseless_rate(d)),
                    );
                    ThresholdResult::new(coeff, Some(d2), nu)
                }
            })
        }
        ThresholdModel::Symmetric { rho } => {
            if !(rho > 0.0 && rho < 0.5) {
                return Err(Error::invalid(format!(
                    "rho must lie in (0, 1/2) (got {rho})"
                )));
            }
            let (nu, cm, cv, cx) = match nu_policy {
                NuPolicy::Log2 | NuPolicy::NuSymmLimit => {
                    let (cm, cv, cx) = symmetric_bernstein_limits(rho);
                    (LN_2, cm, cv, cx)
                }
                NuPolicy::Optimize => {
                    let (nu_star, _) = optimal_nu_symmetric(rho)?;
                    let (cm, cv, cx) = symmetric_bernstein_limits_at_nu(rho, nu_star);
                    (nu_star, cm, cv, cx)
                }
            };
            coeff_from_constants(mode, one_minus, s, cm, cv, cx, Some(nu))
        }
        ThresholdModel::General {
            c_mean,
            c_var,
            c_max,
        } => {
            if !c_mean.is_finite() || c_mean <= 0.0 {
                return Err(Error::invalid(format!(
                    "general model needs c_mean > 0 (got {c_mean})"
                )));
            }
            if c_var < 0.0 {
                return Err(Error::invalid(format!(
                    "general model needs c_var >= 0 (got {c_var})"
                )));
            }
            coeff_from_constants(mode, one_minus, s, c_mean, c_var, c_max, None)
        }
    }
}

fn coeff_from_constants(
    mode: PartialMode,
    one_minus: f64,
    s: f64,
    cm: f64,
    cv: f64,
    cx: f64,
    nu: Option<f64>,
) -> Result<ThresholdResult> {
    Ok(match mode {
        PartialMode::Both => ThresholdResult::new(1.0 / cm, None, nu),
        PartialMode::FnOnly => ThresholdResult::new(1.0 / (one_minus * cm), None, nu),
        PartialMode::Exact | PartialMode::FpOnly => {
            if !cx.is_finite() {
                return Err(Error::InfiniteCMax);
            }
            let info_scale = if mode == PartialMode::Exact {
                one_minus
            } else {
                1.0
            };
            let (coeff, d2) = minimax_delta2(
                |d| 1.0 / (info_scale * cm * (1.0 - d)),
                |d| s * bernstein_rate_inverse(cm, cv, cx, d),
            );
            ThresholdResult::new(coeff, Some(d2), nu)
        }
    })
}

/// Converse coefficient: below it, separate decoding leaves the average
/// number of errors at k(1 - o(1)).
pub fn converse_coeff(
    _regime: SparsityRegime,
    model: &ThresholdModel,
    nu: f64,
) -> Result<ThresholdResult> {
    match *model {
        ThresholdModel::Noiseless => {
            Ok(ThresholdResult::new(1.0 / (LN_2 * LN_2), None, Some(LN_2)))
        }
        ThresholdModel::Symmetric { rho } => {
            if !(rho > 0.0 && rho < 0.5) {
                return Err(Error::invalid(format!(
                    "rho must lie in (0, 1/2) (got {rho})"
                )));
            }
            if !nu.is_finite() || nu <= 0.0 {
                return Err(Error::invalid(format!("nu must be positive (got {nu})")));
            }
            let denom = nu * kl_binary(rho, binary_convolution(rho, (-nu).exp()));
            Ok(ThresholdResult::new(1.0 / denom, None, Some(nu)))
        }
        ThresholdModel::General { c_mean, .. } => {
            if !c_mean.is_finite() || c_mean <= 0.0 {
                return Err(Error::invalid(format!(
                    "general model needs c_mean > 0 (got {c_mean})"
                )));
            }
            Ok(ThresholdResult::new(1.0 / c_mean, None, None))
        }
    }
}

/// Information-theoretic optimum for joint (unrestricted) decoding with
/// Bernoulli designs: exact recovery in the noiseless model, small-theta
/// partial recovery in the symmetric model.
pub fn joint_optimum_coeff(
    regime: SparsityRegime,
    model: &ThresholdModel,
) -> Result<ThresholdResult> {
    match *model {
        ThresholdModel::Noiseless => {
            let s = regime.log_k_ratio();
            let f = |nu: f64| {
                let e = (-nu).exp();
                (1.0 / binary_entropy(e)).max(s / (e * nu))
            };
            let (nu_star, coeff) = minimize(f, NU_LO, NU_HI, OPT_GRID, OPT_TOL);
            Ok(ThresholdResult::new(coeff, None, Some(nu_star)))
        }
        ThresholdModel::Symmetric { rho } => {
            if !(rho > 0.0 && rho < 0.5) {
                return Err(Error::invalid(format!(
                    "rho must lie in (0, 1/2) (got {rho})"
                )));
            }
            Ok(ThresholdResult::new(
                1.0 / (LN_2 - binary_entropy(rho)),
                None,
                None,
            ))
        }
        ThresholdModel::General { .. } => Err(Error::Unsupported(
            "joint optimum is only defined for the noiseless and symmetric models".into(),
        )),
    }
}

/// Curve selector for rate-curve generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    Exact,
    FpOnly,
    FnOnly,
    Both,
    Joint,
    Converse,
}

impl CurveKind {
    pub const ALL: [CurveKind; 6] = [
        CurveKind::Exact,
        CurveKind::FpOnly,
        CurveKind::FnOnly,
        CurveKind::Both,
        CurveKind::Joint,
        CurveKind::Converse,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CurveKind::Exact => "exact",
            CurveKind::FpOnly => "fp_only",
            CurveKind::FnOnly => "fn_only",
            CurveKind::Both => "both",
            CurveKind::Joint => "joint",
            CurveKind::Converse => "converse",
        }
    }
}

impl std::str::FromStr for CurveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(CurveKind::Exact),
            "fp" | "fp_only" => Ok(CurveKind::FpOnly),
            "fn" | "fn_only" => Ok(CurveKind::FnOnly),
            "both" => Ok(CurveKind::Both),
            "joint" => Ok(CurveKind::Joint),
            "converse" => Ok(CurveKind::Converse),
            other => Err(Error::invalid(format!("unknown curve kind '{other}'"))),
        }
    }
}

/// One row of a rate-curve table.
#[derive(Debug, Clone, Serialize)]
pub struct CurveRow {
    pub theta: f64,
    pub mode: &'static str,
    pub model: String,
    pub c: f64,
    pub coeff_nats: f64,
    pub delta2: Option<f64>,
    pub nu: Option<f64>,
}

/// Evaluate the requested curves on a theta grid. Rows are emitted
/// curve-major, theta ascending within each curve. The converse curve for
/// the symmetric model is evaluated at nu = ln 2.
pub fn figure1_curves(
    model: &ThresholdModel,
    theta_grid: &[f64],
    kinds: &[CurveKind],
    nu_policy: NuPolicy,
) -> Result<Vec<CurveRow>> {
    for &t in theta_grid {
        SparsityRegime::new(t)?;
    }
    let label = model.label();
    let mut rows = Vec::with_capacity(theta_grid.len() * kinds.len());
    for &kind in kinds {
        let mut curve: Vec<CurveRow> = theta_grid
            .par_iter()
            .map(|&theta| -> Result<CurveRow> {
                let regime = SparsityRegime::new(theta)?;
                let r = match kind {
                    CurveKind::Exact => {
                        achievability_coeff(regime, model, PartialMode::Exact, nu_policy)?
                    }
                    CurveKind::FpOnly => {
                        achievability_coeff(regime, model, PartialMode::FpOnly, nu_policy)?
                    }
                    CurveKind::FnOnly => {
                        achievability_coeff(regime, model, PartialMode::FnOnly, nu_policy)?
                    }
                    CurveKind::Both => {
                        achievability_coeff(regime, model, PartialMode::Both, nu_policy)?
                    }
                    CurveKind::Joint => joint_optimum_coeff(regime, model)?,
                    CurveKind::Converse => converse_coeff(regime, model, LN_2)?,
                };
                Ok(CurveRow {
                    theta,
                    mode: kind.as_str(),
                    model: label.clone(),
                    c: r.c_theta,
                    coeff_nats: r.coeff_nats,
                    delta2: r.argmin_delta2,
                    nu: r.argopt_nu,
                })
            })
            .collect::<Result<_>>()?;
        rows.append(&mut curve);
    }
    Ok(rows)
}

/// Render curve rows as CSV with nine significant digits.
pub fn curves_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from("theta,mode,model,c,coeff_nats,delta2,nu\n");
    for r in rows {
        let opt = |v: Option<f64>| v.map(sig9).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            sig9(r.theta),
            r.mode,
            r.model,
            sig9(r.c),
            sig9(r.coeff_nats),
            opt(r.delta2),
            opt(r.nu),
        ));
    }
    out
}
