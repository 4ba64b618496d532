//! Exact finite-k analysis of the single-item channel.
//!
//! With a defective item singled out, the remaining k-1 defectives land in a
//! test with i.i.d. probability nu/k, so the conditional output law is a
//! binomial mixture of the noise table. Everything here is computed exactly
//! for finite k; the `i1_asymptotic_*` functions give the k -> infinity
//! closed forms.

use serde::Serialize;

use crate::bounds::{binary_convolution, kl_binary};
use crate::error::{Error, Result};
use crate::model::NoiseChannel;

/// Switch the binomial PMF recursion to log space above this k.
const LOG_SPACE_THRESHOLD: usize = 1000;

/// Exact single-item marginals P_X, P_{Y|X1}, P_Y for a given (k, nu, channel).
#[derive(Debug, Clone, Serialize)]
pub struct ChannelMarginals {
    pub k: usize,
    pub nu: f64,
    /// P[X1 = x], x in {0, 1}.
    pub p_x: [f64; 2],
    /// `P[Y = y | X1 = x, item 1 defective]`, indexed `[x][y]`.
    pub p_y_given_x: [[f64; 2]; 2],
    /// `P[Y = y]`, indexed `[y]`.
    pub p_y: [f64; 2],
}

/// The 2x2 information-density table `iota[x][y] = ln(P_{Y|X1}(y|x) / P_Y(y))`.
///
/// Entries may be -inf (conditionally impossible outcome with P_Y(y) > 0).
/// Cells in a column with `P_Y(y) = 0` are unreachable: flagged, stored as NaN,
/// and excluded from c_max.
#[derive(Debug, Clone, Serialize)]
pub struct InfoDensityTable {
    pub iota: [[f64; 2]; 2],
    /// `reachable[y] <=> P_Y(y) > 0`.
    pub reachable: [bool; 2],
}

/// Mutual information and the Bernstein parameters of the information density.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InfoDensityStats {
    /// I(X1; Y) in nats per test.
    pub i1: f64,
    /// k * I1.
    pub c_mean: f64,
    /// k * Var[iota(X1, Y)].
    pub c_var: f64,
    /// max |iota| over reachable cells; +inf is a representable state.
    pub c_max: f64,
}

/// The unique nu with (1 - nu/k)^k = 1/2, i.e. k (1 - 2^(-1/k)).
pub fn nu_symm(k: usize) -> f64 {
    let k = k as f64;
    // 1 - exp(-ln2/k) via exp_m1 to avoid cancellation at large k
    k * -(-std::f64::consts::LN_2 / k).exp_m1()
}

/// Exact P_{Y|X1} and P_Y.
///
/// P_{Y|X1=x}(1) = sum_m Binom(k-1, nu/k)(m) q_{m+x}; P_Y mixes over P_X.
/// The binomial PMF runs over a multiplicative recursion, in log space for
/// large k.
pub fn channel_marginals(k: usize, nu: f64, channel: &NoiseChannel) -> Result<ChannelMarginals> {
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    let qx = nu / k as f64;
    if !(qx > 0.0 && qx <= 1.0) {
        return Err(Error::invalid(format!(
            "nu/k must lie in (0, 1] (got {qx})"
        )));
    }
    let q = channel.q_table(k)?;

    // Both conditionals P[Y = y | X1 = x] accumulated directly, so that a
    // conditionally impossible outcome comes out exactly zero (the decoder
    // relies on the resulting -inf being genuine, not rounding residue).
    let mut hit = [0.0f64; 2]; // P[Y=1 | X1 = x]
    let mut miss = [0.0f64; 2]; // P[Y=0 | X1 = x]
    let mut absorb = |pmf: f64, m: usize| {
        hit[0] += pmf * q[m];
        miss[0] += pmf * (1.0 - q[m]);
        hit[1] += pmf * q[m + 1];
        miss[1] += pmf * (1.0 - q[m + 1]);
    };
    if qx == 1.0 {
        // all other defectives are always in the test
        absorb(1.0, k - 1);
    } else if k > LOG_SPACE_THRESHOLD {
        let log_ratio = qx.ln() - (1.0 - qx).ln();
        let mut log_pmf = (k as f64 - 1.0) * (1.0 - qx).ln();
        for m in 0..k {
            absorb(log_pmf.exp(), m);
            if m + 1 < k {
                log_pmf += ((k - 1 - m) as f64).ln() - ((m + 1) as f64).ln() + log_ratio;
            }
        }
    } else {
        let ratio = qx / (1.0 - qx);
        let mut pmf = (1.0 - qx).powi(k as i32 - 1);
        for m in 0..k {
            absorb(pmf, m);
            if m + 1 < k {
                pmf *= (k - 1 - m) as f64 / (m + 1) as f64 * ratio;
            }
        }
    }
    let p_y_given_x = [
        [miss[0].clamp(0.0, 1.0), hit[0].clamp(0.0, 1.0)],
        [miss[1].clamp(0.0, 1.0), hit[1].clamp(0.0, 1.0)],
    ];

    let p_x = [1.0 - qx, qx];
    let p_y = [
        p_x[0] * p_y_given_x[0][0] + p_x[1] * p_y_given_x[1][0],
        p_x[0] * p_y_given_x[0][1] + p_x[1] * p_y_given_x[1][1],
    ];
    Ok(ChannelMarginals {
        k,
        nu,
        p_x,
        p_y_given_x,
        p_y,
    })
}

/// Entrywise log-ratio table.
pub fn info_density_table(marginals: &ChannelMarginals) -> InfoDensityTable {
    let mut iota = [[0.0f64; 2]; 2];
    let mut reachable = [true; 2];
    for y in 0..2 {
        if marginals.p_y[y] <= 0.0 {
            reachable[y] = false;
            iota[0][y] = f64::NAN;
            iota[1][y] = f64::NAN;
            continue;
        }
        for (x, row) in iota.iter_mut().enumerate() {
            let cond = marginals.p_y_given_x[x][y];
            row[y] = if cond == 0.0 {
                f64::NEG_INFINITY
            } else {
                (cond / marginals.p_y[y]).ln()
            };
        }
    }
    InfoDensityTable { iota, reachable }
}

/// Exact mean, variance, and max of the information density.
///
/// I1 sums probability-weighted cells in a fixed (x, y) order; cells with
/// zero weight contribute zero even when the density there is -inf. c_max
/// ranges over all reachable cells and is +inf when one of them is -inf.
pub fn info_stats(marginals: &ChannelMarginals) -> InfoDensityStats {
    let table = info_density_table(marginals);
    let mut i1 = 0.0f64;
    let mut second_moment = 0.0f64;
    let mut c_max = 0.0f64;
    for x in 0..2 {
        for y in 0..2 {
            if !table.reachable[y] {
                continue;
            }
            let w = marginals.p_x[x] * marginals.p_y_given_x[x][y];
            let v = table.iota[x][y];
            if w > 0.0 {
                i1 += w * v;
                second_moment += w * v * v;
            }
            if v.abs() > c_max {
                c_max = v.abs();
            }
        }
    }
    let k = marginals.k as f64;
    InfoDensityStats {
        i1,
        c_mean: k * i1,
        c_var: (k * (second_moment - i1 * i1)).max(0.0),
        c_max,
    }
}

/// Expected information density recomputed from a table; same summation
/// path as `info_stats`.
pub fn expected_density(table: &InfoDensityTable, marginals: &ChannelMarginals) -> f64 {
    let mut acc = 0.0;
    for x in 0..2 {
        for y in 0..2 {
            if !table.reachable[y] {
                continue;
            }
            let w = marginals.p_x[x] * marginals.p_y_given_x[x][y];
            if w > 0.0 {
                acc += w * table.iota[x][y];
            }
        }
    }
    acc
}

/// Large-k approximation of I1 for the noiseless channel at nu = nu_symm:
/// (ln 2)^2 / k.
pub fn i1_asymptotic_noiseless(k: usize) -> f64 {
    let l2 = std::f64::consts::LN_2;
    l2 * l2 / k as f64
}

/// Large-k approximation of I1 for the symmetric channel:
/// (nu/k) D2(rho || rho * e^{-nu}) with * the binary convolution.
pub fn i1_asymptotic_symmetric(nu: f64, rho: f64, k: usize) -> Result<f64> {
    if !(rho > 0.0 && rho < 0.5) {
        return Err(Error::invalid(format!(
            "rho must lie in (0, 1/2) (got {rho})"
        )));
    }
    if !nu.is_finite() || nu <= 0.0 {
        return Err(Error::invalid(format!("nu must be positive (got {nu})")));
    }
    Ok(nu / k as f64 * kl_binary(rho, binary_convolution(rho, (-nu).exp())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::binary_entropy;
    use crate::rng::stream;
    use rand::RngExt;
    use std::f64::consts::LN_2;

    fn h2(x: f64) -> f64 {
        binary_entropy(x)
    }

    #[test]
    fn nu_symm_small_k() {
        assert!((nu_symm(1) - 0.5).abs() < 1e-15);
        assert!((nu_symm(2) - 2.0 * (1.0 - 1.0 / 2.0f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn nu_symm_large_k_approaches_ln2() {
        #[allow(clippy::approx_constant)] // frozen six-digit expected value
        let expected = 0.693147;
        assert!((nu_symm(1_000_000) - expected).abs() < 1e-6);
    }

    #[test]
    fn nu_symm_defining_equation() {
        for k in [1usize, 2, 3, 10, 100, 1000] {
            let nu = nu_symm(k);
            let half = (1.0 - nu / k as f64).powi(k as i32);
            assert!((half - 0.5).abs() < 1e-13, "k={k}: {half}");
        }
    }

    #[test]
    fn balanced_output_at_nu_symm_all_small_k() {
        for k in 1..=1000usize {
            let m = channel_marginals(k, nu_symm(k), &NoiseChannel::Noiseless).unwrap();
            assert!(
                (m.p_y[0] - 0.5).abs() < 1e-12,
                "noiseless k={k}: {}",
                m.p_y[0]
            );
        }
        for k in [1usize, 2, 7, 50, 333, 1000] {
            let ch = NoiseChannel::symmetric(0.11).unwrap();
            let m = channel_marginals(k, nu_symm(k), &ch).unwrap();
            assert!(
                (m.p_y[0] - 0.5).abs() < 1e-12,
                "symmetric k={k}: {}",
                m.p_y[0]
            );
        }
    }

    #[test]
    fn single_defective_noiseless() {
        let m = channel_marginals(1, 0.5, &NoiseChannel::Noiseless).unwrap();
        assert_eq!(m.p_y_given_x[1][1], 1.0);
        assert_eq!(m.p_y_given_x[0][1], 0.0);
        assert!((m.p_y[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn marginals_reject_bad_nu() {
        assert!(channel_marginals(4, 0.0, &NoiseChannel::Noiseless).is_err());
        assert!(channel_marginals(4, 4.5, &NoiseChannel::Noiseless).is_err());
        assert!(channel_marginals(4, 4.0, &NoiseChannel::Noiseless).is_ok());
    }

    #[test]
    fn mixture_consistency_fuzz() {
        let mut rng = stream(31, "mixture-fuzz", &[]);
        for _ in 0..200 {
            let k = rng.random_range(1..60usize);
            let nu = rng.random_range(0.01..k as f64);
            let table: Vec<f64> = (0..=k).map(|_| rng.random::<f64>()).collect();
            let ch = NoiseChannel::general(table).unwrap();
            let m = channel_marginals(k, nu, &ch).unwrap();
            for y in 0..2 {
                let mixed = m.p_x[0] * m.p_y_given_x[0][y] + m.p_x[1] * m.p_y_given_x[1][y];
                assert!((mixed - m.p_y[y]).abs() < 1e-12);
                assert!((0.0..=1.0).contains(&m.p_y[y]));
            }
            for x in 0..2 {
                let s = m.p_y_given_x[x][0] + m.p_y_given_x[x][1];
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn log_space_recursion_matches_linear() {
        // same (k, nu, channel) evaluated on both sides of the threshold
        let ch = NoiseChannel::symmetric(0.11).unwrap();
        let k = LOG_SPACE_THRESHOLD; // linear path
        let m_lin = channel_marginals(k, 0.7, &ch).unwrap();
        // force the log path by recomputing at k+1 with matched density is
        // not apples-to-apples, so instead compare the log path against a
        // direct high-precision style sum at k just above the threshold.
        let k = LOG_SPACE_THRESHOLD + 1;
        let m_log = channel_marginals(k, 0.7, &ch).unwrap();
        let qx = 0.7 / k as f64;
        let mut pmf = vec![0.0f64; k];
        pmf[0] = (1.0 - qx).powi(k as i32 - 1);
        for m in 0..k - 1 {
            pmf[m + 1] = pmf[m] * ((k - 1 - m) as f64 / (m + 1) as f64) * (qx / (1.0 - qx));
        }
        let q = ch.q_table(k).unwrap();
        let direct_p10: f64 = (0..k).map(|m| pmf[m] * q[m]).sum();
        assert!((m_log.p_y_given_x[0][1] - direct_p10).abs() < 1e-10);
        // and sanity: neighbouring k give nearby answers
        assert!((m_lin.p_y_given_x[0][1] - m_log.p_y_given_x[0][1]).abs() < 1e-3);
    }

    #[test]
    fn iota_noiseless_at_nu_symm() {
        let k = 40;
        let m = channel_marginals(k, nu_symm(k), &NoiseChannel::Noiseless).unwrap();
        let t = info_density_table(&m);
        assert!((t.iota[1][1] - LN_2).abs() < 1e-12);
        assert_eq!(t.iota[1][0], f64::NEG_INFINITY);
        assert!(t.reachable[0] && t.reachable[1]);
    }

    #[test]
    fn iota_symmetric_at_nu_symm() {
        let k = 40;
        let rho = 0.11;
        let ch = NoiseChannel::symmetric(rho).unwrap();
        let m = channel_marginals(k, nu_symm(k), &ch).unwrap();
        let t = info_density_table(&m);
        assert!((t.iota[1][1] - (2.0 * (1.0 - rho)).ln()).abs() < 1e-12);
        assert!((t.iota[1][0] - (2.0 * rho).ln()).abs() < 1e-12);
    }

    #[test]
    fn stats_match_published_limits_at_large_k() {
        let k = 100_000;
        // noiseless: k I1 -> (ln 2)^2
        let m = channel_marginals(k, nu_symm(k), &NoiseChannel::Noiseless).unwrap();
        let s = info_stats(&m);
        assert!((s.c_mean - LN_2 * LN_2).abs() / (LN_2 * LN_2) < 0.005);
        assert_eq!(s.c_max, f64::INFINITY);

        // symmetric rho = 0.11: k I1 -> ln2 (ln2 - H2(rho)), c_max -> ln(1/(2 rho))
        let rho = 0.11;
        let ch = NoiseChannel::symmetric(rho).unwrap();
        let m = channel_marginals(k, nu_symm(k), &ch).unwrap();
        let s = info_stats(&m);
        let target = LN_2 * (LN_2 - h2(rho));
        assert!((s.c_mean - target).abs() / target < 0.005);
        assert!((s.c_max - (1.0 / (2.0 * rho)).ln()).abs() < 1e-3);
    }

    #[test]
    fn c_mean_is_k_times_i1_bitwise() {
        let ch = NoiseChannel::symmetric(0.3).unwrap();
        let m = channel_marginals(17, 0.9, &ch).unwrap();
        let s = info_stats(&m);
        assert_eq!(s.c_mean, 17.0 * s.i1);
        assert!(s.c_var >= 0.0);
        // c_max dominates every reachable cell
        let t = info_density_table(&m);
        for x in 0..2 {
            for y in 0..2 {
                if t.reachable[y] {
                    assert!(s.c_max >= t.iota[x][y].abs());
                }
            }
        }
    }

    #[test]
    fn i1_nonnegative_and_zero_for_constant_tables() {
        let mut rng = stream(5, "i1-sign", &[]);
        for _ in 0..100 {
            let k = rng.random_range(1..40usize);
            let nu = rng.random_range(0.05..k as f64);
            let table: Vec<f64> = (0..=k).map(|_| rng.random()).collect();
            let m = channel_marginals(k, nu, &NoiseChannel::general(table).unwrap()).unwrap();
            assert!(info_stats(&m).i1 >= 0.0);
        }
        for c in [0.0, 0.25, 0.5, 1.0] {
            let table = vec![c; 9];
            let m = channel_marginals(8, 1.3, &NoiseChannel::general(table).unwrap()).unwrap();
            assert_eq!(info_stats(&m).i1, 0.0);
        }
    }

    #[test]
    fn i1_equals_table_expectation_and_entropy_difference() {
        let mut rng = stream(6, "i1-paths", &[]);
        for _ in 0..100 {
            let k = rng.random_range(1..40usize);
            let nu = rng.random_range(0.05..k as f64);
            let table: Vec<f64> = (0..=k).map(|_| rng.random()).collect();
            let m = channel_marginals(k, nu, &NoiseChannel::general(table).unwrap()).unwrap();
            let s = info_stats(&m);
            // identical summation path => bit-identical
            assert_eq!(s.i1, expected_density(&info_density_table(&m), &m));
            // H(Y) - H(Y|X1)
            let hy = binary_entropy(m.p_y[1]);
            let hyx = m.p_x[0] * binary_entropy(m.p_y_given_x[0][1])
                + m.p_x[1] * binary_entropy(m.p_y_given_x[1][1]);
            assert!((s.i1 - (hy - hyx)).abs() < 1e-12);
        }
    }

    #[test]
    fn asymptotic_noiseless_values_and_gap() {
        assert!((i1_asymptotic_noiseless(1) - 0.480453).abs() < 1e-6);
        assert!((i1_asymptotic_noiseless(100) - 0.00480453).abs() < 1e-8);
        let mut prev_gap = f64::INFINITY;
        for k in [10usize, 100, 1000, 10_000] {
            let m = channel_marginals(k, nu_symm(k), &NoiseChannel::Noiseless).unwrap();
            let exact = info_stats(&m).i1;
            let gap = (exact - i1_asymptotic_noiseless(k)).abs() / exact;
            assert!(gap < prev_gap, "gap did not shrink at k={k}");
            prev_gap = gap;
        }
    }

    #[test]
    fn asymptotic_symmetric_identities() {
        // nu = ln 2 reduces to (ln2/k)(ln2 - H2(rho))
        for rho in [0.05, 0.11, 0.3] {
            let v = i1_asymptotic_symmetric(LN_2, rho, 50).unwrap();
            let expect = LN_2 / 50.0 * (LN_2 - h2(rho));
            assert!((v - expect).abs() < 1e-12);
        }
        // rho -> 0 recovers the noiseless limit
        let v = i1_asymptotic_symmetric(LN_2, 1e-9, 50).unwrap();
        assert!((v - i1_asymptotic_noiseless(50)).abs() / v < 1e-6);
        // matches the exact computation within 1% at large k
        let k = 100_000;
        let nu = nu_symm(k);
        let ch = NoiseChannel::symmetric(0.11).unwrap();
        let exact = info_stats(&channel_marginals(k, nu, &ch).unwrap()).i1;
        let approx = i1_asymptotic_symmetric(nu, 0.11, k).unwrap();
        assert!((approx - exact).abs() / exact < 0.01);
    }
}
