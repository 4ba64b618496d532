//! Item decoders: the per-item information-density threshold test, plus the
//! COMP, DD, and NCOMP baselines.
//!
//! Every decoder reads one matrix column at a time. The score of a column
//! depends on it only through the four outcome counts (x, y), so the inner
//! loop is packed AND/ANDNOT + popcount against the observation words,
//! followed by a four-entry dot product.

use rayon::prelude::*;

use crate::bits::{count_and, count_ones, BitVec};
use crate::channel::InfoDensityTable;
use crate::error::{Error, Result};
use crate::model::{Observations, TestMatrix};

/// A decoding outcome: the estimated defective set, optionally with the
/// per-item decision statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    /// Estimated defective items, strictly increasing.
    pub estimated_set: Vec<usize>,
    /// Decision statistic per item, when the decoder has one.
    pub per_item_scores: Option<Vec<f64>>,
}

/// Threshold configuration for separate decoding.
#[derive(Debug, Clone)]
pub struct SeparateDecoderConfig {
    pub gamma: f64,
    pub iota: InfoDensityTable,
}

impl SeparateDecoderConfig {
    pub fn new(gamma: f64, iota: InfoDensityTable) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(Error::invalid(format!(
                "gamma must be finite (got {gamma})"
            )));
        }
        Ok(SeparateDecoderConfig { gamma, iota })
    }
}

/// The experimental threshold choice gamma = n I1 (1 - delta).
pub fn default_gamma(n: usize, i1: f64, delta: f64) -> f64 {
    n as f64 * i1 * (1.0 - delta)
}

/// Outcome counts of one column against the observations.
#[derive(Debug, Clone, Copy)]
struct OutcomeCounts {
    n11: usize,
    n10: usize,
    n01: usize,
    n00: usize,
}

#[inline]
fn outcome_counts(column: &[u64], obs: &Observations, positives: usize) -> OutcomeCounts {
    let n = obs.len();
    let n11 = count_and(column, obs.words());
    let n1 = count_ones(column);
    OutcomeCounts {
        n11,
        n10: n1 - n11,
        n01: positives - n11,
        n00: n - n1 - (positives - n11),
    }
}

/// Log-likelihood-ratio score: sum over tests of iota[x][y]. A -inf table
/// cell with a positive count drives the score to -inf; zero counts
/// contribute nothing regardless of the cell value.
#[inline]
fn score_from_counts(counts: OutcomeCounts, iota: &[[f64; 2]; 2]) -> f64 {
    let mut score = 0.0;
    for (count, v) in [
        (counts.n11, iota[1][1]),
        (counts.n10, iota[1][0]),
        (counts.n01, iota[0][1]),
        (counts.n00, iota[0][0]),
    ] {
        if count > 0 {
            score += count as f64 * v;
        }
    }
    score
}

/// Score of a single column; exposed for diagnostics.
pub fn separate_score(column: &BitVec, obs: &Observations, iota: &InfoDensityTable) -> Result<f64> {
    if column.len() != obs.len() {
        return Err(Error::mismatch(format!(
            "column has {} tests, observations have {}",
            column.len(),
            obs.len()
        )));
    }
    Ok(score_from_counts(
        outcome_counts(column.words(), obs, obs.count_positive()),
        &iota.iota,
    ))
}

/// Threshold test for one item: true iff the score strictly exceeds gamma.
/// Ties decode to non-defective.
pub fn decode_separate_item(
    column: &BitVec,
    obs: &Observations,
    cfg: &SeparateDecoderConfig,
) -> Result<bool> {
    Ok(separate_score(column, obs, &cfg.iota)? > cfg.gamma)
}

/// Separate decoding of all p items; data-parallel over columns.
pub fn decode_separate(
    matrix: &TestMatrix,
    obs: &Observations,
    cfg: &SeparateDecoderConfig,
) -> Result<DecodeResult> {
    if matrix.n() != obs.len() {
        return Err(Error::mismatch(format!(
            "matrix has {} tests, observations have {}",
            matrix.n(),
            obs.len()
        )));
    }
    let positives = obs.count_positive();
    let scores: Vec<f64> = (0..matrix.p())
        .into_par_iter()
        .map(|j| {
            score_from_counts(
                outcome_counts(matrix.column(j), obs, positives),
                &cfg.iota.iota,
            )
        })
        .collect();
    let estimated_set = scores
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > cfg.gamma)
        .map(|(j, _)| j)
        .collect();
    Ok(DecodeResult {
        estimated_set,
        per_item_scores: Some(scores),
    })
}

/// COMP: an item is non-defective iff it appears in some negative test.
/// The per-item statistic is the number of negative tests containing it.
pub fn decode_comp(matrix: &TestMatrix, obs: &Observations) -> Result<DecodeResult> {
    if matrix.n() != obs.len() {
        return Err(Error::mismatch("matrix/observation test counts differ"));
    }
    let positives = obs.count_positive();
    let negative_hits: Vec<usize> = (0..matrix.p())
        .into_par_iter()
        .map(|j| outcome_counts(matrix.column(j), obs, positives).n10)
        .collect();
    let estimated_set = negative_hits
        .iter()
        .enumerate()
        .filter(|(_, &h)| h == 0)
        .map(|(j, _)| j)
        .collect();
    Ok(DecodeResult {
        estimated_set,
        per_item_scores: Some(negative_hits.iter().map(|&h| h as f64).collect()),
    })
}

/// DD: restrict to COMP's possible defectives, then declare an item
/// defective iff some positive test contains it as the unique possible
/// defective.
pub fn decode_dd(matrix: &TestMatrix, obs: &Observations) -> Result<DecodeResult> {
    let comp = decode_comp(matrix, obs)?;
    let mut pd_mask = BitVec::zeros(matrix.p());
    for &j in &comp.estimated_set {
        pd_mask.set(j, true);
    }
    let mut definite = vec![false; matrix.p()];
    for i in 0..matrix.n() {
        if !obs.get(i) {
            continue;
        }
        let row = matrix.row(i);
        if count_and(row, pd_mask.words()) == 1 {
            let j = row
                .iter()
                .zip(pd_mask.words())
                .enumerate()
                .find_map(|(w, (r, m))| {
                    let and = r & m;
                    (and != 0).then(|| w * 64 + and.trailing_zeros() as usize)
                })
                .expect("popcount said one bit");
            definite[j] = true;
        }
    }
    let estimated_set = definite
        .iter()
        .enumerate()
        .filter(|(_, &d)| d)
        .map(|(j, _)| j)
        .collect();
    Ok(DecodeResult {
        estimated_set,
        per_item_scores: None,
    })
}

/// NCOMP: threshold the fraction of positive tests among the tests
/// containing the item at 1 - rho (1 + delta_cap), non-strict. An item
/// contained in no test is declared non-defective; its statistic is zero.
pub fn decode_ncomp(
    matrix: &TestMatrix,
    obs: &Observations,
    rho: f64,
    delta_cap: f64,
) -> Result<DecodeResult> {
    if matrix.n() != obs.len() {
        return Err(Error::mismatch("matrix/observation test counts differ"));
    }
    if !(0.0..0.5).contains(&rho) {
        return Err(Error::invalid(format!(
            "rho must lie in [0, 1/2) (got {rho})"
        )));
    }
    if delta_cap.is_nan() || delta_cap < 0.0 {
        return Err(Error::invalid(format!(
            "delta_cap must be >= 0 (got {delta_cap})"
        )));
    }
    let threshold = 1.0 - rho * (1.0 + delta_cap);
    let positives = obs.count_positive();
    let per_item: Vec<(bool, f64)> = (0..matrix.p())
        .into_par_iter()
        .map(|j| {
            let c = outcome_counts(matrix.column(j), obs, positives);
            let contained = c.n11 + c.n10;
            if contained == 0 {
                (false, 0.0)
            } else {
                let fraction = c.n11 as f64 / contained as f64;
                (fraction >= threshold, fraction)
            }
        })
        .collect();
    let estimated_set = per_item
        .iter()
        .enumerate()
        .filter(|(_, (defective, _))| *defective)
        .map(|(j, _)| j)
        .collect();
    Ok(DecodeResult {
        estimated_set,
        per_item_scores: Some(per_item.iter().map(|(_, f)| *f).collect()),
    })
}
