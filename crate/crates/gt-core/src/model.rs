//! Problem instances, Bernoulli test designs, bit-packed test matrices,
//! noise channels, and observation synthesis.

use std::collections::HashSet;
use std::io::{Read, Write};

use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

use crate::bits::{self, BitVec, WORD_BITS};
use crate::error::{Error, Result};
use crate::rng::stream;

/// A hidden defective set: `k` distinct items out of `p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemInstance {
    p: usize,
    k: usize,
    defective_set: Vec<usize>,
}

impl ProblemInstance {
    /// Build an instance from an explicit defective set. Indices must be
    /// strictly increasing and lie in `[0, p)`, with `0 < k < p`.
    pub fn new(p: usize, defective_set: Vec<usize>) -> Result<Self> {
        let k = defective_set.len();
        if k == 0 || k >= p {
            return Err(Error::invalid(format!(
                "defective count must satisfy 0 < k < p (k = {k}, p = {p})"
            )));
        }
        for w in defective_set.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::invalid("defective set must be strictly increasing"));
            }
        }
        if *defective_set.last().unwrap() >= p {
            return Err(Error::invalid(format!(
                "defective index {} out of range [0, {p})",
                defective_set.last().unwrap()
            )));
        }
        Ok(ProblemInstance {
            p,
            k,
            defective_set,
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn defective_set(&self) -> &[usize] {
        &self.defective_set
    }

    pub fn is_defective(&self, item: usize) -> bool {
        self.defective_set.binary_search(&item).is_ok()
    }

    /// Indicator vector over all `p` items.
    pub fn indicator(&self) -> Vec<bool> {
        let mut beta = vec![false; self.p];
        for &j in &self.defective_set {
            beta[j] = true;
        }
        beta
    }

    /// Defective indicators packed to the row width of a test matrix.
    pub fn packed_indicator(&self) -> BitVec {
        let mut mask = BitVec::zeros(self.p);
        for &j in &self.defective_set {
            mask.set(j, true);
        }
        mask
    }
}

/// Bernoulli(nu/k) test design for `n` tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestDesign {
    pub n: usize,
    pub nu: f64,
    pub k: usize,
}

impl TestDesign {
    /// `nu` may be zero (empty design) but `nu/k` must not exceed one.
    pub fn new(n: usize, nu: f64, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("design k must be positive"));
        }
        if !nu.is_finite() || nu < 0.0 {
            return Err(Error::invalid(format!(
                "nu must be finite and >= 0 (got {nu})"
            )));
        }
        if nu / k as f64 > 1.0 {
            return Err(Error::invalid(format!(
                "per-entry probability nu/k = {} exceeds 1",
                nu / k as f64
            )));
        }
        Ok(TestDesign { n, nu, k })
    }

    /// Per-entry inclusion probability nu/k.
    pub fn density(&self) -> f64 {
        self.nu / self.k as f64
    }
}

/// An n-by-p binary test matrix, bit-packed row-major with a precomputed
/// column-major copy (the decoders are column-driven).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestMatrix {
    n: usize,
    p: usize,
    words_per_row: usize,
    words_per_col: usize,
    rows: Vec<u64>,
    cols: Vec<u64>,
}

impl TestMatrix {
    pub fn zeros(n: usize, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::invalid("matrix must have at least one column"));
        }
        let words_per_row = bits::words_for(p);
        // words_per_col is 0 when n == 0, matching an empty Observations
        let words_per_col = bits::words_for(n);
        Ok(TestMatrix {
            n,
            p,
            words_per_row,
            words_per_col,
            rows: vec![0; n * words_per_row],
            cols: vec![0; p * words_per_col],
        })
    }

    pub fn from_rows(n: usize, p: usize, row_bits: &[Vec<bool>]) -> Result<Self> {
        if row_bits.len() != n {
            return Err(Error::mismatch(format!(
                "expected {n} rows, got {}",
                row_bits.len()
            )));
        }
        let mut m = TestMatrix::zeros(n, p)?;
        for (i, row) in row_bits.iter().enumerate() {
            if row.len() != p {
                return Err(Error::mismatch(format!(
                    "row {i} has {} entries, expected {p}",
                    row.len()
                )));
            }
            for (j, &b) in row.iter().enumerate() {
                if b {
                    m.set(i, j);
                }
            }
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize) {
        self.rows[i * self.words_per_row + j / WORD_BITS] |= 1 << (j % WORD_BITS);
        self.cols[j * self.words_per_col + i / WORD_BITS] |= 1 << (i % WORD_BITS);
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        assert!(i < self.n && j < self.p);
        self.rows[i * self.words_per_row + j / WORD_BITS] >> (j % WORD_BITS) & 1 == 1
    }

    /// Packed words of test (row) `i`; `p` bits wide.
    #[inline]
    pub fn row(&self, i: usize) -> &[u64] {
        &self.rows[i * self.words_per_row..(i + 1) * self.words_per_row]
    }

    /// Packed words of item (column) `j`; `n` bits wide.
    #[inline]
    pub fn column(&self, j: usize) -> &[u64] {
        &self.cols[j * self.words_per_col..(j + 1) * self.words_per_col]
    }

    pub fn count_ones(&self) -> usize {
        self.rows.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn density(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        self.count_ones() as f64 / (self.n * self.p) as f64
    }

    /// Write the binary container: magic `GTM1`, little-endian u64 `n` and
    /// `p`, then the packed rows (ceil(p/64) little-endian u64 words per row).
    pub fn write_gtm1<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"GTM1")?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        w.write_all(&(self.p as u64).to_le_bytes())?;
        for word in &self.rows {
            w.write_all(&word.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_gtm1<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"GTM1" {
            return Err(Error::Format(format!("bad magic {magic:?}")));
        }
        let mut buf = [0u8; 8];
        r.read_exact(&mut buf)?;
        let n = u64::from_le_bytes(buf);
        r.read_exact(&mut buf)?;
        let p = u64::from_le_bytes(buf);
        if p == 0 || n > u32::MAX as u64 || p > u32::MAX as u64 {
            return Err(Error::Format(format!(
                "implausible dimensions n={n}, p={p}"
            )));
        }
        let (n, p) = (n as usize, p as usize);
        let mut m = TestMatrix::zeros(n, p)?;
        let tail_mask = if p % WORD_BITS == 0 {
            u64::MAX
        } else {
            (1u64 << (p % WORD_BITS)) - 1
        };
        for i in 0..n {
            for wi in 0..m.words_per_row {
                r.read_exact(&mut buf)?;
                let mut word = u64::from_le_bytes(buf);
                if wi == m.words_per_row - 1 {
                    if word & !tail_mask != 0 {
                        return Err(Error::Format(format!("row {i} has bits beyond column {p}")));
                    }
                    word &= tail_mask;
                }
                m.rows[i * m.words_per_row + wi] = word;
            }
        }
        // rebuild the column view
        for i in 0..n {
            for wi in 0..m.words_per_row {
                let mut word = m.rows[i * m.words_per_row + wi];
                while word != 0 {
                    let j = wi * WORD_BITS + word.trailing_zeros() as usize;
                    m.cols[j * m.words_per_col + i / WORD_BITS] |= 1 << (i % WORD_BITS);
                    word &= word - 1;
                }
            }
        }
        Ok(m)
    }
}

/// JSON debug form: rows as strings of '0'/'1'.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    n: usize,
    p: usize,
    rows: Vec<String>,
}

impl Serialize for TestMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows = (0..self.n)
            .map(|i| {
                (0..self.p)
                    .map(|j| if self.get(i, j) { '1' } else { '0' })
                    .collect()
            })
            .collect();
        MatrixJson {
            n: self.n,
            p: self.p,
            rows,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TestMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let raw = MatrixJson::deserialize(d)?;
        let rows: Vec<Vec<bool>> = raw
            .rows
            .iter()
            .map(|r| r.chars().map(|c| c == '1').collect())
            .collect();
        TestMatrix::from_rows(raw.n, raw.p, &rows).map_err(D::Error::custom)
    }
}

/// Test outcome distribution: `q_N = P[Y = 1 | N defectives in the test]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseChannel {
    /// Y is the OR of the defective entries.
    Noiseless,
    /// The OR output is flipped with probability rho.
    Symmetric { rho: f64 },
    /// Arbitrary table q_N for N = 0..table.len()-1.
    General { table: Vec<f64> },
}

impl NoiseChannel {
    pub fn symmetric(rho: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&rho) || !rho.is_finite() {
            return Err(Error::invalid(format!(
                "rho must lie in [0, 1/2) (got {rho})"
            )));
        }
        Ok(NoiseChannel::Symmetric { rho })
    }

    pub fn general(table: Vec<f64>) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::invalid("noise table must be non-empty"));
        }
        if table.iter().any(|q| !(0.0..=1.0).contains(q)) {
            return Err(Error::invalid("noise table entries must lie in [0, 1]"));
        }
        Ok(NoiseChannel::General { table })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            NoiseChannel::Noiseless => Ok(()),
            NoiseChannel::Symmetric { rho } => NoiseChannel::symmetric(*rho).map(|_| ()),
            NoiseChannel::General { table } => NoiseChannel::general(table.clone()).map(|_| ()),
        }
    }

    /// `q_N` for a single defective count. A general table that does not
    /// cover `N` is an error, not a clamp.
    pub fn hit_probability(&self, defectives_in_test: usize) -> Result<f64> {
        match self {
            NoiseChannel::Noiseless => Ok(if defectives_in_test == 0 { 0.0 } else { 1.0 }),
            NoiseChannel::Symmetric { rho } => Ok(if defectives_in_test == 0 {
                *rho
            } else {
                1.0 - rho
            }),
            NoiseChannel::General { table } => {
                table
                    .get(defectives_in_test)
                    .copied()
                    .ok_or(Error::NoiseTableExceeded {
                        requested: defectives_in_test,
                        max_covered: table.len().saturating_sub(1),
                    })
            }
        }
    }

    /// The full table q_0..q_k.
    pub fn q_table(&self, k: usize) -> Result<Vec<f64>> {
        (0..=k).map(|m| self.hit_probability(m)).collect()
    }
}

/// The observation vector of one experiment run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observations {
    bits: BitVec,
}

impl Observations {
    pub fn new(bits: BitVec) -> Self {
        Observations { bits }
    }

    pub fn from_bools(y: &[bool]) -> Self {
        Observations {
            bits: BitVec::from_bools(y),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits.get(i)
    }

    pub fn words(&self) -> &[u64] {
        self.bits.words()
    }

    pub fn count_positive(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn to_bools(&self) -> Vec<bool> {
        self.bits.to_bools()
    }
}

/// Success criterion for a recovery attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RecoveryCriterion {
    Exact,
    Partial {
        d_pos: usize,
        d_neg: usize,
    },
    /// No success threshold; only the error counts are of interest.
    AvgErrors,
}

impl RecoveryCriterion {
    pub fn validate(&self, p: usize, k: usize) -> Result<()> {
        if let RecoveryCriterion::Partial { d_pos, d_neg } = self {
            if *d_pos > p - k - 1 {
                return Err(Error::invalid(format!(
                    "d_pos = {d_pos} exceeds p - k - 1 = {}",
                    p - k - 1
                )));
            }
            if *d_neg > k - 1 {
                return Err(Error::invalid(format!(
                    "d_neg = {d_neg} exceeds k - 1 = {}",
                    k - 1
                )));
            }
        }
        Ok(())
    }

    pub fn allows(&self, false_positives: usize, false_negatives: usize) -> bool {
        match self {
            RecoveryCriterion::Exact => false_positives == 0 && false_negatives == 0,
            RecoveryCriterion::Partial { d_pos, d_neg } => {
                false_positives <= *d_pos && false_negatives <= *d_neg
            }
            RecoveryCriterion::AvgErrors => true,
        }
    }
}

/// Draw a uniformly random k-subset of `[0, p)`.
///
/// Each k-subset is equiprobable; the output is a pure function of the
/// arguments and the seed.
pub fn sample_defective_set(p: usize, k: usize, seed: u64) -> Result<ProblemInstance> {
    sample_defective_set_rng(p, k, &mut stream(seed, "defective-set", &[]))
}

pub fn sample_defective_set_rng<R: Rng>(
    p: usize,
    k: usize,
    rng: &mut R,
) -> Result<ProblemInstance> {
    if k == 0 || k >= p {
        return Err(Error::invalid(format!(
            "defective count must satisfy 0 < k < p (k = {k}, p = {p})"
        )));
    }
    let mut chosen: Vec<usize>;
    if k <= p / 64 {
        // sparse regime: rejection sampling avoids the O(p) index array
        let mut seen = HashSet::with_capacity(k * 2);
        chosen = Vec::with_capacity(k);
        while chosen.len() < k {
            let j = rng.random_range(0..p);
            if seen.insert(j) {
                chosen.push(j);
            }
        }
    } else {
        // partial Fisher-Yates over the full index array
        let mut items: Vec<usize> = (0..p).collect();
        for i in 0..k {
            let j = rng.random_range(i..p);
            items.swap(i, j);
        }
        chosen = items[..k].to_vec();
    }
    chosen.sort_unstable();
    ProblemInstance::new(p, chosen)
}

/// Generate an i.i.d. Bernoulli(nu/k) test matrix.
pub fn generate_test_matrix(design: &TestDesign, p: usize, seed: u64) -> Result<TestMatrix> {
    generate_test_matrix_rng(design, p, &mut stream(seed, "test-matrix", &[]))
}

pub fn generate_test_matrix_rng<R: Rng>(
    design: &TestDesign,
    p: usize,
    rng: &mut R,
) -> Result<TestMatrix> {
    let design = TestDesign::new(design.n, design.nu, design.k)?;
    let mut m = TestMatrix::zeros(design.n, p)?;
    let q = design.density();
    let total = design.n * p;
    if q <= 0.0 || total == 0 {
        return Ok(m);
    }
    if q >= 1.0 {
        for i in 0..design.n {
            for j in 0..p {
                m.set(i, j);
            }
        }
        return Ok(m);
    }
    // Geometric gaps between set entries: one uniform draw per placed one.
    let log1mq = (1.0 - q).ln();
    let mut pos = 0usize;
    loop {
        let u: f64 = rng.random();
        let skip = (1.0 - u).ln() / log1mq;
        // a non-finite or out-of-range skip means no further entries
        if skip.is_nan() || skip >= (total - pos) as f64 {
            break;
        }
        pos += skip as usize;
        m.set(pos / p, pos % p);
        pos += 1;
        if pos >= total {
            break;
        }
    }
    Ok(m)
}

/// Synthesize observations: for each test, count the defectives it contains
/// and draw `Y ~ Bernoulli(q_N)`. Rows are conditionally independent, and
/// the draw stream is consumed one uniform per test, so channels with equal
/// q-tables produce identical outputs under the same seed.
pub fn run_tests(
    matrix: &TestMatrix,
    instance: &ProblemInstance,
    channel: &NoiseChannel,
    seed: u64,
) -> Result<Observations> {
    run_tests_rng(
        matrix,
        instance,
        channel,
        &mut stream(seed, "observations", &[]),
    )
}

pub fn run_tests_rng<R: Rng>(
    matrix: &TestMatrix,
    instance: &ProblemInstance,
    channel: &NoiseChannel,
    rng: &mut R,
) -> Result<Observations> {
    if matrix.p() != instance.p() {
        return Err(Error::mismatch(format!(
            "matrix has {} columns but instance has {} items",
            matrix.p(),
            instance.p()
        )));
    }
    channel.validate()?;
    let q = channel.q_table(instance.k())?;
    let mask = instance.packed_indicator();
    let mut y = BitVec::zeros(matrix.n());
    for i in 0..matrix.n() {
        let defectives_in_test = bits::count_and(matrix.row(i), mask.words());
        let u: f64 = rng.random();
        if u < q[defectives_in_test] {
            y.set(i, true);
        }
    }
    Ok(Observations::new(y))
}
