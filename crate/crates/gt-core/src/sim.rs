//! Seeded Monte Carlo experiments: success-probability curves and
//! `E[N_err]/k` sweeps.
//!
//! Each trial derives its defective-set, matrix, and noise streams from
//! (master_seed, n, trial_index) and a stream tag, so results are
//! bit-identical regardless of thread count or trial order. Aggregation
//! sums integer counters only.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{channel_marginals, info_density_table, info_stats, InfoDensityTable};
use crate::decode::{
    decode_comp, decode_dd, decode_ncomp, decode_separate, default_gamma, SeparateDecoderConfig,
};
use crate::error::{Error, Result};
use crate::model::{
    generate_test_matrix_rng, run_tests_rng, sample_defective_set_rng, NoiseChannel,
    ProblemInstance, RecoveryCriterion, TestDesign,
};
use crate::rng::stream;

fn default_separate_delta() -> f64 {
    0.5
}

fn default_ncomp_cap() -> f64 {
    1.5
}

/// Decoder selection plus its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum DecoderSpec {
    /// Information-density threshold with gamma = n I1 (1 - delta).
    Separate {
        #[serde(default = "default_separate_delta")]
        delta: f64,
    },
    Comp,
    Dd,
    /// Positive-fraction threshold at 1 - rho (1 + delta_cap). `rho`
    /// defaults to the channel's crossover probability.
    Ncomp {
        #[serde(default)]
        rho: Option<f64>,
        #[serde(default = "default_ncomp_cap")]
        delta_cap: f64,
    },
}

impl DecoderSpec {
    pub fn name(&self) -> &'static str {
        match self {
            DecoderSpec::Separate { .. } => "separate",
            DecoderSpec::Comp => "comp",
            DecoderSpec::Dd => "dd",
            DecoderSpec::Ncomp { .. } => "ncomp",
        }
    }
}

/// One Monte Carlo experiment: a (p, k, channel, nu) ensemble swept over
/// `n_values`, decoded by one decoder, judged by one criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub p: usize,
    pub k: usize,
    pub channel: NoiseChannel,
    pub nu: f64,
    pub n_values: Vec<usize>,
    pub decoder: DecoderSpec,
    pub criterion: RecoveryCriterion,
    pub trials: u64,
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k >= self.p {
            return Err(Error::invalid(format!(
                "need 0 < k < p (k = {}, p = {})",
                self.k, self.p
            )));
        }
        self.channel.validate()?;
        TestDesign::new(0, self.nu, self.k)?;
        if self.n_values.is_empty() {
            return Err(Error::invalid("n_values must be non-empty"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials must be >= 1"));
        }
        self.criterion.validate(self.p, self.k)?;
        if let DecoderSpec::Separate { delta } = self.decoder {
            if !(0.0..1.0).contains(&delta) {
                return Err(Error::invalid(format!(
                    "separate decoder delta must lie in [0, 1) (got {delta})"
                )));
            }
        }
        if let DecoderSpec::Ncomp {
            rho: Some(rho),
            delta_cap,
        } = self.decoder
        {
            if !(0.0..0.5).contains(&rho) {
                return Err(Error::invalid(format!(
                    "ncomp rho must lie in [0, 1/2) (got {rho})"
                )));
            }
            if delta_cap < 0.0 {
                return Err(Error::invalid("ncomp delta_cap must be >= 0"));
            }
        }
        Ok(())
    }
}

/// Outcome of a single trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub false_positives: usize,
    pub false_negatives: usize,
    pub success: bool,
}

/// Aggregated results at one value of n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimPoint {
    pub n: usize,
    pub success_count: u64,
    pub trials: u64,
    pub success_rate: f64,
    pub mean_fp: f64,
    pub mean_fn: f64,
    /// mean_fp + mean_fn, by definition.
    pub mean_nerr: f64,
    pub wilson_ci_95: (f64, f64),
    /// Standard error of mean_nerr across trials.
    pub nerr_std_error: f64,
}

/// Results for every n in the sweep, in the order of `n_values`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub config: ExperimentConfig,
    pub points: Vec<SimPoint>,
}

/// Per-experiment decoder context: everything derivable from
/// (k, nu, channel) once, shared across trials.
struct DecoderContext {
    spec: DecoderSpec,
    /// Present for the separate decoder.
    table: Option<InfoDensityTable>,
    i1: f64,
    channel_rho: f64,
}

impl DecoderContext {
    fn prepare(cfg: &ExperimentConfig) -> Result<Self> {
        let (table, i1) = if matches!(cfg.decoder, DecoderSpec::Separate { .. }) {
            let marginals = channel_marginals(cfg.k, cfg.nu, &cfg.channel)?;
            let stats = info_stats(&marginals);
            (Some(info_density_table(&marginals)), stats.i1)
        } else {
            (None, 0.0)
        };
        let channel_rho = match cfg.channel {
            NoiseChannel::Symmetric { rho } => rho,
            _ => 0.0,
        };
        Ok(DecoderContext {
            spec: cfg.decoder.clone(),
            table,
            i1,
            channel_rho,
        })
    }

    fn decode(
        &self,
        matrix: &crate::model::TestMatrix,
        obs: &crate::model::Observations,
        n: usize,
    ) -> Result<Vec<usize>> {
        match &self.spec {
            DecoderSpec::Separate { delta } => {
                let gamma = default_gamma(n, self.i1, *delta);
                let cfg = SeparateDecoderConfig::new(
                    gamma,
                    self.table.as_ref().expect("prepared table").clone(),
                )?;
                Ok(decode_separate(matrix, obs, &cfg)?.estimated_set)
            }
            DecoderSpec::Comp => Ok(decode_comp(matrix, obs)?.estimated_set),
            DecoderSpec::Dd => Ok(decode_dd(matrix, obs)?.estimated_set),
            DecoderSpec::Ncomp { rho, delta_cap } => {
                let rho = rho.unwrap_or(self.channel_rho);
                Ok(decode_ncomp(matrix, obs, rho, *delta_cap)?.estimated_set)
            }
        }
    }
}

fn count_errors(estimate: &[usize], instance: &ProblemInstance) -> (usize, usize) {
    let truth = instance.defective_set();
    let mut fp = 0usize;
    let mut hits = 0usize;
    let mut t = 0usize;
    for &j in estimate {
        while t < truth.len() && truth[t] < j {
            t += 1;
        }
        if t < truth.len() && truth[t] == j {
            hits += 1;
            t += 1;
        } else {
            fp += 1;
        }
    }
    (fp, truth.len() - hits)
}

fn run_trial_with_ctx(
    cfg: &ExperimentConfig,
    ctx: &DecoderContext,
    n: usize,
    trial_index: u64,
) -> Result<TrialOutcome> {
    let ixs = [n as u64, trial_index];
    let instance = sample_defective_set_rng(
        cfg.p,
        cfg.k,
        &mut stream(cfg.master_seed, "trial-defectives", &ixs),
    )?;
    let design = TestDesign::new(n, cfg.nu, cfg.k)?;
    let matrix = generate_test_matrix_rng(
        &design,
        cfg.p,
        &mut stream(cfg.master_seed, "trial-matrix", &ixs),
    )?;
    let obs = run_tests_rng(
        &matrix,
        &instance,
        &cfg.channel,
        &mut stream(cfg.master_seed, "trial-noise", &ixs),
    )?;
    let estimate = ctx.decode(&matrix, &obs, n)?;
    let (fp, fneg) = count_errors(&estimate, &instance);
    Ok(TrialOutcome {
        false_positives: fp,
        false_negatives: fneg,
        success: cfg.criterion.allows(fp, fneg),
    })
}

/// Run one trial: fresh defective set, matrix, and noise from trial-derived
/// streams, then decode and score against the criterion. Deterministic in
/// (master_seed, n, trial_index).
pub fn run_trial(cfg: &ExperimentConfig, n: usize, trial_index: u64) -> Result<TrialOutcome> {
    cfg.validate()?;
    let ctx = DecoderContext::prepare(cfg)?;
    run_trial_with_ctx(cfg, &ctx, n, trial_index)
}

/// 95% Wilson score interval for `successes` out of `trials`.
pub fn wilson_ci_95(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959963984540054_f64;
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // rounding must never push the point estimate outside its own interval
    let lo = (center - half).max(0.0).min(phat);
    let hi = (center + half).min(1.0).max(phat);
    (lo, hi)
}

/// Run the full experiment: `trials` independent trials at every n.
/// Trials execute in parallel; the reduction sums integer counters, so the
/// output is independent of thread count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<SimResult> {
    cfg.validate()?;
    let ctx = DecoderContext::prepare(cfg)?;
    let mut points = Vec::with_capacity(cfg.n_values.len());
    for &n in &cfg.n_values {
        let outcomes: Vec<TrialOutcome> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| run_trial_with_ctx(cfg, &ctx, n, t))
            .collect::<Result<_>>()?;
        let mut success_count = 0u64;
        let mut sum_fp = 0u64;
        let mut sum_fn = 0u64;
        let mut sum_nerr_sq = 0u64;
        for o in &outcomes {
            success_count += u64::from(o.success);
            sum_fp += o.false_positives as u64;
            sum_fn += o.false_negatives as u64;
            let nerr = (o.false_positives + o.false_negatives) as u64;
            sum_nerr_sq += nerr * nerr;
        }
        let t = cfg.trials as f64;
        let mean_fp = sum_fp as f64 / t;
        let mean_fn = sum_fn as f64 / t;
        let mean_nerr = mean_fp + mean_fn;
        let nerr_var = if cfg.trials > 1 {
            (sum_nerr_sq as f64 - t * mean_nerr * mean_nerr).max(0.0) / (t - 1.0)
        } else {
            0.0
        };
        points.push(SimPoint {
            n,
            success_count,
            trials: cfg.trials,
            success_rate: success_count as f64 / t,
            mean_fp,
            mean_fn,
            mean_nerr,
            wilson_ci_95: wilson_ci_95(success_count, cfg.trials),
            nerr_std_error: (nerr_var / t).sqrt(),
        });
    }
    Ok(SimResult {
        config: cfg.clone(),
        points,
    })
}

/// One row of an `E[N_err]/k` sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NerrPoint {
    pub n: usize,
    /// Estimated `E[N_err] / k`.
    pub ratio: f64,
    /// Standard error of the ratio.
    pub std_error: f64,
    pub trials: u64,
}

/// Estimate `E[N_err]/k` over the configured n grid. Requires the separate
/// decoder.
pub fn nerr_sweep(cfg: &ExperimentConfig) -> Result<Vec<NerrPoint>> {
    if !matches!(cfg.decoder, DecoderSpec::Separate { .. }) {
        return Err(Error::invalid("nerr_sweep requires the separate decoder"));
    }
    let result = run_experiment(cfg)?;
    let k = cfg.k as f64;
    Ok(result
        .points
        .iter()
        .map(|pt| NerrPoint {
            n: pt.n,
            ratio: pt.mean_nerr / k,
            std_error: pt.nerr_std_error / k,
            trials: pt.trials,
        })
        .collect())
}
