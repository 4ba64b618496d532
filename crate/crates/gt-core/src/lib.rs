//! Group-testing simulation and analysis toolkit.
//!
//! The problem: a hidden set of k defective items among p is probed by
//! pooled binary tests. Each test reports (possibly noisily) whether it
//! contains a defective. This crate provides:
//!
//! - [`model`]: instances, i.i.d. Bernoulli test designs, bit-packed test
//!   matrices, noise channels, and observation synthesis;
//! - [`channel`]: exact finite-k analysis of the single-item channel —
//!   marginals, the information-density table, mutual information, and
//!   its Bernstein parameters;
//! - [`decode`]: separate decoding of items by information-density
//!   thresholding, plus the COMP, DD, and NCOMP baselines;
//! - [`bounds`]: concentration functions, non-asymptotic error bounds,
//!   asymptotic achievability and converse threshold coefficients, the
//!   joint-decoding optima, and rate-curve generation;
//! - [`sim`]: a seeded, thread-count-independent Monte Carlo harness.
//!
//! All randomness flows through [`rng::stream`]: explicit seeds, no global
//! state, bit-identical reruns.
//!
//! ```
//! use gt_core::*;
//!
//! let (p, k, n) = (200, 5, 600);
//! let nu = std::f64::consts::LN_2;
//! let instance = sample_defective_set(p, k, 1)?;
//! let design = TestDesign::new(n, nu, k)?;
//! let matrix = generate_test_matrix(&design, p, 2)?;
//! let channel = NoiseChannel::Symmetric { rho: 0.05 };
//! let observations = run_tests(&matrix, &instance, &channel, 3)?;
//!
//! // threshold each item's accumulated information density
//! let marginals = channel_marginals(k, nu, &channel)?;
//! let gamma = default_gamma(n, info_stats(&marginals).i1, 0.5);
//! let config = SeparateDecoderConfig::new(gamma, info_density_table(&marginals))?;
//! let decoded = decode_separate(&matrix, &observations, &config)?;
//! assert_eq!(decoded.estimated_set, instance.defective_set());
//! # Ok::<(), gt_core::Error>(())
//! ```

pub mod bits;
pub mod bounds;
pub mod channel;
pub mod decode;
pub mod error;
pub mod fmtnum;
pub mod model;
pub mod rng;
pub mod sim;

pub use bounds::{
    achievability_coeff, binary_convolution, binary_entropy, converse_coeff, curves_csv,
    figure1_curves, joint_optimum_coeff, kl_binary, optimal_nu_symmetric, pe_lower_bound_item,
    pe_upper_bound_exact, psi_bernstein, psi_noiseless, score_tail_exact, score_tail_mc, CurveKind,
    CurveRow, NuPolicy, PartialMode, SparsityRegime, ThresholdModel, ThresholdResult,
};
pub use channel::{
    channel_marginals, i1_asymptotic_noiseless, i1_asymptotic_symmetric, info_density_table,
    info_stats, nu_symm, ChannelMarginals, InfoDensityStats, InfoDensityTable,
};
pub use decode::{
    decode_comp, decode_dd, decode_ncomp, decode_separate, decode_separate_item, default_gamma,
    separate_score, DecodeResult, SeparateDecoderConfig,
};
pub use error::{Error, Result};
pub use model::{
    generate_test_matrix, run_tests, sample_defective_set, NoiseChannel, Observations,
    ProblemInstance, RecoveryCriterion, TestDesign, TestMatrix,
};
pub use sim::{
    nerr_sweep, run_experiment, run_trial, wilson_ci_95, DecoderSpec, ExperimentConfig, NerrPoint,
    SimPoint, SimResult, TrialOutcome,
};
