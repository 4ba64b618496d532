//! `gt` — group-testing analysis and simulation CLI.
//!
//! Subcommands: `analyze` (channel tables as JSON), `curves` (rate-constant
//! CSV), `simulate` (Monte Carlo experiments from a JSON config), `phase`
//! (`E[N_err]/k` sweeps), `bound` (non-asymptotic error bounds).
//!
//! Exit codes: 0 success, 1 I/O failure, 2 argument or domain error.
//! All randomness flows from explicit `--seed`/config seeds; reruns with
//! identical flags produce byte-identical outputs regardless of GT_THREADS.

use std::f64::consts::LN_2;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use gt_core::fmtnum::{round_sig9, sig9};
use gt_core::{
    channel_marginals, curves_csv, figure1_curves, i1_asymptotic_noiseless,
    i1_asymptotic_symmetric, info_density_table, info_stats, nerr_sweep, pe_lower_bound_item,
    pe_upper_bound_exact, run_experiment, CurveKind, DecoderSpec, ExperimentConfig, NoiseChannel,
    NuPolicy, RecoveryCriterion, ThresholdModel,
};

#[derive(Parser)]
#[command(name = "gt", version, about = "Group-testing analysis and simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Noiseless,
    Symmetric,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum NuPolicyArg {
    Log2,
    NuSymm,
    Optimize,
}

impl From<NuPolicyArg> for NuPolicy {
    fn from(a: NuPolicyArg) -> Self {
        match a {
            NuPolicyArg::Log2 => NuPolicy::Log2,
            NuPolicyArg::NuSymm => NuPolicy::NuSymmLimit,
            NuPolicyArg::Optimize => NuPolicy::Optimize,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print exact channel marginals, the information-density table, I1,
    /// and its Bernstein parameters as JSON
    Analyze {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        nu: f64,
        #[arg(long, value_enum)]
        model: ModelArg,
        /// Crossover probability (symmetric model only)
        #[arg(long)]
        rho: Option<f64>,
    },
    /// Write asymptotic rate-constant curves c(theta) as CSV
    Curves {
        #[arg(long, value_enum, default_value = "noiseless")]
        model: ModelArg,
        #[arg(long)]
        rho: Option<f64>,
        /// Grid as `start:stop:count` or a comma-separated list
        #[arg(long, default_value = "0.01:0.99:99")]
        theta_grid: String,
        /// Comma-separated subset of exact,fp,fn,both,joint,converse
        #[arg(long, default_value = "exact,fp,fn,both,joint,converse")]
        modes: String,
        #[arg(long, value_enum, default_value = "log2")]
        nu_policy: NuPolicyArg,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
    },
    /// Run Monte Carlo experiments described by a JSON config
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Prefix for `<prefix>.csv` and `<prefix>.json` (default: config stem)
        #[arg(long)]
        out_prefix: Option<PathBuf>,
    },
    /// Sweep `E[N_err]/k` over an n grid with the separate decoder
    Phase {
        #[arg(long, value_enum, default_value = "noiseless")]
        model: ModelArg,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        k: usize,
        /// Grid as `start:stop:step` or a comma-separated list
        #[arg(long)]
        n_grid: String,
        #[arg(long, default_value_t = 500)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Bernoulli design intensity (entries are Bernoulli(nu/k))
        #[arg(long, default_value_t = LN_2)]
        nu: f64,
        /// Threshold slack: gamma = n I1 (1 - delta)
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        /// Output CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the non-asymptotic achievability and converse bounds
    Bound {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        /// Decoder threshold for the upper bound
        #[arg(long)]
        gamma: f64,
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long, default_value_t = LN_2)]
        nu: f64,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum CliError {
    /// Exit code 1: filesystem trouble.
    Io(String),
    /// Exit code 2: bad arguments or domain violations.
    Usage(String),
}

impl From<gt_core::Error> for CliError {
    fn from(e: gt_core::Error) -> Self {
        match e {
            gt_core::Error::Io(_) | gt_core::Error::Format(_) => CliError::Io(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("GT_THREADS") {
        match threads.parse::<usize>() {
            Ok(t) if t >= 1 => {
                // ignore the error if a global pool already exists
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build_global();
            }
            _ => {
                eprintln!("error: GT_THREADS must be a positive integer (got '{threads}')");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn channel_from(model: ModelArg, rho: Option<f64>) -> CliResult<NoiseChannel> {
    match (model, rho) {
        (ModelArg::Noiseless, None) => Ok(NoiseChannel::Noiseless),
        (ModelArg::Noiseless, Some(_)) => Err(CliError::Usage(
            "--rho is only valid with --model symmetric".into(),
        )),
        (ModelArg::Symmetric, Some(rho)) => {
            if rho > 0.0 && rho < 0.5 {
                Ok(NoiseChannel::Symmetric { rho })
            } else {
                Err(CliError::Usage(format!(
                    "rho must lie in (0, 1/2) (got {rho})"
                )))
            }
        }
        (ModelArg::Symmetric, None) => {
            Err(CliError::Usage("--model symmetric requires --rho".into()))
        }
    }
}

fn threshold_model_from(model: ModelArg, rho: Option<f64>) -> CliResult<ThresholdModel> {
    match channel_from(model, rho)? {
        NoiseChannel::Noiseless => Ok(ThresholdModel::Noiseless),
        NoiseChannel::Symmetric { rho } => Ok(ThresholdModel::Symmetric { rho }),
        NoiseChannel::General { .. } => unreachable!("CLI models are noiseless/symmetric"),
    }
}

/// JSON value for a possibly non-finite f64: numbers are rounded to nine
/// significant digits; infinities become "inf"/"-inf"; NaN (an unreachable
/// table cell) becomes null.
fn ext_real(x: f64) -> Value {
    if x.is_nan() {
        Value::Null
    } else if x.is_infinite() {
        Value::String(if x > 0.0 { "inf" } else { "-inf" }.to_string())
    } else {
        json!(round_sig9(x))
    }
}

/// Round every number in a JSON tree to nine significant digits.
fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if n.is_f64() {
                    if let Some(rounded) = serde_json::Number::from_f64(round_sig9(f)) {
                        *v = Value::Number(rounded);
                    }
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn parse_f64_grid(spec: &str) -> CliResult<Vec<f64>> {
    let bad = |m: String| CliError::Usage(m);
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad(format!("grid '{spec}' must be start:stop:count")));
        }
        let start: f64 = parts[0]
            .parse()
            .map_err(|_| bad(format!("bad grid start '{}'", parts[0])))?;
        let stop: f64 = parts[1]
            .parse()
            .map_err(|_| bad(format!("bad grid stop '{}'", parts[1])))?;
        let count: usize = parts[2]
            .parse()
            .map_err(|_| bad(format!("bad grid count '{}'", parts[2])))?;
        if count == 0 || stop < start {
            return Err(bad(format!("grid '{spec}' is empty or reversed")));
        }
        if count == 1 {
            return Ok(vec![start]);
        }
        Ok((0..count)
            .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
            .collect())
    } else {
        spec.split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| bad(format!("bad grid value '{s}'")))
            })
            .collect()
    }
}

fn parse_usize_grid(spec: &str) -> CliResult<Vec<usize>> {
    let bad = |m: String| CliError::Usage(m);
    let mut values: Vec<usize> = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad(format!("grid '{spec}' must be start:stop:step")));
        }
        let start: usize = parts[0]
            .parse()
            .map_err(|_| bad(format!("bad grid start '{}'", parts[0])))?;
        let stop: usize = parts[1]
            .parse()
            .map_err(|_| bad(format!("bad grid stop '{}'", parts[1])))?;
        let step: usize = parts[2]
            .parse()
            .map_err(|_| bad(format!("bad grid step '{}'", parts[2])))?;
        if step == 0 || stop < start {
            return Err(bad(format!("grid '{spec}' is empty or reversed")));
        }
        (start..=stop).step_by(step).collect()
    } else {
        spec.split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| bad(format!("bad grid value '{s}'")))
            })
            .collect::<CliResult<_>>()?
    };
    values.sort_unstable();
    values.dedup();
    if values.is_empty() {
        return Err(bad(format!("grid '{spec}' is empty")));
    }
    Ok(values)
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Analyze { k, nu, model, rho } => cmd_analyze(k, nu, model, rho),
        Command::Curves {
            model,
            rho,
            theta_grid,
            modes,
            nu_policy,
            out,
        } => cmd_curves(model, rho, &theta_grid, &modes, nu_policy, &out),
        Command::Simulate { config, out_prefix } => cmd_simulate(&config, out_prefix.as_deref()),
        Command::Phase {
            model,
            rho,
            p,
            k,
            n_grid,
            trials,
            seed,
            nu,
            delta,
            out,
        } => cmd_phase(
            model,
            rho,
            p,
            k,
            &n_grid,
            trials,
            seed,
            nu,
            delta,
            out.as_deref(),
        ),
        Command::Bound {
            p,
            k,
            n,
            gamma,
            model,
            rho,
            nu,
            samples,
            seed,
        } => cmd_bound(p, k, n, gamma, model, rho, nu, samples, seed),
    }
}

fn cmd_analyze(k: usize, nu: f64, model: ModelArg, rho: Option<f64>) -> CliResult<()> {
    let channel = channel_from(model, rho)?;
    let marginals = channel_marginals(k, nu, &channel)?;
    let table = info_density_table(&marginals);
    let stats = info_stats(&marginals);
    let i1_asymptotic = match channel {
        NoiseChannel::Noiseless => i1_asymptotic_noiseless(k),
        NoiseChannel::Symmetric { rho } => i1_asymptotic_symmetric(nu, rho, k)?,
        NoiseChannel::General { .. } => unreachable!(),
    };
    let iota_json: Vec<Vec<Value>> = (0..2)
        .map(|x| (0..2).map(|y| ext_real(table.iota[x][y])).collect())
        .collect();
    let mut out = json!({
        "k": k,
        "nu": nu,
        "model": match model { ModelArg::Noiseless => "noiseless", ModelArg::Symmetric => "symmetric" },
        "rho": rho,
        "p_x1": marginals.p_x[1],
        "p_y": marginals.p_y,
        "p_y_given_x": marginals.p_y_given_x,
        "iota": iota_json,
        "reachable_y": table.reachable,
        "i1_exact": stats.i1,
        "i1_asymptotic": i1_asymptotic,
        "k_i1": stats.c_mean,
        "c_mean": stats.c_mean,
        "c_var": stats.c_var,
        "c_max": ext_real(stats.c_max),
    });
    round_json(&mut out);
    println!(
        "{}",
        serde_json::to_string_pretty(&out).expect("serializable")
    );
    Ok(())
}

fn cmd_curves(
    model: ModelArg,
    rho: Option<f64>,
    theta_grid: &str,
    modes: &str,
    nu_policy: NuPolicyArg,
    out: &Path,
) -> CliResult<()> {
    let model = threshold_model_from(model, rho)?;
    let grid = parse_f64_grid(theta_grid)?;
    let kinds: Vec<CurveKind> = modes
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<CurveKind>()
                .map_err(|e| CliError::Usage(e.to_string()))
        })
        .collect::<CliResult<_>>()?;
    let rows = figure1_curves(&model, &grid, &kinds, nu_policy.into())?;
    write_file(out, &curves_csv(&rows))?;
    println!(
        "wrote {} rows ({} curves x {} thetas) to {}",
        rows.len(),
        kinds.len(),
        grid.len(),
        out.display()
    );
    Ok(())
}

/// On-disk experiment description: one ensemble swept by several decoders.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateFile {
    p: usize,
    k: usize,
    channel: NoiseChannel,
    nu: f64,
    n_values: Vec<usize>,
    decoders: Vec<DecoderSpec>,
    criterion: RecoveryCriterion,
    trials: u64,
    master_seed: u64,
}

fn cmd_simulate(config_path: &Path, out_prefix: Option<&Path>) -> CliResult<()> {
    let raw = std::fs::read_to_string(config_path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", config_path.display())))?;
    let file: SimulateFile = serde_json::from_str(&raw)
        .map_err(|e| CliError::Usage(format!("config {}: {e}", config_path.display())))?;
    if file.decoders.is_empty() {
        return Err(CliError::Usage("config lists no decoders".into()));
    }
    let prefix: PathBuf = out_prefix
        .map(Path::to_path_buf)
        .unwrap_or_else(|| config_path.with_extension(""));

    let mut csv = String::from("n,decoder,success_rate,ci_lo,ci_hi,mean_fp,mean_fn,trials,seed\n");
    let mut results = Vec::new();
    for decoder in &file.decoders {
        let cfg = ExperimentConfig {
            p: file.p,
            k: file.k,
            channel: file.channel.clone(),
            nu: file.nu,
            n_values: file.n_values.clone(),
            decoder: decoder.clone(),
            criterion: file.criterion,
            trials: file.trials,
            master_seed: file.master_seed,
        };
        cfg.validate()
            .map_err(|e| CliError::Usage(format!("config: {e}")))?;
        let result = run_experiment(&cfg)?;
        for pt in &result.points {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{},{},{}",
                pt.n,
                decoder.name(),
                sig9(pt.success_rate),
                sig9(pt.wilson_ci_95.0),
                sig9(pt.wilson_ci_95.1),
                sig9(pt.mean_fp),
                sig9(pt.mean_fn),
                pt.trials,
                file.master_seed,
            );
            println!(
                "{:>9} n={:<6} success={} fp={} fn={}",
                decoder.name(),
                pt.n,
                sig9(pt.success_rate),
                sig9(pt.mean_fp),
                sig9(pt.mean_fn),
            );
        }
        results.push(result);
    }

    let csv_path = prefix.with_extension("csv");
    let json_path = prefix.with_extension("json");
    write_file(&csv_path, &csv)?;
    let mut doc = json!({ "config": file, "results": results });
    round_json(&mut doc);
    write_file(
        &json_path,
        &format!(
            "{}\n",
            serde_json::to_string_pretty(&doc).expect("serializable")
        ),
    )?;
    println!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_phase(
    model: ModelArg,
    rho: Option<f64>,
    p: usize,
    k: usize,
    n_grid: &str,
    trials: u64,
    seed: u64,
    nu: f64,
    delta: f64,
    out: Option<&Path>,
) -> CliResult<()> {
    let channel = channel_from(model, rho)?;
    let n_values = parse_usize_grid(n_grid)?;
    let cfg = ExperimentConfig {
        p,
        k,
        channel,
        nu,
        n_values,
        decoder: DecoderSpec::Separate { delta },
        criterion: RecoveryCriterion::AvgErrors,
        trials,
        master_seed: seed,
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let rows = nerr_sweep(&cfg)?;
    let mut csv = String::from("n,nerr_ratio,std_error,trials,seed\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            r.n,
            sig9(r.ratio),
            sig9(r.std_error),
            r.trials,
            seed
        );
    }
    match out {
        Some(path) => {
            write_file(path, &csv)?;
            println!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_bound(
    p: usize,
    k: usize,
    n: usize,
    gamma: f64,
    model: ModelArg,
    rho: Option<f64>,
    nu: f64,
    samples: u64,
    seed: u64,
) -> CliResult<()> {
    let channel = channel_from(model, rho)?;
    let marginals = channel_marginals(k, nu, &channel)?;
    let upper = pe_upper_bound_exact(n, p, &marginals, gamma, samples, seed)?;
    let lower = pe_lower_bound_item(n, p, &marginals, samples, seed.wrapping_add(1))?;
    let mut out = json!({
        "p": p,
        "k": k,
        "n": n,
        "gamma": gamma,
        "nu": nu,
        "model": match model { ModelArg::Noiseless => "noiseless", ModelArg::Symmetric => "symmetric" },
        "rho": rho,
        "samples": samples,
        "seed": seed,
        "upper": {
            "bound": upper.bound.min(1.0),
            "raw": upper.bound,
            "miss_term": upper.miss_term,
            "false_alarm_term": upper.false_alarm_term,
            "tail_probability": upper.tail.probability,
            "tail_std_error": upper.tail.std_error,
            "std_error": upper.std_error,
        },
        "lower": {
            "bound": lower.bound,
            "threshold": lower.threshold,
            "tail_probability": lower.tail.probability,
            "tail_std_error": lower.tail.std_error,
            "std_error": lower.std_error,
        },
    });
    round_json(&mut out);
    println!(
        "{}",
        serde_json::to_string_pretty(&out).expect("serializable")
    );
    Ok(())
}
