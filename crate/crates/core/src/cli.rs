//! Command-line front end. `main` only parses arguments and maps outcomes to
//! exit codes; everything else lives here so tests can drive it directly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::config::{load_config, ConfigErrors, ExperimentConfig};
use crate::engine::{build_grid, posterior_grid, predictive_conditional};
use crate::harness::{bayes_risk_curve, consistency_trace, crosscheck_report};
use crate::model::{sample_joint, Model, PairedSample, Support};
use crate::seed::derive_seed;

pub const EXIT_EXPERIMENT: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "postpred",
    version,
    about = "Posterior predictive conditional density experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum CommandKind {
    Estimate,
    RiskCurve,
    Trace,
    Crosscheck,
    Validate,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the estimated conditional density of X2 given X1 on a probe grid.
    Estimate(CommonArgs),
    /// Monte Carlo Bayes risk (L¹ and total variation) across sample sizes.
    RiskCurve(CommonArgs),
    /// Absolute error at fixed probes along one growing sample.
    Trace(CommonArgs),
    /// Compare closed-form expressions with the numeric engine.
    Crosscheck(CommonArgs),
    /// Validate a configuration and print it with defaults filled in.
    Validate(CommonArgs),
}

impl Command {
    pub fn split(self) -> (CommandKind, CommonArgs) {
        match self {
            Command::Estimate(a) => (CommandKind::Estimate, a),
            Command::RiskCurve(a) => (CommandKind::RiskCurve, a),
            Command::Trace(a) => (CommandKind::Trace, a),
            Command::Crosscheck(a) => (CommandKind::Crosscheck, a),
            Command::Validate(a) => (CommandKind::Validate, a),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Master seed; overrides `seed` in the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; overrides `output_dir` and $POSTPRED_OUT_DIR.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override a configuration field, e.g. `--set risk_curve.replications=100`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Why a command did not complete.
#[derive(Debug)]
pub enum CliError {
    Config(ConfigErrors),
    Experiment(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Experiment(_) => EXIT_EXPERIMENT,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Experiment(e) => write!(f, "experiment failed: {e}"),
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Experiment(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Experiment(e.to_string())
    }
}

/// Loads the configuration with command-line overrides applied.
pub fn resolve_config(args: &CommonArgs) -> Result<ExperimentConfig, CliError> {
    let mut overrides = args.set.clone();
    if let Some(seed) = args.seed {
        overrides.push(format!("seed={seed}"));
    }
    if let Some(out) = &args.out {
        overrides.push(format!(
            "output_dir={}",
            serde_json::to_string(&out.to_string_lossy()).expect("string")
        ));
    }
    if let Some(threads) = args.threads {
        overrides.push(format!("threads={threads}"));
    }
    load_config(&args.config, &overrides).map_err(CliError::Config)
}

/// Runs one command and returns the files written.
pub fn execute(kind: CommandKind, config: &ExperimentConfig) -> Result<Vec<PathBuf>, CliError> {
    if kind == CommandKind::Validate {
        println!("{}", config.to_json_pretty());
        return Ok(Vec::new());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| CliError::Experiment(format!("thread pool: {e}")))?;
    std::fs::create_dir_all(&config.output_dir)?;
    pool.install(|| match kind {
        CommandKind::Estimate => run_estimate(config),
        CommandKind::RiskCurve => run_risk_curve(config),
        CommandKind::Trace => run_trace(config),
        CommandKind::Crosscheck => run_crosscheck(config),
        CommandKind::Validate => unreachable!(),
    })
}

/// Entry point shared by the binary and tests; returns the exit code.
pub fn run(cli: Cli) -> i32 {
    let (kind, args) = cli.command.split();
    let outcome = resolve_config(&args).and_then(|c| execute(kind, &c));
    match outcome {
        Ok(files) => {
            for f in files {
                eprintln!("wrote {}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

/// Seventeen significant digits in a locale-independent form.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_header(command: &str, config: &ExperimentConfig, columns: &str) -> String {
    format!(
        "# postpred {command} seed={} fingerprint={}\n{columns}\n",
        config.seed,
        config.fingerprint()
    )
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}

fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> Result<PathBuf, CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("json serializes");
    text.push('\n');
    write_file(dir, name, &text)
}

fn run_estimate(config: &ExperimentConfig) -> Result<Vec<PathBuf>, CliError> {
    let model = config.model_spec();
    let est = &config.estimate;
    let (sample, theta, x1) = match &est.sample {
        Some(pairs) => {
            let x1 = est.x1.ok_or_else(|| {
                CliError::Config(ConfigErrors(vec![
                    "estimate.x1: required when estimate.sample is given".into(),
                ]))
            })?;
            (PairedSample::new(pairs.clone()), None, x1)
        }
        None => {
            let draw = sample_joint(&model, est.n, derive_seed(config.seed, "estimate", &[]));
            let x1 = est.x1.unwrap_or(draw.fresh_pair.x1);
            (draw.sample, Some(draw.theta), x1)
        }
    };
    let grid = Arc::new(build_grid(&model, config.engine.grid_resolution)?);
    let post = posterior_grid(&model, &grid, &sample)?;
    let estimate = predictive_conditional(&model, &post, x1, &config.engine)?;
    let points = match model.x2_support() {
        Support::Discrete(points) => points,
        Support::Continuous { .. } => est.probe.values(),
    };
    let mut csv = csv_header("estimate", config, "t,density");
    for t in points {
        writeln!(csv, "{},{}", fmt_f64(t), fmt_f64(estimate.density(t))).expect("string write");
    }
    let total_mass = estimate.total_mass(&config.engine)?;
    let sidecar = json!({
        "command": "estimate",
        "model": model.name(),
        "hyperparams": model.hyperparams(),
        "n": sample.n(),
        "x1": x1,
        "theta": theta,
        "seed": config.seed,
        "fingerprint": config.fingerprint(),
        "total_mass": total_mass,
        "posterior_mean_theta": post.mean(),
        "sample": sample,
        "config": config.reproducible_view(),
    });
    let dir = &config.output_dir;
    Ok(vec![
        write_file(dir, "estimate.csv", &csv)?,
        write_json(dir, "estimate.json", &sidecar)?,
    ])
}

fn run_risk_curve(config: &ExperimentConfig) -> Result<Vec<PathBuf>, CliError> {
    let model = config.model_spec();
    let rc = &config.risk_curve;
    let curve = bayes_risk_curve(
        &model,
        &config.engine,
        &rc.n_values,
        rc.replications,
        config.seed,
        rc.estimator,
    )?;
    let mut csv = csv_header(
        "risk-curve",
        config,
        "n,mean_l1,se_l1,mean_l1_sq,se_l1_sq,mean_tv,se_tv,mean_tv_sq,se_tv_sq,replications,failures",
    );
    for r in &curve.records {
        let floats = [
            r.mean_l1,
            r.se_l1,
            r.mean_l1_sq,
            r.se_l1_sq,
            r.mean_tv,
            r.se_tv,
            r.mean_tv_sq,
            r.se_tv_sq,
        ];
        let floats: Vec<String> = floats.iter().map(|&x| fmt_f64(x)).collect();
        writeln!(
            csv,
            "{},{},{},{}",
            r.n,
            floats.join(","),
            r.replications,
            r.failures
        )
        .expect("string write");
    }
    let sidecar = json!({
        "command": "risk-curve",
        "seed": config.seed,
        "fingerprint": config.fingerprint(),
        "log_log_slope_l1_sq": curve.log_log_slope_l1_sq(),
        "log_log_slope_tv_sq": curve.log_log_slope_tv_sq(),
        "curve": curve,
        "config": config.reproducible_view(),
    });
    let dir = &config.output_dir;
    Ok(vec![
        write_file(dir, "risk_curve.csv", &csv)?,
        write_json(dir, "risk_curve.json", &sidecar)?,
    ])
}

fn run_trace(config: &ExperimentConfig) -> Result<Vec<PathBuf>, CliError> {
    let model = config.model_spec();
    let tc = &config.trace;
    let trace = consistency_trace(
        &model,
        &config.engine,
        tc.theta,
        &tc.probes,
        &tc.checkpoints,
        config.seed,
    )?;
    let mut csv = csv_header("trace", config, "n,t,x1,abs_error,true_value,estimate");
    for e in &trace.entries {
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            e.n,
            fmt_f64(e.t),
            fmt_f64(e.x1),
            fmt_f64(e.abs_error),
            fmt_f64(e.true_value),
            fmt_f64(e.estimate)
        )
        .expect("string write");
    }
    let sidecar = json!({
        "command": "trace",
        "seed": config.seed,
        "fingerprint": config.fingerprint(),
        "theta": trace.theta,
        "theta_drawn_from_prior": trace.theta_drawn_from_prior,
        "note": trace.note,
        "config": config.reproducible_view(),
    });
    let dir = &config.output_dir;
    Ok(vec![
        write_file(dir, "trace.csv", &csv)?,
        write_json(dir, "trace.json", &sidecar)?,
    ])
}

fn run_crosscheck(config: &ExperimentConfig) -> Result<Vec<PathBuf>, CliError> {
    let model = config.model_spec();
    let cc = &config.crosscheck;
    let report = crosscheck_report(
        &model,
        &config.engine,
        &cc.n_values,
        cc.samples_per_n,
        cc.probes_per_sample,
        config.seed,
    )?;
    let out = json!({
        "command": "crosscheck",
        "seed": config.seed,
        "fingerprint": config.fingerprint(),
        "report": report,
        "config": config.reproducible_view(),
    });
    Ok(vec![write_json(
        &config.output_dir,
        "crosscheck.json",
        &out,
    )?])
}
