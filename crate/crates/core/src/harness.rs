//! Monte Carlo experiments over the joint law of parameter, sample and fresh
//! observation: Bayes-risk curves, paired estimator comparisons, pathwise
//! consistency traces and closed-form cross-checks.
//!
//! Every replication draws from its own stream keyed by
//! `(master seed, tag, n, replication)`, and results are folded in
//! replication order, so outputs do not depend on the thread count.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::closed_form::{
    binormal_conjugate_estimate, binormal_estimate, closed_form_conditional, gammaexp_estimate,
    sufficient_stats, twocoin_estimate, twocoin_printed_estimate, SufficientStats,
};
use crate::engine::{
    build_grid, losses, posterior_grid, predictive_conditional, true_conditional_estimate,
    ConditionalDensityEstimate, EngineSettings, EstimateSource, Losses, PosteriorAccumulator,
    PosteriorGrid, ThetaGrid,
};
use crate::error::{Error, Result};
use crate::model::{
    sample_joint, true_conditional_density, JointDraw, Model, ModelKind, ModelSpec, PairedSample,
};
use crate::numerics::mean_and_se;
use crate::seed::{derive_seed, rng_from_seed};

/// Largest tolerated fraction of failed replications at any `n`.
pub const MAX_FAILURE_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    /// Grid posterior predictive conditional density.
    Numeric,
    /// Conjugate closed form.
    ClosedForm,
    /// The true conditional density itself (zero-loss oracle).
    PluginTruth,
    /// Predictive under the prior, ignoring the sample.
    PriorPredictive,
    /// True conditional density at the grid posterior mean of theta.
    PluginPosteriorMean,
}

impl EstimatorKind {
    fn needs_grid(self) -> bool {
        matches!(
            self,
            EstimatorKind::Numeric
                | EstimatorKind::PriorPredictive
                | EstimatorKind::PluginPosteriorMean
        )
    }
}

/// Short hash of the model and engine settings.
pub fn settings_fingerprint(model: &ModelSpec, settings: &EngineSettings) -> String {
    let payload = serde_json::json!({
        "model": model.name(),
        "hyperparams": model.hyperparams(),
        "engine": settings,
    });
    let digest = Sha256::digest(payload.to_string().as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskRecord {
    pub n: usize,
    pub mean_l1: f64,
    pub se_l1: f64,
    pub mean_l1_sq: f64,
    pub se_l1_sq: f64,
    pub mean_tv: f64,
    pub se_tv: f64,
    pub mean_tv_sq: f64,
    pub se_tv_sq: f64,
    /// Successful replications.
    pub replications: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskCurve {
    pub model: ModelKind,
    pub hyperparams: BTreeMap<String, f64>,
    pub estimator: EstimatorKind,
    pub master_seed: u64,
    pub fingerprint: String,
    pub records: Vec<RiskRecord>,
}

impl RiskCurve {
    pub fn n_values(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.n).collect()
    }

    /// Least-squares slope of `ln(mean squared L¹)` against `ln n`, over
    /// records with `n > 0`.
    pub fn log_log_slope_l1_sq(&self) -> f64 {
        log_log_slope(&self.records, |r| r.mean_l1_sq)
    }

    pub fn log_log_slope_tv_sq(&self) -> f64 {
        log_log_slope(&self.records, |r| r.mean_tv_sq)
    }
}

fn log_log_slope(records: &[RiskRecord], risk: impl Fn(&RiskRecord) -> f64) -> f64 {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.n > 0)
        .map(|r| ((r.n as f64).ln(), risk(r).ln()))
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Shared per-experiment state: the model, settings, and the parameter grid
/// with its prior posterior when some estimator needs them.
struct Context<'a> {
    model: &'a ModelSpec,
    settings: &'a EngineSettings,
    grid: Option<Arc<ThetaGrid>>,
    prior: Option<PosteriorGrid>,
}

impl<'a> Context<'a> {
    fn new(
        model: &'a ModelSpec,
        settings: &'a EngineSettings,
        estimators: &[EstimatorKind],
    ) -> Result<Self> {
        let (grid, prior) = if estimators.iter().any(|e| e.needs_grid()) {
            let grid = Arc::new(build_grid(model, settings.grid_resolution)?);
            let prior = posterior_grid(model, &grid, &PairedSample::default())?;
            (Some(grid), Some(prior))
        } else {
            (None, None)
        };
        Ok(Self {
            model,
            settings,
            grid,
            prior,
        })
    }

    /// Losses of each estimator on one joint draw. The grid posterior is
    /// computed at most once.
    fn replicate(&self, draw: &JointDraw, estimators: &[EstimatorKind]) -> Result<Vec<Losses>> {
        let x1 = draw.fresh_pair.x1;
        let n = draw.sample.n();
        let truth = true_conditional_estimate(
            self.model,
            draw.theta,
            x1,
            n,
            EstimateSource::TrueConditional,
            self.settings,
        )?;
        let mut posterior: Option<PosteriorGrid> = None;
        let mut out = Vec::with_capacity(estimators.len());
        for &kind in estimators {
            let estimate: ConditionalDensityEstimate = match kind {
                EstimatorKind::PluginTruth => truth.clone(),
                EstimatorKind::ClosedForm => {
                    closed_form_conditional(self.model, &draw.sample, x1, self.settings)?
                }
                EstimatorKind::PriorPredictive => predictive_conditional(
                    self.model,
                    self.prior.as_ref().expect("grid"),
                    x1,
                    self.settings,
                )?,
                EstimatorKind::Numeric | EstimatorKind::PluginPosteriorMean => {
                    if posterior.is_none() {
                        let grid = self.grid.as_ref().expect("grid");
                        posterior = Some(posterior_grid(self.model, grid, &draw.sample)?);
                    }
                    let post = posterior.as_ref().expect("posterior");
                    if kind == EstimatorKind::Numeric {
                        predictive_conditional(self.model, post, x1, self.settings)?
                    } else {
                        true_conditional_estimate(
                            self.model,
                            post.mean(),
                            x1,
                            n,
                            EstimateSource::PlugIn,
                            self.settings,
                        )?
                    }
                }
            };
            out.push(losses(&estimate, &truth, self.settings)?);
        }
        Ok(out)
    }
}

fn risk_seed(master_seed: u64, n: usize, replication: usize) -> u64 {
    derive_seed(master_seed, "risk", &[n as u64, replication as u64])
}

/// Per-replication losses of several estimators on shared draws, in
/// replication order. A failed replication is an `Err` for all estimators.
pub fn replication_losses(
    model: &ModelSpec,
    settings: &EngineSettings,
    n: usize,
    replications: usize,
    master_seed: u64,
    estimators: &[EstimatorKind],
) -> Result<Vec<Result<Vec<Losses>>>> {
    let ctx = Context::new(model, settings, estimators)?;
    Ok(run_replications(
        &ctx,
        n,
        replications,
        master_seed,
        estimators,
    ))
}

fn run_replications(
    ctx: &Context<'_>,
    n: usize,
    replications: usize,
    master_seed: u64,
    estimators: &[EstimatorKind],
) -> Vec<Result<Vec<Losses>>> {
    (0..replications)
        .into_par_iter()
        .map(|r| {
            let draw = sample_joint(ctx.model, n, risk_seed(master_seed, n, r));
            ctx.replicate(&draw, estimators)
        })
        .collect()
}

fn summarize(n: usize, replications: usize, losses: &[Losses]) -> RiskRecord {
    let l1: Vec<f64> = losses.iter().map(|l| l.l1).collect();
    let l1_sq: Vec<f64> = l1.iter().map(|v| v * v).collect();
    let tv: Vec<f64> = losses.iter().map(|l| l.tv).collect();
    let tv_sq: Vec<f64> = tv.iter().map(|v| v * v).collect();
    let (mean_l1, se_l1) = mean_and_se(&l1);
    let (mean_l1_sq, se_l1_sq) = mean_and_se(&l1_sq);
    let (mean_tv, se_tv) = mean_and_se(&tv);
    let (mean_tv_sq, se_tv_sq) = mean_and_se(&tv_sq);
    RiskRecord {
        n,
        mean_l1,
        se_l1,
        mean_l1_sq,
        se_l1_sq,
        mean_tv,
        se_tv,
        mean_tv_sq,
        se_tv_sq,
        replications: losses.len(),
        failures: replications - losses.len(),
    }
}

fn check_failures(
    n: usize,
    replications: usize,
    failures: usize,
    first: Option<&Error>,
) -> Result<()> {
    if failures as f64 > MAX_FAILURE_FRACTION * replications as f64 {
        let cause = first.map(|e| e.to_string()).unwrap_or_default();
        return Err(Error::Experiment(format!(
            "{failures} of {replications} replications failed at n={n} (first: {cause})"
        )));
    }
    Ok(())
}

/// Monte Carlo Bayes risk of `estimator` at each sample size.
pub fn bayes_risk_curve(
    model: &ModelSpec,
    settings: &EngineSettings,
    n_values: &[usize],
    replications: usize,
    master_seed: u64,
    estimator: EstimatorKind,
) -> Result<RiskCurve> {
    if replications < 2 {
        return Err(Error::Experiment(format!(
            "replications must be >= 2, got {replications}"
        )));
    }
    if n_values.is_empty() {
        return Err(Error::Experiment("n_values is empty".into()));
    }
    let ctx = Context::new(model, settings, &[estimator])?;
    let mut records = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let results = run_replications(&ctx, n, replications, master_seed, &[estimator]);
        let first_err = results.iter().find_map(|r| r.as_ref().err());
        let ok: Vec<Losses> = results
            .iter()
            .filter_map(|r| r.as_ref().ok().map(|v| v[0]))
            .collect();
        check_failures(n, replications, replications - ok.len(), first_err)?;
        records.push(summarize(n, replications, &ok));
    }
    Ok(RiskCurve {
        model: model.kind(),
        hyperparams: model.hyperparams(),
        estimator,
        master_seed,
        fingerprint: settings_fingerprint(model, settings),
        records,
    })
}

/// Paired difference of mean squared-L¹ risk between a challenger and the
/// baseline estimator on shared draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedComparison {
    pub n: usize,
    pub baseline: EstimatorKind,
    pub challenger: EstimatorKind,
    pub mean_baseline: f64,
    pub mean_challenger: f64,
    /// Mean of `challenger - baseline` squared-L¹ losses.
    pub mean_difference: f64,
    /// Standard error of that mean.
    pub se_difference: f64,
    pub replications: usize,
    pub failures: usize,
}

impl PairedComparison {
    /// The challenger's risk exceeds the baseline's by at least `k`
    /// standard errors of the paired difference.
    pub fn baseline_wins_by(&self, k: f64) -> bool {
        self.mean_difference >= k * self.se_difference
    }
}

pub fn paired_risk_comparison(
    model: &ModelSpec,
    settings: &EngineSettings,
    n: usize,
    replications: usize,
    master_seed: u64,
    baseline: EstimatorKind,
    challengers: &[EstimatorKind],
) -> Result<Vec<PairedComparison>> {
    if replications < 2 {
        return Err(Error::Experiment(format!(
            "replications must be >= 2, got {replications}"
        )));
    }
    let mut estimators = vec![baseline];
    estimators.extend_from_slice(challengers);
    let results = replication_losses(model, settings, n, replications, master_seed, &estimators)?;
    let first_err = results.iter().find_map(|r| r.as_ref().err());
    let ok: Vec<&Vec<Losses>> = results.iter().filter_map(|r| r.as_ref().ok()).collect();
    let failures = replications - ok.len();
    check_failures(n, replications, failures, first_err)?;
    let base: Vec<f64> = ok.iter().map(|v| v[0].l1 * v[0].l1).collect();
    Ok(challengers
        .iter()
        .enumerate()
        .map(|(i, &challenger)| {
            let other: Vec<f64> = ok.iter().map(|v| v[i + 1].l1 * v[i + 1].l1).collect();
            let diff: Vec<f64> = other.iter().zip(&base).map(|(c, b)| c - b).collect();
            let (mean_difference, se_difference) = mean_and_se(&diff);
            PairedComparison {
                n,
                baseline,
                challenger,
                mean_baseline: mean_and_se(&base).0,
                mean_challenger: mean_and_se(&other).0,
                mean_difference,
                se_difference,
                replications: ok.len(),
                failures,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub t: f64,
    pub x1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub n: usize,
    pub t: f64,
    pub x1: f64,
    pub abs_error: f64,
    pub true_value: f64,
    pub estimate: f64,
}

pub const TRACE_NOTE: &str =
    "A single seeded path illustrates almost-sure convergence; it cannot certify it.";

/// Errors of the numeric estimator along one growing sample path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyTrace {
    pub model: ModelKind,
    pub theta: f64,
    pub theta_drawn_from_prior: bool,
    pub probes: Vec<Probe>,
    pub checkpoints: Vec<usize>,
    pub seed: u64,
    /// Checkpoint-major, probe-minor.
    pub entries: Vec<TraceEntry>,
    pub note: String,
}

impl ConsistencyTrace {
    pub fn entries_at(&self, n: usize) -> impl Iterator<Item = &TraceEntry> {
        self.entries.iter().filter(move |e| e.n == n)
    }
}

/// Simulates one sample path from `R_theta` and evaluates the grid
/// estimator at each checkpoint and probe. The sample at a checkpoint is a
/// prefix of the sample at every later one.
pub fn consistency_trace(
    model: &ModelSpec,
    settings: &EngineSettings,
    theta: Option<f64>,
    probes: &[Probe],
    checkpoints: &[usize],
    seed: u64,
) -> Result<ConsistencyTrace> {
    if checkpoints.is_empty() || checkpoints.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Experiment(format!(
            "checkpoints must be nonempty and strictly increasing: {checkpoints:?}"
        )));
    }
    let theta_drawn_from_prior = theta.is_none();
    let theta = match theta {
        Some(t) => t,
        None => model.sample_prior(&mut rng_from_seed(derive_seed(seed, "trace-theta", &[]))),
    };
    if !(model.prior_log_density(theta) > f64::NEG_INFINITY) {
        return Err(Error::Experiment(format!(
            "theta={theta} is outside the parameter space"
        )));
    }
    let truths: Vec<f64> = probes
        .iter()
        .map(|p| true_conditional_density(model, theta, p.x1, p.t))
        .collect::<Result<_>>()?;

    let grid = Arc::new(build_grid(model, settings.grid_resolution)?);
    let mut acc = PosteriorAccumulator::new(model, grid);
    let mut rng = rng_from_seed(derive_seed(seed, "trace-path", &[]));
    let mut entries = Vec::with_capacity(checkpoints.len() * probes.len());
    for &n in checkpoints {
        while acc.n() < n {
            let pair = model.sample_pair(theta, &mut rng);
            acc.observe(model, pair);
        }
        let post = acc.posterior()?;
        for (p, &true_value) in probes.iter().zip(&truths) {
            let estimate = predictive_conditional(model, &post, p.x1, settings)?.density(p.t);
            entries.push(TraceEntry {
                n,
                t: p.t,
                x1: p.x1,
                abs_error: (estimate - true_value).abs(),
                true_value,
                estimate,
            });
        }
    }
    Ok(ConsistencyTrace {
        model: model.kind(),
        theta,
        theta_drawn_from_prior,
        probes: probes.to_vec(),
        checkpoints: checkpoints.to_vec(),
        seed,
        entries,
        note: TRACE_NOTE.to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrosscheckEntry {
    pub n: usize,
    pub sample_index: usize,
    pub sample_seed: u64,
    pub x1: f64,
    pub x2: f64,
    pub closed_form: f64,
    pub numeric: f64,
    pub abs_diff: f64,
    pub rel_diff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Absolute,
    Relative,
}

/// Agreement of one closed-form variant with the grid engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrosscheckSection {
    pub variant: String,
    pub metric: Metric,
    pub tolerance: f64,
    pub comparisons: usize,
    pub max_abs_diff: f64,
    pub mean_abs_diff: f64,
    pub max_rel_diff: f64,
    pub mean_rel_diff: f64,
    pub flagged_total: usize,
    /// The first flagged entries, with everything needed to reproduce them.
    pub flagged: Vec<CrosscheckEntry>,
    /// Probes where the closed form could not be evaluated.
    pub failures: Vec<String>,
}

impl CrosscheckSection {
    pub fn within_tolerance(&self) -> bool {
        self.flagged_total == 0 && self.failures.is_empty()
    }

    pub fn max_diff(&self) -> f64 {
        match self.metric {
            Metric::Absolute => self.max_abs_diff,
            Metric::Relative => self.max_rel_diff,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrosscheckReport {
    pub model: ModelKind,
    pub hyperparams: BTreeMap<String, f64>,
    pub seed: u64,
    pub fingerprint: String,
    pub grid_resolution: usize,
    pub n_values: Vec<usize>,
    pub sections: Vec<CrosscheckSection>,
    pub notes: Vec<String>,
}

impl CrosscheckReport {
    pub fn section(&self, variant: &str) -> Option<&CrosscheckSection> {
        self.sections.iter().find(|s| s.variant == variant)
    }
}

const MAX_FLAGGED: usize = 100;

type ClosedFormFn = Box<dyn Fn(&SufficientStats, f64, f64) -> Result<f64>>;

struct Variant {
    name: &'static str,
    metric: Metric,
    tolerance: f64,
    eval: ClosedFormFn,
}

fn variants(model: &ModelSpec) -> Vec<Variant> {
    match *model {
        ModelSpec::GammaExp(g) => vec![Variant {
            name: "closed-form",
            metric: Metric::Relative,
            tolerance: 1e-6,
            eval: Box::new(move |s, x1, x2| match s {
                SufficientStats::GammaExp(st) => Ok(gammaexp_estimate(g.lambda, st, x1, x2)),
                _ => unreachable!(),
            }),
        }],
        ModelSpec::TwoCoin(_) => vec![
            Variant {
                name: "beta-conjugate",
                metric: Metric::Absolute,
                tolerance: 1e-10,
                eval: Box::new(|s, k1, k2| match s {
                    SufficientStats::TwoCoin(st) => Ok(twocoin_estimate(st, k1 as u8, k2 as u8)),
                    _ => unreachable!(),
                }),
            },
            Variant {
                name: "printed",
                metric: Metric::Absolute,
                tolerance: 1e-10,
                eval: Box::new(|s, k1, k2| match s {
                    SufficientStats::TwoCoin(st) => {
                        Ok(twocoin_printed_estimate(st, k1 as u8, k2 as u8))
                    }
                    _ => unreachable!(),
                }),
            },
        ],
        ModelSpec::Binormal(b) => vec![
            Variant {
                name: "normal-conjugate",
                metric: Metric::Relative,
                tolerance: 1e-6,
                eval: Box::new(move |s, x1, x2| match s {
                    SufficientStats::Binormal(st) => binormal_conjugate_estimate(&b, st, x1, x2),
                    _ => unreachable!(),
                }),
            },
            Variant {
                name: "printed",
                metric: Metric::Relative,
                tolerance: 1e-4,
                eval: Box::new(move |s, x1, x2| match s {
                    SufficientStats::Binormal(st) => binormal_estimate(&b, st, x1, x2),
                    _ => unreachable!(),
                }),
            },
        ],
    }
}

/// Compares every closed-form variant with the grid engine on seeded samples
/// and probes. Discrepancies are data: they are flagged, not raised.
pub fn crosscheck_report(
    model: &ModelSpec,
    settings: &EngineSettings,
    n_values: &[usize],
    samples_per_n: usize,
    probes_per_sample: usize,
    seed: u64,
) -> Result<CrosscheckReport> {
    let grid = Arc::new(build_grid(model, settings.grid_resolution)?);
    let variants = variants(model);
    let mut sections: Vec<CrosscheckSection> = variants
        .iter()
        .map(|v| CrosscheckSection {
            variant: v.name.to_string(),
            metric: v.metric,
            tolerance: v.tolerance,
            comparisons: 0,
            max_abs_diff: 0.0,
            mean_abs_diff: 0.0,
            max_rel_diff: 0.0,
            mean_rel_diff: 0.0,
            flagged_total: 0,
            flagged: Vec::new(),
            failures: Vec::new(),
        })
        .collect();

    for &n in n_values {
        for s in 0..samples_per_n {
            let sample_seed = derive_seed(seed, "crosscheck", &[n as u64, s as u64]);
            let draw = sample_joint(model, n, sample_seed);
            let stats = sufficient_stats(model.kind(), &draw.sample);
            let post = posterior_grid(model, &grid, &draw.sample)?;
            let probes: Vec<(f64, f64)> = if model.x2_support().is_discrete() {
                vec![(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)]
            } else {
                let mut rng =
                    rng_from_seed(derive_seed(seed, "crosscheck-probe", &[n as u64, s as u64]));
                (0..probes_per_sample)
                    .map(|_| {
                        let p = model.sample_pair(draw.theta, &mut rng);
                        (p.x1, p.x2)
                    })
                    .collect()
            };
            for (x1, x2) in probes {
                let numeric = predictive_conditional(model, &post, x1, settings)?.density(x2);
                for (variant, section) in variants.iter().zip(sections.iter_mut()) {
                    let closed_form = match (variant.eval)(&stats, x1, x2) {
                        Ok(v) => v,
                        Err(e) => {
                            section
                                .failures
                                .push(format!("n={n} sample={s} x1={x1} x2={x2}: {e}"));
                            continue;
                        }
                    };
                    let abs_diff = (closed_form - numeric).abs();
                    let rel_diff = if closed_form != 0.0 {
                        abs_diff / closed_form.abs()
                    } else {
                        abs_diff
                    };
                    section.comparisons += 1;
                    section.max_abs_diff = section.max_abs_diff.max(abs_diff);
                    section.max_rel_diff = section.max_rel_diff.max(rel_diff);
                    section.mean_abs_diff += abs_diff;
                    section.mean_rel_diff += rel_diff;
                    let measured = match section.metric {
                        Metric::Absolute => abs_diff,
                        Metric::Relative => rel_diff,
                    };
                    if !(measured <= section.tolerance) {
                        section.flagged_total += 1;
                        if section.flagged.len() < MAX_FLAGGED {
                            section.flagged.push(CrosscheckEntry {
                                n,
                                sample_index: s,
                                sample_seed,
                                x1,
                                x2,
                                closed_form,
                                numeric,
                                abs_diff,
                                rel_diff,
                            });
                        }
                    }
                }
            }
        }
    }
    for section in &mut sections {
        if section.comparisons > 0 {
            section.mean_abs_diff /= section.comparisons as f64;
            section.mean_rel_diff /= section.comparisons as f64;
        }
    }

    let mut notes = Vec::new();
    match model.kind() {
        ModelKind::TwoCoin => notes.push(
            "`printed` is the published four-case expression; it differs from direct integration \
             (e.g. P(k2=0 | k1=0) at n=0 is 2/3 printed vs 1/3 integrated)."
                .to_string(),
        ),
        ModelKind::Binormal => notes.push(
            "`printed` uses the published rho1, sigma1^2 and m1; `normal-conjugate` re-derives them \
             from the normal-normal posterior."
                .to_string(),
        ),
        ModelKind::GammaExp => {}
    }

    Ok(CrosscheckReport {
        model: model.kind(),
        hyperparams: model.hyperparams(),
        seed,
        fingerprint: settings_fingerprint(model, settings),
        grid_resolution: settings.grid_resolution,
        n_values: n_values.to_vec(),
        sections,
        notes,
    })
}
