//! Parametric joint models for a pair `(X1, X2)` indexed by a scalar
//! parameter `theta` with a proper prior, plus the hierarchical sampler
//! `theta ~ Q`, `x' ~ R_theta^n`, `x ~ R_theta`.
//!
//! All densities are exposed in log space. Densities of discrete
//! coordinates are probability functions with respect to counting measure.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::seed::{rng_from_seed, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    GammaExp,
    TwoCoin,
    Binormal,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::GammaExp, ModelKind::TwoCoin, ModelKind::Binormal];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::GammaExp => "gamma-exp",
            ModelKind::TwoCoin => "two-coin",
            ModelKind::Binormal => "binormal",
        }
    }

    /// Hyperparameters filled in when a configuration omits them.
    pub fn default_hyperparams(self) -> BTreeMap<String, f64> {
        let pairs: &[(&str, f64)] = match self {
            ModelKind::GammaExp => &[("lambda", 1.0)],
            ModelKind::TwoCoin => &[],
            ModelKind::Binormal => &[("mu", 0.0), ("tau", 1.0), ("sigma", 1.0), ("rho", 0.5)],
        };
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gamma-exp" => Ok(ModelKind::GammaExp),
            "two-coin" => Ok(ModelKind::TwoCoin),
            "binormal" => Ok(ModelKind::Binormal),
            other => Err(Error::UnknownModel(other.to_string())),
        }
    }
}

/// Support of one coordinate (or of the parameter).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Support {
    /// Interval `[lower, upper]`, either end possibly infinite, with
    /// Lebesgue reference measure.
    Continuous { lower: f64, upper: f64 },
    /// Finite set with counting reference measure.
    Discrete(Vec<f64>),
}

impl Support {
    pub fn contains(&self, x: f64) -> bool {
        match self {
            Support::Continuous { lower, upper } => x >= *lower && x <= *upper,
            Support::Discrete(points) => points.contains(&x),
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Support::Discrete(_))
    }
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Support::Continuous { lower, upper } => write!(f, "[{lower}, {upper}]"),
            Support::Discrete(points) => write!(f, "{points:?}"),
        }
    }
}

/// Axis on which the parameter grid is uniformly spaced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaTransform {
    /// `u = theta`, for real parameters.
    Identity,
    /// `u = ln theta`, for positive parameters.
    Log,
    /// `u = ln(theta / (1 - theta))`, for parameters in `(0, 1)`.
    Logit,
}

impl ThetaTransform {
    pub fn forward(self, theta: f64) -> f64 {
        match self {
            ThetaTransform::Identity => theta,
            ThetaTransform::Log => theta.ln(),
            ThetaTransform::Logit => theta.ln() - (-theta).ln_1p(),
        }
    }

    pub fn inverse(self, u: f64) -> f64 {
        match self {
            ThetaTransform::Identity => u,
            ThetaTransform::Log => u.exp(),
            ThetaTransform::Logit => 1.0 / (1.0 + (-u).exp()),
        }
    }

    /// `d theta / d u` at `u`.
    pub fn jacobian(self, u: f64) -> f64 {
        match self {
            ThetaTransform::Identity => 1.0,
            ThetaTransform::Log => u.exp(),
            ThetaTransform::Logit => {
                let s = 1.0 / (1.0 + (-u).exp());
                s * (1.0 / (1.0 + u.exp()))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pair {
    pub x1: f64,
    pub x2: f64,
}

impl Pair {
    pub fn new(x1: f64, x2: f64) -> Self {
        Self { x1, x2 }
    }
}

/// An ordered i.i.d. sample of pairs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PairedSample {
    pairs: Vec<Pair>,
}

impl PairedSample {
    pub fn new(pairs: Vec<Pair>) -> Self {
        Self { pairs }
    }

    pub fn n(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn push(&mut self, pair: Pair) {
        self.pairs.push(pair);
    }

    /// The first `n` pairs.
    pub fn prefix(&self, n: usize) -> PairedSample {
        PairedSample::new(self.pairs[..n.min(self.pairs.len())].to_vec())
    }
}

impl From<Vec<(f64, f64)>> for PairedSample {
    fn from(v: Vec<(f64, f64)>) -> Self {
        PairedSample::new(v.into_iter().map(|(a, b)| Pair::new(a, b)).collect())
    }
}

/// One draw `(theta, x', x)` from the joint law of parameter, sample and a
/// fresh observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDraw {
    pub theta: f64,
    pub sample: PairedSample,
    pub fresh_pair: Pair,
}

/// A Bayesian model for `(X1, X2)` with scalar parameter.
pub trait Model {
    fn kind(&self) -> ModelKind;

    fn prior_log_density(&self, theta: f64) -> f64;
    fn sample_prior(&self, rng: &mut SimRng) -> f64;
    /// Prior quantile function.
    fn prior_quantile(&self, p: f64) -> f64;
    /// Prior quantile at `1 - q`, accurate for small `q`.
    fn prior_upper_quantile(&self, q: f64) -> f64 {
        self.prior_quantile(1.0 - q)
    }

    fn joint_log_density(&self, theta: f64, x1: f64, x2: f64) -> f64;
    fn x1_marginal_log_density(&self, theta: f64, x1: f64) -> f64;

    /// `log f_theta(x2 | x1)`. The default is the ratio of joint and
    /// marginal; models override it with the direct formula.
    fn conditional_log_density(&self, theta: f64, x1: f64, t: f64) -> f64 {
        self.joint_log_density(theta, x1, t) - self.x1_marginal_log_density(theta, x1)
    }

    fn sample_pair(&self, theta: f64, rng: &mut SimRng) -> Pair;

    fn theta_support(&self) -> Support;
    fn x1_support(&self) -> Support;
    fn x2_support(&self) -> Support;
    fn theta_transform(&self) -> ThetaTransform;

    /// Prior tail probability left outside the parameter grid on each side.
    fn grid_tail_probability(&self) -> f64 {
        1e-10
    }

    /// For continuous `X2`: an interval outside of which the conditional law
    /// of `X2` given `X1 = x1` puts at most `tail` mass. `None` for discrete
    /// `X2`, or when `tail >= 1` and no truncation is needed.
    fn conditional_window(&self, theta: f64, x1: f64, tail: f64) -> Option<(f64, f64)>;
}

/// Gamma-exponential model: `X1 ~ Exp(theta)`, `X2 | X1=x1 ~ Exp(theta x1)`,
/// `theta ~ Exp(lambda)`. Gamma laws use the shape-scale convention, so
/// `G(1, 1/lambda)` is the rate-`lambda` exponential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaExp {
    pub lambda: f64,
}

impl Model for GammaExp {
    fn kind(&self) -> ModelKind {
        ModelKind::GammaExp
    }

    fn prior_log_density(&self, theta: f64) -> f64 {
        if theta > 0.0 {
            self.lambda.ln() - self.lambda * theta
        } else {
            f64::NEG_INFINITY
        }
    }

    fn sample_prior(&self, rng: &mut SimRng) -> f64 {
        Exp::new(self.lambda).expect("lambda validated").sample(rng)
    }

    fn prior_quantile(&self, p: f64) -> f64 {
        -(-p).ln_1p() / self.lambda
    }

    fn prior_upper_quantile(&self, q: f64) -> f64 {
        -q.ln() / self.lambda
    }

    fn joint_log_density(&self, theta: f64, x1: f64, x2: f64) -> f64 {
        if theta <= 0.0 || x1 <= 0.0 || x2 < 0.0 {
            return f64::NEG_INFINITY;
        }
        2.0 * theta.ln() + x1.ln() - theta * x1 * (1.0 + x2)
    }

    fn x1_marginal_log_density(&self, theta: f64, x1: f64) -> f64 {
        if theta <= 0.0 || x1 <= 0.0 {
            return f64::NEG_INFINITY;
        }
        theta.ln() - theta * x1
    }

    fn conditional_log_density(&self, theta: f64, x1: f64, t: f64) -> f64 {
        if theta <= 0.0 || x1 <= 0.0 || t < 0.0 {
            return f64::NEG_INFINITY;
        }
        let rate = theta * x1;
        rate.ln() - rate * t
    }

    fn sample_pair(&self, theta: f64, rng: &mut SimRng) -> Pair {
        let x1: f64 = Exp::new(theta).expect("theta > 0").sample(rng);
        let x2: f64 = Exp::new(theta * x1).expect("theta x1 > 0").sample(rng);
        Pair::new(x1, x2)
    }

    fn theta_support(&self) -> Support {
        Support::Continuous {
            lower: 0.0,
            upper: f64::INFINITY,
        }
    }

    fn x1_support(&self) -> Support {
        Support::Continuous {
            lower: 0.0,
            upper: f64::INFINITY,
        }
    }

    fn x2_support(&self) -> Support {
        Support::Continuous {
            lower: 0.0,
            upper: f64::INFINITY,
        }
    }

    fn theta_transform(&self) -> ThetaTransform {
        ThetaTransform::Log
    }

    fn conditional_window(&self, theta: f64, x1: f64, tail: f64) -> Option<(f64, f64)> {
        if tail >= 1.0 {
            return None;
        }
        // Exp(theta x1) survival at T is exp(-theta x1 T).
        Some((0.0, -tail.ln() / (theta * x1)))
    }
}

/// Two coin tosses. `X1 ~ Bernoulli(theta)`; the second toss
/// has success probability `theta` after heads and `1 - theta` after tails.
/// Uniform prior on `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TwoCoin;

impl TwoCoin {
    fn probability(theta: f64, k1: f64, k2: f64) -> f64 {
        match (k1 == 1.0, k2 == 1.0) {
            (_, false) => theta * (1.0 - theta),
            (false, true) => (1.0 - theta) * (1.0 - theta),
            (true, true) => theta * theta,
        }
    }
}

fn is_bit(x: f64) -> bool {
    x == 0.0 || x == 1.0
}

impl Model for TwoCoin {
    fn kind(&self) -> ModelKind {
        ModelKind::TwoCoin
    }

    fn prior_log_density(&self, theta: f64) -> f64 {
        if theta > 0.0 && theta < 1.0 {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    }

    fn sample_prior(&self, rng: &mut SimRng) -> f64 {
        loop {
            let u: f64 = rng.random();
            if u > 0.0 {
                return u;
            }
        }
    }

    fn prior_quantile(&self, p: f64) -> f64 {
        p
    }

    fn prior_upper_quantile(&self, q: f64) -> f64 {
        1.0 - q
    }

    fn joint_log_density(&self, theta: f64, k1: f64, k2: f64) -> f64 {
        if !(theta > 0.0 && theta < 1.0) || !is_bit(k1) || !is_bit(k2) {
            return f64::NEG_INFINITY;
        }
        let ln_t = theta.ln();
        let ln_1mt = (-theta).ln_1p();
        match (k1 == 1.0, k2 == 1.0) {
            (_, false) => ln_t + ln_1mt,
            (false, true) => 2.0 * ln_1mt,
            (true, true) => 2.0 * ln_t,
        }
    }

    fn x1_marginal_log_density(&self, theta: f64, k1: f64) -> f64 {
        if !(theta > 0.0 && theta < 1.0) || !is_bit(k1) {
            return f64::NEG_INFINITY;
        }
        if k1 == 1.0 {
            theta.ln()
        } else {
            (-theta).ln_1p()
        }
    }

    fn conditional_log_density(&self, theta: f64, k1: f64, k2: f64) -> f64 {
        if !(theta > 0.0 && theta < 1.0) || !is_bit(k1) || !is_bit(k2) {
            return f64::NEG_INFINITY;
        }
        // Bernoulli(k1 + (1 - 2 k1)(1 - theta)) evaluated at k2.
        let heads = k1 == 1.0;
        match (heads, k2 == 1.0) {
            (true, true) | (false, false) => theta.ln(),
            (true, false) | (false, true) => (-theta).ln_1p(),
        }
    }

    fn sample_pair(&self, theta: f64, rng: &mut SimRng) -> Pair {
        let k1 = if rng.random::<f64>() < theta {
            1.0
        } else {
            0.0
        };
        let p2 = if k1 == 1.0 { theta } else { 1.0 - theta };
        let k2 = if rng.random::<f64>() < p2 { 1.0 } else { 0.0 };
        debug_assert!(Self::probability(theta, k1, k2) > 0.0);
        Pair::new(k1, k2)
    }

    fn theta_support(&self) -> Support {
        Support::Continuous {
            lower: 0.0,
            upper: 1.0,
        }
    }

    fn x1_support(&self) -> Support {
        Support::Discrete(vec![0.0, 1.0])
    }

    fn x2_support(&self) -> Support {
        Support::Discrete(vec![0.0, 1.0])
    }

    fn theta_transform(&self) -> ThetaTransform {
        ThetaTransform::Logit
    }

    fn grid_tail_probability(&self) -> f64 {
        // Predictive ratios lose about `tail` at the ends of (0, 1), so the
        // grid reaches further out than for the other models. Beyond 1e-12
        // the nodes next to 1 stop being distinct in f64.
        1e-12
    }

    fn conditional_window(&self, _theta: f64, _x1: f64, _tail: f64) -> Option<(f64, f64)> {
        None
    }
}

/// Bivariate normal model: `(X1, X2) ~ N2((theta, theta), sigma^2 [[1, rho], [rho, 1]])`
/// with prior `theta ~ N(mu, tau^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Binormal {
    pub mu: f64,
    pub tau: f64,
    pub sigma: f64,
    pub rho: f64,
}

impl Binormal {
    fn prior(&self) -> Normal {
        Normal::new(self.mu, self.tau).expect("tau validated")
    }

    pub fn conditional_mean(&self, theta: f64, x1: f64) -> f64 {
        (1.0 - self.rho) * theta + self.rho * x1
    }

    pub fn conditional_sd(&self) -> f64 {
        self.sigma * (1.0 - self.rho * self.rho).sqrt()
    }
}

fn normal_log_density(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    -0.5 * z * z - sd.ln() - 0.5 * (2.0 * PI).ln()
}

impl Model for Binormal {
    fn kind(&self) -> ModelKind {
        ModelKind::Binormal
    }

    fn prior_log_density(&self, theta: f64) -> f64 {
        normal_log_density(theta, self.mu, self.tau)
    }

    fn sample_prior(&self, rng: &mut SimRng) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        self.mu + self.tau * z
    }

    fn prior_quantile(&self, p: f64) -> f64 {
        self.prior().inverse_cdf(p)
    }

    fn prior_upper_quantile(&self, q: f64) -> f64 {
        2.0 * self.mu - self.prior().inverse_cdf(q)
    }

    fn joint_log_density(&self, theta: f64, x1: f64, x2: f64) -> f64 {
        let one_m_r2 = 1.0 - self.rho * self.rho;
        let d1 = x1 - theta;
        let d2 = x2 - theta;
        let q = d1 * d1 - 2.0 * self.rho * d1 * d2 + d2 * d2;
        -(2.0 * PI * self.sigma * self.sigma * one_m_r2.sqrt()).ln()
            - q / (2.0 * self.sigma * self.sigma * one_m_r2)
    }

    fn x1_marginal_log_density(&self, theta: f64, x1: f64) -> f64 {
        normal_log_density(x1, theta, self.sigma)
    }

    fn conditional_log_density(&self, theta: f64, x1: f64, t: f64) -> f64 {
        normal_log_density(t, self.conditional_mean(theta, x1), self.conditional_sd())
    }

    fn sample_pair(&self, theta: f64, rng: &mut SimRng) -> Pair {
        let z1: f64 = StandardNormal.sample(rng);
        let z2: f64 = StandardNormal.sample(rng);
        let x1 = theta + self.sigma * z1;
        let x2 = theta + self.sigma * (self.rho * z1 + (1.0 - self.rho * self.rho).sqrt() * z2);
        Pair::new(x1, x2)
    }

    fn theta_support(&self) -> Support {
        Support::Continuous {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
        }
    }

    fn x1_support(&self) -> Support {
        Support::Continuous {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
        }
    }

    fn x2_support(&self) -> Support {
        Support::Continuous {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
        }
    }

    fn theta_transform(&self) -> ThetaTransform {
        ThetaTransform::Identity
    }

    fn conditional_window(&self, theta: f64, x1: f64, tail: f64) -> Option<(f64, f64)> {
        if tail >= 1.0 {
            return None;
        }
        // P(|Z| > z) <= exp(-z^2 / 2).
        let half = self.conditional_sd() * (-2.0 * tail.ln()).sqrt();
        let m = self.conditional_mean(theta, x1);
        Some((m - half, m + half))
    }
}

/// A registered model with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelSpec {
    GammaExp(GammaExp),
    TwoCoin(TwoCoin),
    Binormal(Binormal),
}

macro_rules! dispatch {
    ($self:ident, $m:ident => $body:expr) => {
        match $self {
            ModelSpec::GammaExp($m) => $body,
            ModelSpec::TwoCoin($m) => $body,
            ModelSpec::Binormal($m) => $body,
        }
    };
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        self.kind().as_str()
    }

    pub fn hyperparams(&self) -> BTreeMap<String, f64> {
        let pairs: Vec<(&str, f64)> = match self {
            ModelSpec::GammaExp(m) => vec![("lambda", m.lambda)],
            ModelSpec::TwoCoin(_) => vec![],
            ModelSpec::Binormal(m) => {
                vec![
                    ("mu", m.mu),
                    ("tau", m.tau),
                    ("sigma", m.sigma),
                    ("rho", m.rho),
                ]
            }
        };
        pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}

impl Model for ModelSpec {
    fn kind(&self) -> ModelKind {
        dispatch!(self, m => m.kind())
    }
    fn prior_log_density(&self, theta: f64) -> f64 {
        dispatch!(self, m => m.prior_log_density(theta))
    }
    fn sample_prior(&self, rng: &mut SimRng) -> f64 {
        dispatch!(self, m => m.sample_prior(rng))
    }
    fn prior_quantile(&self, p: f64) -> f64 {
        dispatch!(self, m => m.prior_quantile(p))
    }
    fn prior_upper_quantile(&self, q: f64) -> f64 {
        dispatch!(self, m => m.prior_upper_quantile(q))
    }
    fn joint_log_density(&self, theta: f64, x1: f64, x2: f64) -> f64 {
        dispatch!(self, m => m.joint_log_density(theta, x1, x2))
    }
    fn x1_marginal_log_density(&self, theta: f64, x1: f64) -> f64 {
        dispatch!(self, m => m.x1_marginal_log_density(theta, x1))
    }
    fn conditional_log_density(&self, theta: f64, x1: f64, t: f64) -> f64 {
        dispatch!(self, m => m.conditional_log_density(theta, x1, t))
    }
    fn sample_pair(&self, theta: f64, rng: &mut SimRng) -> Pair {
        dispatch!(self, m => m.sample_pair(theta, rng))
    }
    fn theta_support(&self) -> Support {
        dispatch!(self, m => m.theta_support())
    }
    fn x1_support(&self) -> Support {
        dispatch!(self, m => m.x1_support())
    }
    fn x2_support(&self) -> Support {
        dispatch!(self, m => m.x2_support())
    }
    fn theta_transform(&self) -> ThetaTransform {
        dispatch!(self, m => m.theta_transform())
    }
    fn grid_tail_probability(&self) -> f64 {
        dispatch!(self, m => m.grid_tail_probability())
    }
    fn conditional_window(&self, theta: f64, x1: f64, tail: f64) -> Option<(f64, f64)> {
        dispatch!(self, m => m.conditional_window(theta, x1, tail))
    }
}

fn take(hyper: &BTreeMap<String, f64>, name: &str) -> Result<f64> {
    let v = *hyper
        .get(name)
        .ok_or_else(|| Error::MissingHyperparameter(name.to_string()))?;
    if !v.is_finite() {
        return Err(Error::InvalidHyperparameter {
            name: name.to_string(),
            value: v,
            constraint: "must be finite",
        });
    }
    Ok(v)
}

fn require(name: &str, value: f64, ok: bool, constraint: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidHyperparameter {
            name: name.to_string(),
            value,
            constraint,
        })
    }
}

/// Builds a registered model from its kind and named hyperparameters.
pub fn make_model(kind: ModelKind, hyperparams: &BTreeMap<String, f64>) -> Result<ModelSpec> {
    let allowed: Vec<String> = kind.default_hyperparams().into_keys().collect();
    if let Some(extra) = hyperparams.keys().find(|k| !allowed.contains(k)) {
        return Err(Error::InvalidHyperparameter {
            name: extra.clone(),
            value: hyperparams[extra],
            constraint: "not a hyperparameter of this model",
        });
    }
    match kind {
        ModelKind::GammaExp => {
            let lambda = take(hyperparams, "lambda")?;
            require("lambda", lambda, lambda > 0.0, "lambda > 0")?;
            Ok(ModelSpec::GammaExp(GammaExp { lambda }))
        }
        ModelKind::TwoCoin => Ok(ModelSpec::TwoCoin(TwoCoin)),
        ModelKind::Binormal => {
            let mu = take(hyperparams, "mu")?;
            let tau = take(hyperparams, "tau")?;
            let sigma = take(hyperparams, "sigma")?;
            let rho = take(hyperparams, "rho")?;
            require("tau", tau, tau > 0.0, "tau > 0")?;
            require("sigma", sigma, sigma > 0.0, "sigma > 0")?;
            require("rho", rho, rho.abs() < 1.0, "|rho| < 1")?;
            Ok(ModelSpec::Binormal(Binormal {
                mu,
                tau,
                sigma,
                rho,
            }))
        }
    }
}

/// `f_theta(t | x1)`.
pub fn true_conditional_density<M: Model + ?Sized>(
    model: &M,
    theta: f64,
    x1: f64,
    t: f64,
) -> Result<f64> {
    let marginal = model.x1_marginal_log_density(theta, x1);
    if !(marginal.exp() > 0.0) {
        return Err(Error::ZeroMarginal { theta, x1 });
    }
    Ok(model.conditional_log_density(theta, x1, t).exp())
}

/// Draws `theta` from the prior, then `n` i.i.d. pairs and one fresh pair
/// from `R_theta`, all from a single stream keyed by `seed`.
pub fn sample_joint<M: Model + ?Sized>(model: &M, n: usize, seed: u64) -> JointDraw {
    let mut rng = rng_from_seed(seed);
    let theta = model.sample_prior(&mut rng);
    let pairs = (0..n).map(|_| model.sample_pair(theta, &mut rng)).collect();
    let fresh_pair = model.sample_pair(theta, &mut rng);
    JointDraw {
        theta,
        sample: PairedSample::new(pairs),
        fresh_pair,
    }
}
