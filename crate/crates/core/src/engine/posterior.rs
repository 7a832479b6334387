use std::sync::Arc;

use super::estimate::{mixture_breakpoints, mixture_window};
use super::{ConditionalDensityEstimate, EngineSettings, EstimateSource, Provenance, ThetaGrid};
use crate::error::{Error, Result};
use crate::model::{Model, Pair, PairedSample};
use crate::numerics::{log_sum_exp, log_sum_exp_iter, normalize_log_weights};

/// Components whose x1-reweighted posterior mass falls below `e^-50` are
/// dropped from predictive evaluation. Their total is below `4096 e^-50`.
const PRUNE_LOG_MASS: f64 = -50.0;

/// Posterior on a parameter grid: normalized log-masses per node.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorGrid {
    grid: Arc<ThetaGrid>,
    log_masses: Vec<f64>,
    n: usize,
}

impl PosteriorGrid {
    pub fn grid(&self) -> &ThetaGrid {
        &self.grid
    }

    pub fn log_masses(&self) -> &[f64] {
        &self.log_masses
    }

    pub fn masses(&self) -> impl Iterator<Item = f64> + '_ {
        self.log_masses.iter().map(|lm| lm.exp())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.grid
            .nodes()
            .iter()
            .zip(self.masses())
            .map(|(t, m)| t * m)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.grid
            .nodes()
            .iter()
            .zip(self.masses())
            .map(|(t, m)| m * (t - mean).powi(2))
            .sum()
    }
}

/// Running log-likelihood on a fixed grid, so a growing sample path can be
/// conditioned on without recomputing from scratch.
#[derive(Debug, Clone)]
pub struct PosteriorAccumulator {
    grid: Arc<ThetaGrid>,
    log_unnormalized: Vec<f64>,
    n: usize,
}

impl PosteriorAccumulator {
    /// Starts from the prior: `ln w_j + ln q(theta_j)`.
    pub fn new<M: Model + ?Sized>(model: &M, grid: Arc<ThetaGrid>) -> Self {
        let log_unnormalized = grid
            .nodes()
            .iter()
            .zip(grid.weights())
            .map(|(&t, &w)| w.ln() + model.prior_log_density(t))
            .collect();
        Self {
            grid,
            log_unnormalized,
            n: 0,
        }
    }

    pub fn observe<M: Model + ?Sized>(&mut self, model: &M, pair: Pair) {
        for (lu, &t) in self.log_unnormalized.iter_mut().zip(self.grid.nodes()) {
            *lu += model.joint_log_density(t, pair.x1, pair.x2);
        }
        self.n += 1;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn posterior(&self) -> Result<PosteriorGrid> {
        let mut log_masses = self.log_unnormalized.clone();
        let z = normalize_log_weights(&mut log_masses);
        if !z.is_finite() {
            return Err(Error::DegeneratePosterior { n: self.n });
        }
        Ok(PosteriorGrid {
            grid: Arc::clone(&self.grid),
            log_masses,
            n: self.n,
        })
    }
}

/// Grid posterior given `sample`: node log-mass is `ln w + ln q + Σ ln f`,
/// normalized by log-sum-exp.
pub fn posterior_grid<M: Model + ?Sized>(
    model: &M,
    grid: &Arc<ThetaGrid>,
    sample: &PairedSample,
) -> Result<PosteriorGrid> {
    let mut acc = PosteriorAccumulator::new(model, Arc::clone(grid));
    for &pair in sample.pairs() {
        acc.observe(model, pair);
    }
    acc.posterior()
}

/// Posterior predictive conditional density of `X2` given `X1 = x1`:
///
/// `f(t | x1) = Σ_j m_j f_j(x1, t) / Σ_j m_j f_j(x1)`
///
/// with both mixtures formed in log space.
pub fn predictive_conditional<M>(
    model: &M,
    posterior: &PosteriorGrid,
    x1: f64,
    settings: &EngineSettings,
) -> Result<ConditionalDensityEstimate>
where
    M: Model + Clone + Send + Sync + 'static,
{
    let nodes = posterior.grid().nodes();
    let den_terms: Vec<f64> = nodes
        .iter()
        .zip(posterior.log_masses())
        .map(|(&t, &lm)| lm + model.x1_marginal_log_density(t, x1))
        .collect();
    let log_den = log_sum_exp(&den_terms);
    if !log_den.is_finite() || log_den.exp() == 0.0 {
        return Err(Error::ZeroPredictiveMarginal { x1 });
    }

    let mut kept: Vec<(f64, f64)> = Vec::new();
    let mut reweighted: Vec<(f64, f64)> = Vec::new();
    for ((&t, &lm), &d) in nodes.iter().zip(posterior.log_masses()).zip(&den_terms) {
        let lw = d - log_den;
        if lw > PRUNE_LOG_MASS {
            kept.push((t, lm));
            reweighted.push((t, lw.exp()));
        }
    }

    let (window, breakpoints) = if model.x2_support().is_discrete() {
        (None, Vec::new())
    } else {
        (
            mixture_window(model, &reweighted, x1, settings.tail_mass),
            mixture_breakpoints(model, &reweighted, x1),
        )
    };

    let m = model.clone();
    let evaluator = Arc::new(move |t: f64| {
        let log_num = log_sum_exp_iter(
            kept.iter()
                .map(|&(theta, lm)| lm + m.joint_log_density(theta, x1, t)),
        );
        (log_num - log_den).exp()
    });
    Ok(ConditionalDensityEstimate::new(
        evaluator,
        model.x2_support(),
        window,
        breakpoints,
        Provenance {
            source: EstimateSource::Numeric,
            model: model.kind(),
            n: posterior.n(),
            x1,
        },
    ))
}
