use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::EngineSettings;
use crate::error::{Error, Result};
use crate::model::{true_conditional_density, Model, ModelKind, Support};
use crate::quadrature::integrate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateSource {
    Numeric,
    ClosedForm,
    TrueConditional,
    PlugIn,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: EstimateSource,
    pub model: ModelKind,
    pub n: usize,
    pub x1: f64,
}

type Evaluator = dyn Fn(f64) -> f64 + Send + Sync;

/// A density (or probability function) `t -> f(t | x1)` over the support of
/// `X2`.
///
/// Continuous estimates carry an integration window holding all but a
/// negligible tail of their mass, and a few interior breakpoints around the
/// bulk that seed adaptive quadrature.
#[derive(Clone)]
pub struct ConditionalDensityEstimate {
    evaluator: Arc<Evaluator>,
    support: Support,
    window: Option<(f64, f64)>,
    breakpoints: Vec<f64>,
    provenance: Provenance,
}

impl fmt::Debug for ConditionalDensityEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConditionalDensityEstimate")
            .field("support", &self.support)
            .field("window", &self.window)
            .field("provenance", &self.provenance)
            .finish()
    }
}

impl ConditionalDensityEstimate {
    pub fn new(
        evaluator: Arc<Evaluator>,
        support: Support,
        window: Option<(f64, f64)>,
        breakpoints: Vec<f64>,
        provenance: Provenance,
    ) -> Self {
        let window = match (&support, window) {
            (Support::Continuous { lower, upper }, Some((a, b))) => {
                Some((a.max(*lower), b.min(*upper)))
            }
            (Support::Continuous { lower, upper }, None) => Some((*lower, *upper)),
            (Support::Discrete(_), _) => None,
        };
        let evaluator = match &support {
            Support::Discrete(points) => tabulate(points, evaluator.as_ref()),
            Support::Continuous { .. } => evaluator,
        };
        Self {
            evaluator,
            support,
            window,
            breakpoints,
            provenance,
        }
    }

    /// The estimate at `t`; zero outside the support.
    pub fn density(&self, t: f64) -> f64 {
        if self.support.contains(t) {
            (self.evaluator)(t)
        } else {
            0.0
        }
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn window(&self) -> Option<(f64, f64)> {
        self.window
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Total mass over the support: an exact sum for discrete supports,
    /// adaptive quadrature over the window for continuous ones.
    pub fn total_mass(&self, settings: &EngineSettings) -> Result<f64> {
        match &self.support {
            Support::Discrete(points) => Ok(points.iter().map(|&t| self.density(t)).sum()),
            Support::Continuous { .. } => {
                let (a, b) = settings
                    .truncation
                    .or(self.window)
                    .expect("continuous window");
                if !(a.is_finite() && b.is_finite()) {
                    return Err(Error::GridConfig(format!(
                        "unbounded integration window [{a}, {b}]"
                    )));
                }
                let r = integrate(
                    |t| self.density(t),
                    a,
                    b,
                    &self.breakpoints,
                    settings.quad(),
                );
                if !r.converged {
                    return Err(Error::Quadrature {
                        tolerance: settings.l1_abs_tol,
                        estimate: r.error,
                    });
                }
                Ok(r.value)
            }
        }
    }
}

/// Evaluates a probability function once on its support and renormalizes it
/// so the masses sum to one in floating point: the largest mass is set to the
/// complement of the others.
fn tabulate(points: &[f64], f: &Evaluator) -> Arc<Evaluator> {
    let raw: Vec<f64> = points.iter().map(|&t| f(t)).collect();
    let total: f64 = raw.iter().sum();
    let mut masses = raw.clone();
    if total > 0.0 && total.is_finite() {
        let big = (0..raw.len())
            .max_by(|&i, &j| raw[i].total_cmp(&raw[j]))
            .expect("nonempty support");
        for (i, m) in masses.iter_mut().enumerate() {
            *m = raw[i] / total;
        }
        let rest: f64 = masses
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != big)
            .map(|(_, m)| m)
            .sum();
        masses[big] = 1.0 - rest;
    }
    let table: Vec<(f64, f64)> = points.iter().copied().zip(masses).collect();
    Arc::new(move |t| table.iter().find(|(p, _)| *p == t).map_or(0.0, |&(_, m)| m))
}

/// Union of per-component windows for a mixture with weights `weights`
/// (summing to one). Component `j` may leave `tail / (K w_j)` outside, so the
/// mixture leaves at most `tail`.
pub(crate) fn mixture_window<M: Model + ?Sized>(
    model: &M,
    components: &[(f64, f64)],
    x1: f64,
    tail: f64,
) -> Option<(f64, f64)> {
    let k = components.len() as f64;
    let mut out: Option<(f64, f64)> = None;
    for &(theta, weight) in components {
        let allowance = tail / (k * weight);
        if let Some((a, b)) = model.conditional_window(theta, x1, allowance) {
            out = Some(match out {
                None => (a, b),
                Some((lo, hi)) => (lo.min(a), hi.max(b)),
            });
        }
    }
    out
}

/// Interior quadrature breakpoints: the edges of the central 99% and 99.99%
/// regions of the mixture.
pub(crate) fn mixture_breakpoints<M: Model + ?Sized>(
    model: &M,
    components: &[(f64, f64)],
    x1: f64,
) -> Vec<f64> {
    let mut bp = Vec::new();
    for tail in [1e-2, 1e-4] {
        if let Some((a, b)) = mixture_window(model, components, x1, tail) {
            bp.push(a);
            bp.push(b);
        }
    }
    bp
}

/// The true conditional density `f_theta(. | x1)` wrapped as an estimate.
/// `source` distinguishes the truth from plug-in estimates at a fitted
/// parameter.
pub fn true_conditional_estimate<M>(
    model: &M,
    theta: f64,
    x1: f64,
    n: usize,
    source: EstimateSource,
    settings: &EngineSettings,
) -> Result<ConditionalDensityEstimate>
where
    M: Model + Clone + Send + Sync + 'static,
{
    // Surfaces a vanishing marginal before any evaluation.
    true_conditional_density(model, theta, x1, model_probe(model))?;
    let component = [(theta, 1.0)];
    let window = model.conditional_window(theta, x1, settings.tail_mass);
    let breakpoints = mixture_breakpoints(model, &component, x1);
    let m = model.clone();
    let evaluator = Arc::new(move |t: f64| m.conditional_log_density(theta, x1, t).exp());
    Ok(ConditionalDensityEstimate::new(
        evaluator,
        model.x2_support(),
        window,
        breakpoints,
        Provenance {
            source,
            model: model.kind(),
            n,
            x1,
        },
    ))
}

fn model_probe<M: Model + ?Sized>(model: &M) -> f64 {
    match model.x2_support() {
        Support::Discrete(points) => points[0],
        Support::Continuous { lower, upper } => {
            if lower.is_finite() {
                lower
            } else if upper.is_finite() {
                upper
            } else {
                0.0
            }
        }
    }
}
