use serde::{Deserialize, Serialize};

use super::{ConditionalDensityEstimate, EngineSettings};
use crate::error::{Error, Result};
use crate::model::Support;
use crate::quadrature::integrate;

/// L¹ distance and the total variation distance derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Losses {
    pub l1: f64,
    pub tv: f64,
}

/// Computes `∫|a - b|` once and reports it with `tv = l1 / 2`. On discrete
/// supports TV is the supremum over events, computed directly.
pub fn losses(
    a: &ConditionalDensityEstimate,
    b: &ConditionalDensityEstimate,
    settings: &EngineSettings,
) -> Result<Losses> {
    if a.support() != b.support() {
        return Err(Error::SupportMismatch(
            a.support().to_string(),
            b.support().to_string(),
        ));
    }
    let l1 = match a.support() {
        Support::Discrete(points) => {
            // sup_A |P(A) - Q(A)| is attained at A = {a > b} or its complement.
            let diffs: Vec<f64> = points
                .iter()
                .map(|&t| a.density(t) - b.density(t))
                .collect();
            let l1: f64 = diffs.iter().map(|d| d.abs()).sum();
            let up: f64 = diffs.iter().filter(|d| **d > 0.0).sum();
            let down: f64 = diffs.iter().filter(|d| **d < 0.0).map(|d| -d).sum();
            return Ok(Losses {
                l1: l1.min(2.0),
                tv: up.max(down).min(1.0),
            });
        }
        Support::Continuous { .. } => {
            let (lo, hi) = match settings.truncation {
                Some(w) => w,
                None => {
                    let (a0, a1) = a.window().expect("continuous window");
                    let (b0, b1) = b.window().expect("continuous window");
                    (a0.min(b0), a1.max(b1))
                }
            };
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(Error::GridConfig(format!(
                    "unbounded integration window [{lo}, {hi}]"
                )));
            }
            let mut breaks = a.breakpoints().to_vec();
            breaks.extend_from_slice(b.breakpoints());
            let r = integrate(
                |t| (a.density(t) - b.density(t)).abs(),
                lo,
                hi,
                &breaks,
                settings.quad(),
            );
            if !r.converged {
                return Err(Error::Quadrature {
                    tolerance: settings.l1_abs_tol,
                    estimate: r.error,
                });
            }
            r.value
        }
    };
    let l1 = l1.clamp(0.0, 2.0);
    Ok(Losses { l1, tv: 0.5 * l1 })
}

pub fn l1_distance(
    a: &ConditionalDensityEstimate,
    b: &ConditionalDensityEstimate,
    settings: &EngineSettings,
) -> Result<f64> {
    losses(a, b, settings).map(|l| l.l1)
}

/// Total variation distance, `sup_A |P(A) - Q(A)| = L¹ / 2`.
pub fn tv_distance(
    a: &ConditionalDensityEstimate,
    b: &ConditionalDensityEstimate,
    settings: &EngineSettings,
) -> Result<f64> {
    losses(a, b, settings).map(|l| l.tv)
}
