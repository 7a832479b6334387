//! Numeric posterior on a parameter grid, the posterior predictive
//! conditional density built from it, and the L¹ / total-variation losses
//! between conditional densities.

mod distance;
mod estimate;
mod grid;
mod posterior;

pub use distance::{l1_distance, losses, tv_distance, Losses};
pub use estimate::{
    true_conditional_estimate, ConditionalDensityEstimate, EstimateSource, Provenance,
};
pub use grid::{build_grid, ThetaGrid};
pub use posterior::{posterior_grid, predictive_conditional, PosteriorAccumulator, PosteriorGrid};

use serde::{Deserialize, Serialize};

use crate::quadrature::QuadSettings;

/// Numerical settings shared by every engine computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineSettings {
    /// Number of parameter grid nodes.
    pub grid_resolution: usize,
    /// Absolute tolerance of the L¹ quadrature over continuous supports.
    pub l1_abs_tol: f64,
    /// Conditional mass allowed outside the integration window of a
    /// continuous density.
    pub tail_mass: f64,
    /// Subdivision budget of the adaptive quadrature.
    pub max_intervals: usize,
    /// Fixed integration window overriding the computed truncation.
    #[serde(default)]
    pub truncation: Option<(f64, f64)>,
}

impl Default for EngineSettings {
    fn default() -> Self {
        Self {
            grid_resolution: 4096,
            l1_abs_tol: 1e-7,
            tail_mass: 1e-12,
            max_intervals: 4000,
            truncation: None,
        }
    }
}

impl EngineSettings {
    pub fn quad(&self) -> QuadSettings {
        QuadSettings {
            abs_tol: self.l1_abs_tol,
            max_intervals: self.max_intervals,
        }
    }
}
