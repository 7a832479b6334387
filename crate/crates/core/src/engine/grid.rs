use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Model, ThetaTransform};

/// Parameter nodes with trapezoid weights expressed in the parameter's own
/// measure, so `sum(w_j g(theta_j))` approximates `∫ g(theta) d theta`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    transform: ThetaTransform,
}

impl ThetaGrid {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn transform(&self) -> ThetaTransform {
        self.transform
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫ q(theta) d theta` on the grid.
    pub fn prior_mass<M: Model + ?Sized>(&self, model: &M) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * model.prior_log_density(t).exp())
            .sum()
    }
}

/// Uniform grid on the model's transformed parameter axis between the prior
/// quantiles `p` and `1 - p`, `p` being the model's grid tail probability.
pub fn build_grid<M: Model + ?Sized>(model: &M, resolution: usize) -> Result<ThetaGrid> {
    if resolution < 16 {
        return Err(Error::GridConfig(format!("resolution {resolution} < 16")));
    }
    let transform = model.theta_transform();
    let p = model.grid_tail_probability();
    let lo = model.prior_quantile(p);
    let hi = model.prior_upper_quantile(p);
    let (ua, ub) = (transform.forward(lo), transform.forward(hi));
    if !(ua.is_finite() && ub.is_finite() && ub > ua) {
        return Err(Error::GridConfig(format!(
            "prior quantile range [{lo}, {hi}] is not resolvable on the {transform:?} axis"
        )));
    }
    let h = (ub - ua) / (resolution - 1) as f64;
    let mut nodes = Vec::with_capacity(resolution);
    let mut weights = Vec::with_capacity(resolution);
    for j in 0..resolution {
        let u = if j + 1 == resolution {
            ub
        } else {
            ua + h * j as f64
        };
        let end = j == 0 || j + 1 == resolution;
        nodes.push(transform.inverse(u));
        weights.push(if end { 0.5 * h } else { h } * transform.jacobian(u));
    }
    let support = model.theta_support();
    if nodes.windows(2).any(|w| !(w[1] > w[0])) || nodes.iter().any(|t| !support.contains(*t)) {
        return Err(Error::GridConfig(format!(
            "resolution {resolution} does not give strictly increasing nodes inside {support}"
        )));
    }
    let grid = ThetaGrid {
        nodes,
        weights,
        transform,
    };
    let mass = grid.prior_mass(model);
    if (mass - 1.0).abs() > 1e-6 {
        return Err(Error::GridConfig(format!(
            "grid of resolution {resolution} captures prior mass {mass}, outside 1 ± 1e-6"
        )));
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_model, ModelKind};

    fn model(kind: ModelKind) -> crate::model::ModelSpec {
        make_model(kind, &kind.default_hyperparams()).unwrap()
    }

    #[test]
    fn two_coin_grid_spans_unit_interval() {
        let m = model(ModelKind::TwoCoin);
        let g = build_grid(&m, 1024).unwrap();
        assert!(g.nodes()[0] > 0.0 && g.nodes()[0] < 1e-10);
        assert!(*g.nodes().last().unwrap() < 1.0 && *g.nodes().last().unwrap() > 1.0 - 1e-10);
        assert!((g.prior_mass(&m) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn gamma_exp_grid_spans_exponential_quantiles() {
        let m = model(ModelKind::GammaExp);
        let g = build_grid(&m, 2048).unwrap();
        let first = g.nodes()[0];
        let last = *g.nodes().last().unwrap();
        // -ln(1 - p) for p = 1e-10 and 1 - 1e-10.
        assert!((first - 1.000_000_000_05e-10).abs() < 1e-20);
        assert!((last - 23.025_850_929_940_457).abs() < 1e-9);
        assert!((g.prior_mass(&m) - 1.0).abs() < 1e-6);
        assert_eq!(g.len(), 2048);
    }

    #[test]
    fn binormal_grid_is_symmetric() {
        let m = model(ModelKind::Binormal);
        let g = build_grid(&m, 512).unwrap();
        assert!((g.nodes()[0] + g.nodes()[511]).abs() < 1e-9);
        assert!((g.prior_mass(&m) - 1.0).abs() < 1e-9);
        assert!(g.weights().iter().all(|w| *w > 0.0));
    }

    #[test]
    fn too_coarse_grids_are_rejected() {
        let m = model(ModelKind::GammaExp);
        assert!(matches!(build_grid(&m, 8), Err(Error::GridConfig(_))));
        // 16 log-spaced nodes over 25 e-folds cannot integrate the prior to 1e-6.
        assert!(matches!(build_grid(&m, 16), Err(Error::GridConfig(_))));
    }
}
