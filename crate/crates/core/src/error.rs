use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid hyperparameter `{name}` = {value}: {constraint}")]
    InvalidHyperparameter {
        name: String,
        value: f64,
        constraint: &'static str,
    },

    #[error("missing hyperparameter `{0}`")]
    MissingHyperparameter(String),

    #[error("unknown model kind `{0}` (expected gamma-exp, two-coin or binormal)")]
    UnknownModel(String),

    #[error("x1 marginal density vanishes at theta={theta}, x1={x1}")]
    ZeroMarginal { theta: f64, x1: f64 },

    #[error("predictive x1 marginal vanishes at x1={x1}")]
    ZeroPredictiveMarginal { x1: f64 },

    #[error("posterior mass underflows to zero on every grid node (n={n})")]
    DegeneratePosterior { n: usize },

    #[error("grid configuration: {0}")]
    GridConfig(String),

    #[error("densities have different supports: {0} vs {1}")]
    SupportMismatch(String, String),

    #[error("closed form inconsistent: {0}")]
    FormulaInconsistency(String),

    #[error("quadrature did not reach tolerance {tolerance:e} (estimated error {estimate:e})")]
    Quadrature { tolerance: f64, estimate: f64 },

    #[error("no closed form available for model `{0}`")]
    NoClosedForm(String),

    #[error("experiment: {0}")]
    Experiment(String),
}

pub type Result<T> = std::result::Result<T, Error>;
