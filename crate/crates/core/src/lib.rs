//! Bayes estimation of a conditional density through the posterior
//! predictive distribution, for scalar-parameter models.
//!
//! - [`model`]: the three registered models and the hierarchical sampler.
//! - [`closed_form`]: conjugate closed forms used as oracles.
//! - [`engine`]: grid posterior, predictive conditional density, L¹/TV.
//! - [`harness`]: Bayes-risk curves, consistency traces, cross-checks.
//! - [`config`] and [`cli`]: the experiment runner.
//!
//! Consistency of the estimator presumes an identifiable model family on
//! standard Borel spaces. Those are preconditions, not something this crate
//! can check; the bundled models satisfy them.

pub mod cli;
pub mod closed_form;
pub mod config;
pub mod engine;
pub mod error;
pub mod harness;
pub mod model;
pub mod numerics;
pub mod quadrature;
pub mod seed;

pub use error::{Error, Result};
