//! Exact posterior predictive conditional densities for the three conjugate
//! models, used as analytic oracles for the grid engine.
//!
//! Two of the published formulas do not agree with direct integration. For
//! the two-coin and binormal models both the published expression and a
//! Beta/Normal conjugate re-derivation are provided; the re-derived forms are
//! the ones used as oracles, and the published ones are kept so the
//! disagreement can be reported.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::engine::{ConditionalDensityEstimate, EngineSettings, EstimateSource, Provenance};
use crate::error::{Error, Result};
use crate::model::{Binormal, Model, ModelKind, ModelSpec, Pair, PairedSample};

/// `n` and `s = Σ x1_i (1 + x2_i)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GammaExpStats {
    pub n: usize,
    pub s: f64,
}

/// Counts of `k2 = 0`, `(0, 1)` and `(1, 1)` pairs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoCoinStats {
    pub n: usize,
    pub n_plus0: usize,
    pub n01: usize,
    pub n11: usize,
}

/// `n` and `s1 = Σ (x1_i + x2_i)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BinormalStats {
    pub n: usize,
    pub s1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum SufficientStats {
    GammaExp(GammaExpStats),
    TwoCoin(TwoCoinStats),
    Binormal(BinormalStats),
}

impl SufficientStats {
    pub fn empty(kind: ModelKind) -> Self {
        match kind {
            ModelKind::GammaExp => SufficientStats::GammaExp(GammaExpStats::default()),
            ModelKind::TwoCoin => SufficientStats::TwoCoin(TwoCoinStats::default()),
            ModelKind::Binormal => SufficientStats::Binormal(BinormalStats::default()),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            SufficientStats::GammaExp(s) => s.n,
            SufficientStats::TwoCoin(s) => s.n,
            SufficientStats::Binormal(s) => s.n,
        }
    }

    /// Folds one more pair into the statistics.
    pub fn push(&mut self, pair: Pair) {
        match self {
            SufficientStats::GammaExp(s) => {
                s.n += 1;
                s.s += pair.x1 * (1.0 + pair.x2);
            }
            SufficientStats::TwoCoin(s) => {
                s.n += 1;
                match (pair.x1 == 1.0, pair.x2 == 1.0) {
                    (_, false) => s.n_plus0 += 1,
                    (false, true) => s.n01 += 1,
                    (true, true) => s.n11 += 1,
                }
            }
            SufficientStats::Binormal(s) => {
                s.n += 1;
                s.s1 += pair.x1 + pair.x2;
            }
        }
    }
}

pub fn sufficient_stats(kind: ModelKind, sample: &PairedSample) -> SufficientStats {
    let mut stats = SufficientStats::empty(kind);
    for &p in sample.pairs() {
        stats.push(p);
    }
    stats
}

fn gammaexp_a(lambda: f64, stats: &GammaExpStats, x1: f64) -> f64 {
    lambda + x1 + stats.s
}

/// `(2n+2) x1 a^(2n+2) / (x1 x2 + a)^(2n+3)` with `a = lambda + x1 + s`,
/// evaluated in log space.
pub fn gammaexp_estimate(lambda: f64, stats: &GammaExpStats, x1: f64, x2: f64) -> f64 {
    if x2 < 0.0 || x1 <= 0.0 {
        return 0.0;
    }
    let a = gammaexp_a(lambda, stats, x1);
    let k = 2.0 * stats.n as f64 + 2.0;
    (k * a.ln() - (k + 1.0) * (x1 * x2 + a).ln() + k.ln() + x1.ln()).exp()
}

/// Smallest `T` with `P(X2 > T | x1) <= tail` under the gamma-exp predictive.
fn gammaexp_upper(lambda: f64, stats: &GammaExpStats, x1: f64, tail: f64) -> f64 {
    let a = gammaexp_a(lambda, stats, x1);
    let k = 2.0 * stats.n as f64 + 2.0;
    a / x1 * (-(tail.ln()) / k).exp_m1()
}

impl TwoCoinStats {
    /// Beta posterior parameters: the likelihood is
    /// `theta^(n+0 + 2 n11) (1 - theta)^(n+0 + 2 n01)` and the prior uniform.
    pub fn beta_posterior(&self) -> (f64, f64) {
        (
            (self.n_plus0 + 2 * self.n11 + 1) as f64,
            (self.n_plus0 + 2 * self.n01 + 1) as f64,
        )
    }
}

/// Beta-conjugate predictive `P(k2 | k1)`:
/// `P(0|0) = a/(a+b+1)`, `P(1|0) = (b+1)/(a+b+1)`,
/// `P(0|1) = b/(a+b+1)`, `P(1|1) = (a+1)/(a+b+1)`.
pub fn twocoin_estimate(stats: &TwoCoinStats, k1: u8, k2: u8) -> f64 {
    let (a, b) = stats.beta_posterior();
    let denom = a + b + 1.0;
    match (k1, k2) {
        (0, 0) => a / denom,
        (0, _) => (b + 1.0) / denom,
        (_, 0) => b / denom,
        _ => (a + 1.0) / denom,
    }
}

/// The four-case expression as published, in terms of `n`, `n+0` and `n01`.
/// Each row sums to one, but the values disagree with direct integration
/// already at `n = 0`.
pub fn twocoin_printed_estimate(stats: &TwoCoinStats, k1: u8, k2: u8) -> f64 {
    let n = stats.n as f64;
    let c = stats.n_plus0 as f64 + 2.0 * stats.n01 as f64;
    match (k1, k2) {
        (0, 0) => (2.0 * n + 2.0) / (2.0 * n + c + 3.0),
        (0, _) => (c + 1.0) / (2.0 * n + c + 3.0),
        (_, 0) => (2.0 * n + 3.0) / (2.0 * n + c + 4.0),
        _ => (c + 1.0) / (2.0 * n + c + 4.0),
    }
}

/// Normal predictive law of `X2 | X1 = x1`:
/// `N((1 - rho1) m1 + rho1 x1, sigma1^2 (1 - rho1^2))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinormalPredictive {
    pub rho1: f64,
    pub sigma1_sq: f64,
    pub m1: f64,
}

impl BinormalPredictive {
    pub fn mean(&self, x1: f64) -> f64 {
        (1.0 - self.rho1) * self.m1 + self.rho1 * x1
    }

    pub fn variance(&self) -> f64 {
        self.sigma1_sq * (1.0 - self.rho1 * self.rho1)
    }

    pub fn density(&self, x1: f64, x2: f64) -> f64 {
        let var = self.variance();
        let d = x2 - self.mean(x1);
        (-0.5 * d * d / var).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
    }

    fn check(self) -> Result<Self> {
        let var = self.variance();
        if !(var > 0.0 && var.is_finite() && self.m1.is_finite() && self.rho1.is_finite()) {
            return Err(Error::FormulaInconsistency(format!(
                "binormal predictive variance {var} (rho1={}, sigma1^2={}, m1={})",
                self.rho1, self.sigma1_sq, self.m1
            )));
        }
        Ok(self)
    }
}

/// `rho1`, `sigma1^2` and `m1` exactly as published, with
/// `a_n = 2(n+1)(1+rho) + sigma^2/tau^2`.
pub fn binormal_printed(params: &Binormal, stats: &BinormalStats) -> Result<BinormalPredictive> {
    let Binormal {
        mu,
        tau,
        sigma,
        rho,
    } = *params;
    let s2 = sigma * sigma;
    let ratio = s2 / (tau * tau);
    let a = 2.0 * (stats.n as f64 + 1.0) * (1.0 + rho) + ratio;
    let r = (1.0 - rho) / (1.0 + rho);
    let rho1 = -(a + r) / (a - r) * rho;
    let sigma1_sq = a / (a - r) * s2;
    let m1 =
        (stats.s1 + (1.0 + rho) * ratio * mu) / (2.0 * (1.0 - rho1) * (1.0 + rho).powi(2) * s2 * a);
    BinormalPredictive {
        rho1,
        sigma1_sq,
        m1,
    }
    .check()
}

/// Normal–normal conjugate predictive. The posterior of `theta` is
/// `N(m, v)` with precision `1/tau^2 + 2n / (sigma^2 (1 + rho))`; the
/// predictive pair is bivariate normal with variance `sigma^2 + v`,
/// correlation `(rho sigma^2 + v) / (sigma^2 + v)` and common mean `m`.
pub fn binormal_conjugate(params: &Binormal, stats: &BinormalStats) -> Result<BinormalPredictive> {
    let Binormal {
        mu,
        tau,
        sigma,
        rho,
    } = *params;
    let s2 = sigma * sigma;
    let precision = 1.0 / (tau * tau) + 2.0 * stats.n as f64 / (s2 * (1.0 + rho));
    let v = 1.0 / precision;
    let m = (mu / (tau * tau) + stats.s1 / (s2 * (1.0 + rho))) * v;
    BinormalPredictive {
        rho1: (rho * s2 + v) / (s2 + v),
        sigma1_sq: s2 + v,
        m1: m,
    }
    .check()
}

/// The published binormal estimate at `(x1, x2)`.
pub fn binormal_estimate(
    params: &Binormal,
    stats: &BinormalStats,
    x1: f64,
    x2: f64,
) -> Result<f64> {
    Ok(binormal_printed(params, stats)?.density(x1, x2))
}

/// The conjugate binormal estimate at `(x1, x2)`.
pub fn binormal_conjugate_estimate(
    params: &Binormal,
    stats: &BinormalStats,
    x1: f64,
    x2: f64,
) -> Result<f64> {
    Ok(binormal_conjugate(params, stats)?.density(x1, x2))
}

/// Closed-form predictive conditional density as an estimate object. Uses
/// the re-derived forms for the two-coin and binormal models.
pub fn closed_form_conditional(
    model: &ModelSpec,
    sample: &PairedSample,
    x1: f64,
    settings: &EngineSettings,
) -> Result<ConditionalDensityEstimate> {
    let stats = sufficient_stats(model.kind(), sample);
    let provenance = Provenance {
        source: EstimateSource::ClosedForm,
        model: model.kind(),
        n: sample.n(),
        x1,
    };
    let support = model.x2_support();
    match (model, stats) {
        (ModelSpec::GammaExp(g), SufficientStats::GammaExp(st)) => {
            if !(x1 > 0.0) {
                return Err(Error::ZeroPredictiveMarginal { x1 });
            }
            let lambda = g.lambda;
            let upper = gammaexp_upper(lambda, &st, x1, settings.tail_mass);
            let breakpoints = [1e-2, 1e-4]
                .iter()
                .map(|&t| gammaexp_upper(lambda, &st, x1, t))
                .collect();
            Ok(ConditionalDensityEstimate::new(
                Arc::new(move |t| gammaexp_estimate(lambda, &st, x1, t)),
                support,
                Some((0.0, upper)),
                breakpoints,
                provenance,
            ))
        }
        (ModelSpec::TwoCoin(_), SufficientStats::TwoCoin(st)) => {
            if x1 != 0.0 && x1 != 1.0 {
                return Err(Error::ZeroPredictiveMarginal { x1 });
            }
            let k1 = x1 as u8;
            Ok(ConditionalDensityEstimate::new(
                Arc::new(move |t| twocoin_estimate(&st, k1, t as u8)),
                support,
                None,
                Vec::new(),
                provenance,
            ))
        }
        (ModelSpec::Binormal(b), SufficientStats::Binormal(st)) => {
            let pred = binormal_conjugate(b, &st)?;
            let centre = pred.mean(x1);
            let sd = pred.variance().sqrt();
            let half = |tail: f64| sd * (-2.0 * f64::ln(tail)).sqrt();
            let h = half(settings.tail_mass);
            let breakpoints = [1e-2, 1e-4]
                .iter()
                .flat_map(|&t| [centre - half(t), centre + half(t)])
                .collect();
            Ok(ConditionalDensityEstimate::new(
                Arc::new(move |t| pred.density(x1, t)),
                support,
                Some((centre - h, centre + h)),
                breakpoints,
                provenance,
            ))
        }
        _ => unreachable!("statistics follow the model kind"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gammaexp_reference_values() {
        let st = GammaExpStats::default();
        assert!((gammaexp_estimate(1.0, &st, 1.0, 0.0) - 1.0).abs() < 1e-14);
        assert!((gammaexp_estimate(1.0, &st, 1.0, 1.0) - 8.0 / 27.0).abs() < 1e-14);
        assert_eq!(gammaexp_estimate(1.0, &st, 1.0, -0.5), 0.0);
    }

    #[test]
    fn gammaexp_large_n_stays_finite() {
        let st = GammaExpStats {
            n: 100_000,
            s: 150_000.0,
        };
        let v = gammaexp_estimate(1.0, &st, 2.0, 0.4);
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn gammaexp_window_tail() {
        let st = GammaExpStats { n: 3, s: 4.5 };
        let t = gammaexp_upper(1.0, &st, 0.7, 1e-6);
        let a = gammaexp_a(1.0, &st, 0.7);
        let survival = (a / (a + 0.7 * t)).powi(8);
        assert!((survival - 1e-6).abs() < 1e-15);
    }

    #[test]
    fn stats_reference_values() {
        let s = sufficient_stats(
            ModelKind::GammaExp,
            &PairedSample::from(vec![(1.0, 1.0), (2.0, 0.0)]),
        );
        assert_eq!(s, SufficientStats::GammaExp(GammaExpStats { n: 2, s: 4.0 }));
        let s = sufficient_stats(
            ModelKind::TwoCoin,
            &PairedSample::from(vec![(0.0, 1.0), (1.0, 0.0), (1.0, 1.0)]),
        );
        assert_eq!(
            s,
            SufficientStats::TwoCoin(TwoCoinStats {
                n: 3,
                n_plus0: 1,
                n01: 1,
                n11: 1
            })
        );
        for kind in ModelKind::ALL {
            let s = sufficient_stats(kind, &PairedSample::default());
            assert_eq!(s, SufficientStats::empty(kind));
            assert_eq!(s.n(), 0);
        }
    }

    #[test]
    fn twocoin_reference_values() {
        let zero = TwoCoinStats::default();
        assert!((twocoin_estimate(&zero, 0, 0) - 1.0 / 3.0).abs() < 1e-16);
        assert!((twocoin_estimate(&zero, 0, 1) - 2.0 / 3.0).abs() < 1e-16);
        let one = TwoCoinStats {
            n: 1,
            n_plus0: 0,
            n01: 1,
            n11: 0,
        };
        assert!((twocoin_estimate(&one, 0, 1) - 0.8).abs() < 1e-16);
        assert!((twocoin_printed_estimate(&zero, 0, 0) - 2.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn twocoin_rows_sum_to_one() {
        for n_plus0 in 0..5 {
            for n01 in 0..5 {
                for n11 in 0..5 {
                    let st = TwoCoinStats {
                        n: n_plus0 + n01 + n11,
                        n_plus0,
                        n01,
                        n11,
                    };
                    for k1 in 0..2 {
                        let total = twocoin_estimate(&st, k1, 0) + twocoin_estimate(&st, k1, 1);
                        assert!((total - 1.0).abs() <= f64::EPSILON);
                    }
                }
            }
        }
    }

    #[test]
    fn binormal_forms_are_gaussian_and_centred() {
        let p = Binormal {
            mu: 0.2,
            tau: 1.5,
            sigma: 0.8,
            rho: 0.3,
        };
        let st = BinormalStats { n: 4, s1: 1.7 };
        for pred in [
            binormal_printed(&p, &st).unwrap(),
            binormal_conjugate(&p, &st).unwrap(),
        ] {
            let centre = pred.mean(0.4);
            let peak = pred.density(0.4, centre);
            assert!(peak > pred.density(0.4, centre + 1e-3));
            assert!(peak > pred.density(0.4, centre - 1e-3));
            assert!(
                (pred.density(0.4, centre + 0.3) - pred.density(0.4, centre - 0.3)).abs() < 1e-14
            );
        }
    }

    #[test]
    fn binormal_printed_variance_can_go_negative() {
        // a_n < (1 - rho)/(1 + rho) when rho is close to -1.
        let p = Binormal {
            mu: 0.0,
            tau: 10.0,
            sigma: 1.0,
            rho: -0.95,
        };
        let st = BinormalStats { n: 0, s1: 0.0 };
        assert!(matches!(
            binormal_printed(&p, &st),
            Err(Error::FormulaInconsistency(_))
        ));
        assert!(binormal_conjugate(&p, &st).is_ok());
    }

    #[test]
    fn binormal_conjugate_prior_predictive() {
        // n = 0: (X1, X2) ~ N((mu, mu), sigma^2 [[1, rho], [rho, 1]] + tau^2 11^T).
        let p = Binormal {
            mu: 0.0,
            tau: 1.0,
            sigma: 1.0,
            rho: 0.5,
        };
        let pred = binormal_conjugate(&p, &BinormalStats::default()).unwrap();
        assert!((pred.sigma1_sq - 2.0).abs() < 1e-15);
        assert!((pred.rho1 - 0.75).abs() < 1e-15);
        assert!((pred.variance() - 0.875).abs() < 1e-15);
    }
}
