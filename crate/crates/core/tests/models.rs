use std::collections::BTreeMap;

use postpred::model::{make_model, sample_joint, Model, ModelKind, ModelSpec, Support};
use postpred::quadrature::{integrate, QuadSettings};
use postpred::seed::{derive_seed, rng_from_seed};
use postpred::Error;

fn model(kind: ModelKind) -> ModelSpec {
    make_model(kind, &kind.default_hyperparams()).unwrap()
}

fn quad(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let r = integrate(
        f,
        a,
        b,
        &[],
        QuadSettings {
            abs_tol: 1e-11,
            max_intervals: 4000,
        },
    );
    assert!(r.converged);
    r.value
}

#[test]
fn continuous_conditionals_integrate_to_one() {
    let g = model(ModelKind::GammaExp);
    for (theta, x1) in [(0.3, 0.2), (1.0, 1.0), (4.0, 2.5)] {
        let upper = 60.0 / (theta * x1);
        let mass = quad(
            |t| g.conditional_log_density(theta, x1, t).exp(),
            0.0,
            upper,
        );
        assert!(
            (mass - 1.0).abs() < 1e-8,
            "gamma-exp theta={theta} x1={x1}: {mass}"
        );
    }
    let b = model(ModelKind::Binormal);
    for (theta, x1) in [(-1.0, 0.5), (0.0, 0.0), (2.0, -3.0)] {
        let mass = quad(
            |t| b.conditional_log_density(theta, x1, t).exp(),
            -30.0,
            30.0,
        );
        assert!(
            (mass - 1.0).abs() < 1e-8,
            "binormal theta={theta} x1={x1}: {mass}"
        );
    }
}

#[test]
fn joint_density_factorizes_through_the_marginal() {
    for kind in ModelKind::ALL {
        let m = model(kind);
        let mut rng = rng_from_seed(derive_seed(7, "factorize", &[kind as u64]));
        for _ in 0..50 {
            let theta = m.sample_prior(&mut rng);
            let p = m.sample_pair(theta, &mut rng);
            let lhs = m.joint_log_density(theta, p.x1, p.x2);
            let rhs = m.x1_marginal_log_density(theta, p.x1)
                + m.conditional_log_density(theta, p.x1, p.x2);
            assert!(
                (lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0),
                "{kind}: {lhs} vs {rhs}"
            );
        }
    }
}

#[test]
fn gamma_exp_x1_marginal_integrates_to_one() {
    let g = model(ModelKind::GammaExp);
    for theta in [0.5, 1.0, 3.0] {
        let mass = quad(
            |x| g.x1_marginal_log_density(theta, x).exp(),
            0.0,
            80.0 / theta,
        );
        assert!((mass - 1.0).abs() < 1e-8);
    }
}

#[test]
fn two_coin_pmf_sums_to_one_and_matches_frequencies() {
    let m = model(ModelKind::TwoCoin);
    let theta = 0.7;
    let total: f64 = [0.0, 1.0]
        .iter()
        .flat_map(|&a| [0.0, 1.0].map(move |b| (a, b)))
        .map(|(a, b)| m.joint_log_density(theta, a, b).exp())
        .sum();
    assert!((total - 1.0).abs() < 1e-15);

    let draws = 100_000;
    let mut counts = [[0usize; 2]; 2];
    let mut rng = rng_from_seed(derive_seed(11, "two-coin-freq", &[]));
    for _ in 0..draws {
        let p = m.sample_pair(theta, &mut rng);
        counts[p.x1 as usize][p.x2 as usize] += 1;
    }
    for (k1, k2) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let p = m.joint_log_density(theta, k1 as f64, k2 as f64).exp();
        let freq = counts[k1][k2] as f64 / draws as f64;
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        assert!((freq - p).abs() < 5.0 * se, "({k1},{k2}): {freq} vs {p}");
    }
    let heads = (counts[1][0] + counts[1][1]) as f64 / draws as f64;
    assert!((heads - theta).abs() < 5.0 * (theta * (1.0 - theta) / draws as f64).sqrt());
}

#[test]
fn samples_lie_in_their_supports() {
    for kind in ModelKind::ALL {
        let m = model(kind);
        let draw = sample_joint(&m, 200, derive_seed(3, "support", &[kind as u64]));
        assert!(m.prior_log_density(draw.theta).is_finite());
        for p in draw.sample.pairs().iter().chain([&draw.fresh_pair]) {
            assert!(
                m.x1_support().contains(p.x1) && m.x2_support().contains(p.x2),
                "{kind}: {p:?}"
            );
        }
    }
}

#[test]
fn joint_draw_is_reproducible_and_prefix_stable() {
    let m = model(ModelKind::Binormal);
    let a = sample_joint(&m, 50, 99);
    let b = sample_joint(&m, 50, 99);
    assert_eq!(a, b);
    let longer = sample_joint(&m, 80, 99);
    assert_eq!(longer.theta, a.theta);
    assert_eq!(&longer.sample.pairs()[..50], a.sample.pairs());
}

#[test]
fn prior_quantiles_invert_the_prior() {
    let g = model(ModelKind::GammaExp);
    let q = g.prior_quantile(0.25);
    assert!((1.0 - (-q).exp() - 0.25).abs() < 1e-15);
    let b = model(ModelKind::Binormal);
    assert!(b.prior_quantile(0.5).abs() < 1e-12);
    assert!((b.prior_upper_quantile(0.025) - 1.959963984540054).abs() < 1e-9);
    assert_eq!(
        model(ModelKind::TwoCoin).x2_support(),
        Support::Discrete(vec![0.0, 1.0])
    );
}

#[test]
fn invalid_hyperparameters_are_rejected() {
    let bad = |kind: ModelKind, key: &str, value: f64| {
        let mut h = kind.default_hyperparams();
        h.insert(key.to_string(), value);
        make_model(kind, &h)
    };
    assert!(matches!(
        bad(ModelKind::GammaExp, "lambda", 0.0),
        Err(Error::InvalidHyperparameter { .. })
    ));
    assert!(matches!(
        bad(ModelKind::Binormal, "rho", 1.0),
        Err(Error::InvalidHyperparameter { .. })
    ));
    assert!(matches!(
        bad(ModelKind::Binormal, "sigma", f64::NAN),
        Err(Error::InvalidHyperparameter { .. })
    ));
    assert!(make_model(ModelKind::Binormal, &BTreeMap::new()).is_err());
    assert!(bad(ModelKind::TwoCoin, "lambda", 1.0).is_err());
}
