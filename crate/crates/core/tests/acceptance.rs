//! Acceptance suite: every criterion runs at its stated size and tolerance and
//! prints one PASS/FAIL line. The process exits non-zero if any criterion
//! fails.
//!
//! Seeded criteria use `SEED`, fixed before any criterion was run.

use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use postpred::closed_form::{
    gammaexp_estimate, sufficient_stats, twocoin_estimate, SufficientStats,
};
use postpred::engine::{
    build_grid, losses, posterior_grid, predictive_conditional, true_conditional_estimate,
    EngineSettings, EstimateSource,
};
use postpred::harness::{
    bayes_risk_curve, consistency_trace, crosscheck_report, paired_risk_comparison, EstimatorKind,
    Probe,
};
use postpred::model::{make_model, sample_joint, Model, ModelKind, ModelSpec, PairedSample};
use postpred::numerics::log_sum_exp;
use postpred::seed::derive_seed;
use statrs::function::gamma::ln_gamma;

const SEED: u64 = 20240611;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn model(kind: ModelKind) -> ModelSpec {
    make_model(kind, &kind.default_hyperparams()).unwrap()
}

/// Gamma-exp predictive from the Gamma(2n+1, lambda+s) posterior.
fn gamma_exp_oracle(lambda: f64, sample: &PairedSample, x1: f64, t: f64) -> f64 {
    let shape = 2.0 * sample.n() as f64 + 1.0;
    let rate = lambda
        + sample
            .pairs()
            .iter()
            .map(|p| p.x1 * (1.0 + p.x2))
            .sum::<f64>();
    let log_num = x1.ln() + ln_gamma(shape + 2.0) - (shape + 2.0) * (rate + x1 * (1.0 + t)).ln();
    let log_den = ln_gamma(shape + 1.0) - (shape + 1.0) * (rate + x1).ln();
    (log_num - log_den).exp()
}

/// Two-coin predictive from Beta moments; the likelihood contributes
/// theta(1-theta) for k2=0 pairs, (1-theta)^2 for (0,1) and theta^2 for (1,1).
fn two_coin_oracle(sample: &PairedSample, k1: u8, k2: u8) -> f64 {
    let (mut a, mut b) = (1.0, 1.0);
    for p in sample.pairs() {
        match (p.x1 == 1.0, p.x2 == 1.0) {
            (_, false) => {
                a += 1.0;
                b += 1.0
            }
            (false, true) => b += 2.0,
            (true, true) => a += 2.0,
        }
    }
    let z = (a + b) * (a + b + 1.0);
    let e_tt = a * b / z;
    let (e_t2, e_1mt2) = (a * (a + 1.0) / z, b * (b + 1.0) / z);
    let (e_t, e_1mt) = (a / (a + b), b / (a + b));
    match (k1, k2) {
        (0, 0) => e_tt / e_1mt,
        (0, _) => e_1mt2 / e_1mt,
        (_, 0) => e_tt / e_t,
        _ => e_t2 / e_t,
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let m = model(ModelKind::GammaExp);
    let settings = EngineSettings {
        grid_resolution: 4096,
        ..EngineSettings::default()
    };
    let report = crosscheck_report(&m, &settings, &[0, 1, 5, 20], 10, 20, SEED).unwrap();
    let section = report.section("closed-form").unwrap();
    // The library closed form against an oracle written here, on the same
    // seeded samples the report used.
    let mut oracle_gap: f64 = 0.0;
    for n in [0usize, 1, 5, 20] {
        for s in 0..10u64 {
            let draw = sample_joint(&m, n, derive_seed(SEED, "crosscheck", &[n as u64, s]));
            let SufficientStats::GammaExp(st) = sufficient_stats(ModelKind::GammaExp, &draw.sample)
            else {
                unreachable!()
            };
            for t in [0.0, 0.3, 1.0, 4.0] {
                let x1 = draw.fresh_pair.x1;
                let o = gamma_exp_oracle(1.0, &draw.sample, x1, t);
                oracle_gap = oracle_gap.max((gammaexp_estimate(1.0, &st, x1, t) - o).abs() / o);
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = section.comparisons == 800
        && section.failures.is_empty()
        && section.max_rel_diff <= 1e-6
        && oracle_gap <= 1e-12
        && elapsed <= Duration::from_secs(60);
    outcome(
        pass,
        format!(
            "{} comparisons, max rel err {:.2e} (tol 1e-6); closed form vs oracle {:.1e}; {:.1}s (limit 60s)",
            section.comparisons,
            section.max_rel_diff,
            oracle_gap,
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_2() -> Outcome {
    let m = model(ModelKind::TwoCoin);
    let settings = EngineSettings::default();
    let grid = Arc::new(build_grid(&m, settings.grid_resolution).unwrap());
    let mut max_engine: f64 = 0.0;
    let mut max_closed: f64 = 0.0;
    for s in 0..50u64 {
        let n = (s + 1) as usize;
        let draw = sample_joint(&m, n, derive_seed(SEED, "acceptance-two-coin", &[s]));
        let SufficientStats::TwoCoin(st) = sufficient_stats(ModelKind::TwoCoin, &draw.sample)
        else {
            unreachable!()
        };
        let post = posterior_grid(&m, &grid, &draw.sample).unwrap();
        for k1 in 0..2u8 {
            let est = predictive_conditional(&m, &post, k1 as f64, &settings).unwrap();
            for k2 in 0..2u8 {
                let o = two_coin_oracle(&draw.sample, k1, k2);
                let cf = twocoin_estimate(&st, k1, k2);
                max_engine = max_engine.max((est.density(k2 as f64) - cf).abs());
                max_closed = max_closed.max((cf - o).abs());
            }
        }
    }
    // n = 0: direct integration gives int theta(1-theta) / int (1-theta) = 1/3.
    let prior = posterior_grid(&m, &grid, &PairedSample::default()).unwrap();
    let est = predictive_conditional(&m, &prior, 0.0, &settings).unwrap();
    let n0 = (est.density(0.0), est.density(1.0));
    let n0_ok = (n0.0 - 1.0 / 3.0).abs() <= 1e-10 && (n0.1 - 2.0 / 3.0).abs() <= 1e-10;
    let empty = SufficientStats::empty(ModelKind::TwoCoin);
    let SufficientStats::TwoCoin(st0) = empty else {
        unreachable!()
    };
    let closed_n0 =
        twocoin_estimate(&st0, 0, 0) == 1.0 / 3.0 && twocoin_estimate(&st0, 0, 1) == 2.0 / 3.0;
    // The published four-case formula disagrees at n = 0; crosscheck records it.
    let report = crosscheck_report(&m, &settings, &[0], 1, 1, SEED).unwrap();
    let printed = report.section("printed").unwrap();
    let cell = printed
        .flagged
        .iter()
        .find(|e| e.n == 0 && e.x1 == 0.0 && e.x2 == 0.0);
    let recorded = cell.is_some_and(|e| {
        (e.closed_form - 2.0 / 3.0).abs() < 1e-15 && (e.numeric - 1.0 / 3.0).abs() <= 1e-10
    }) && report.section("beta-conjugate").unwrap().within_tolerance();
    let printed_cell = cell.map_or(f64::NAN, |e| e.closed_form);
    outcome(
        max_engine <= 1e-10 && max_closed <= 1e-15 && n0_ok && closed_n0 && recorded,
        format!(
            "engine vs Beta form max abs {max_engine:.1e} (tol 1e-10) over 50 samples x 4 cells; \
             n=0 -> ({:.12}, {:.12}); printed P(0|0) at n=0 = {printed_cell:.6} vs 1/3 flagged by crosscheck: {recorded}",
            n0.0, n0.1
        ),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let m = model(ModelKind::GammaExp);
    let n_values = [1, 2, 4, 8, 16, 32, 64];
    let curve = bayes_risk_curve(
        &m,
        &EngineSettings::default(),
        &n_values,
        500,
        SEED,
        EstimatorKind::Numeric,
    )
    .unwrap();
    let elapsed = start.elapsed();
    let first = &curve.records[0];
    let last = curve.records.last().unwrap();
    let ratio_l1 = first.mean_l1_sq / last.mean_l1_sq;
    let ratio_tv = first.mean_tv_sq / last.mean_tv_sq;
    let (slope_l1, slope_tv) = (curve.log_log_slope_l1_sq(), curve.log_log_slope_tv_sq());
    let coupled = curve
        .records
        .iter()
        .all(|r| (r.mean_tv_sq - 0.25 * r.mean_l1_sq).abs() <= 1e-12 * r.mean_l1_sq.max(1.0));
    let pass = ratio_l1 >= 3.0
        && ratio_tv >= 3.0
        && slope_l1 < 0.0
        && slope_tv < 0.0
        && coupled
        && curve.records.iter().all(|r| r.replications == 500)
        && elapsed <= Duration::from_secs(300);
    outcome(
        pass,
        format!(
            "risk(1)/risk(64): L1^2 {ratio_l1:.2}, TV^2 {ratio_tv:.2} (need >= 3); slopes {slope_l1:.3}, \
             {slope_tv:.3} (need < 0); {:.1}s (limit 300s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_4() -> Outcome {
    let m = model(ModelKind::GammaExp);
    let settings = EngineSettings::default();
    let challengers = [
        EstimatorKind::PriorPredictive,
        EstimatorKind::PluginPosteriorMean,
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [1, 4, 16] {
        let cmp = paired_risk_comparison(
            &m,
            &settings,
            n,
            500,
            SEED,
            EstimatorKind::Numeric,
            &challengers,
        )
        .unwrap();
        for c in cmp {
            let z = c.mean_difference / c.se_difference;
            let ok = c.baseline_wins_by(2.0) && c.replications == 500;
            pass &= ok;
            let name = match c.challenger {
                EstimatorKind::PriorPredictive => "prior-pred",
                _ => "plug-in",
            };
            parts.push(format!(
                "n={n} {name}: {z:.2} SE{}",
                if ok { "" } else { " (short)" }
            ));
        }
    }
    outcome(
        pass,
        format!(
            "Bayes risk margin in paired SEs (need >= 2): {}",
            parts.join(", ")
        ),
    )
}

fn criterion_5() -> Outcome {
    let settings = EngineSettings::default();
    let mut checkpoints: Vec<usize> = (0..11).map(|k| 1usize << k).collect();
    checkpoints.push(2000);
    let probe = [Probe { t: 1.0, x1: 1.0 }];
    let mut pass = true;
    let mut parts = Vec::new();
    for (kind, theta, truth) in [
        (ModelKind::GammaExp, 1.0, (-1.0f64).exp()),
        (ModelKind::TwoCoin, 0.7, 0.7),
    ] {
        let m = model(kind);
        let trace =
            consistency_trace(&m, &settings, Some(theta), &probe, &checkpoints, SEED).unwrap();
        let first = trace.entries.first().unwrap();
        let last = trace.entries.last().unwrap();
        let ok = last.n == 2000
            && (last.true_value - truth).abs() < 1e-15
            && last.abs_error <= 0.05
            && last.abs_error < first.abs_error;
        pass &= ok;
        parts.push(format!(
            "{kind} theta={theta}: |err| {:.4} at n=1 -> {:.4} at n=2000",
            first.abs_error, last.abs_error
        ));
    }
    outcome(
        pass,
        format!(
            "{} (need final <= 0.05 and below initial)",
            parts.join("; ")
        ),
    )
}

fn criterion_6() -> Outcome {
    let settings = EngineSettings::default();
    let mut sup_exact = true;
    let mut max_tv_gap: f64 = 0.0;
    let mut max_mass_gap: f64 = 0.0;
    let mut discrete_exact = true;
    let mut checked = 0;
    for kind in ModelKind::ALL {
        let m = model(kind);
        let grid = Arc::new(build_grid(&m, settings.grid_resolution).unwrap());
        let prior = posterior_grid(&m, &grid, &PairedSample::default()).unwrap();
        for s in 0..10u64 {
            let n = 3 * s as usize;
            let draw = sample_joint(
                &m,
                n,
                derive_seed(SEED, "acceptance-losses", &[kind as u64, s]),
            );
            let x1 = draw.fresh_pair.x1;
            let post = posterior_grid(&m, &grid, &draw.sample).unwrap();
            let estimates = [
                predictive_conditional(&m, &post, x1, &settings).unwrap(),
                predictive_conditional(&m, &prior, x1, &settings).unwrap(),
                postpred::closed_form::closed_form_conditional(&m, &draw.sample, x1, &settings)
                    .unwrap(),
                true_conditional_estimate(
                    &m,
                    draw.theta,
                    x1,
                    n,
                    EstimateSource::TrueConditional,
                    &settings,
                )
                .unwrap(),
            ];
            for e in &estimates {
                let mass = e.total_mass(&settings).unwrap();
                if m.x2_support().is_discrete() {
                    discrete_exact &= mass == 1.0;
                } else {
                    max_mass_gap = max_mass_gap.max((mass - 1.0).abs());
                }
            }
            for (i, a) in estimates.iter().enumerate() {
                for b in &estimates[i + 1..] {
                    let l = losses(a, b, &settings).unwrap();
                    max_tv_gap = max_tv_gap.max((l.tv - 0.5 * l.l1).abs());
                    if let postpred::model::Support::Discrete(points) = m.x2_support() {
                        let mut sup: f64 = 0.0;
                        for mask in 0u32..(1 << points.len()) {
                            let (mut p, mut q) = (0.0, 0.0);
                            for (j, &t) in points.iter().enumerate() {
                                if mask & (1 << j) != 0 {
                                    p += a.density(t);
                                    q += b.density(t);
                                }
                            }
                            sup = sup.max((p - q).abs());
                        }
                        sup_exact &= l.tv == sup;
                    }
                    checked += 1;
                }
            }
        }
    }
    outcome(
        sup_exact && max_tv_gap <= 1e-12 && max_mass_gap <= 1e-6 && discrete_exact,
        format!(
            "{checked} pairs: discrete TV == brute-force sup: {sup_exact}; max |TV - L1/2| {max_tv_gap:.1e} \
             (tol 1e-12); continuous mass err {max_mass_gap:.1e} (tol 1e-6); discrete mass exactly 1: {discrete_exact}"
        ),
    )
}

fn criterion_7() -> Outcome {
    let settings = EngineSettings::default();
    let mut worst: f64 = 0.0;
    for kind in ModelKind::ALL {
        let m = model(kind);
        let grid = Arc::new(build_grid(&m, settings.grid_resolution).unwrap());
        for s in 0..20u64 {
            let n = (s * 7 % 31) as usize;
            let draw = sample_joint(
                &m,
                n,
                derive_seed(SEED, "acceptance-mixture", &[kind as u64, s]),
            );
            let (x1, t) = (draw.fresh_pair.x1, draw.fresh_pair.x2);
            let post = posterior_grid(&m, &grid, &draw.sample).unwrap();
            let lhs = predictive_conditional(&m, &post, x1, &settings)
                .unwrap()
                .density(t);
            // x1-reweighted posterior over every node, then the mixture of
            // true conditionals.
            let mut lw: Vec<f64> = grid
                .nodes()
                .iter()
                .zip(post.log_masses())
                .map(|(&th, &lm)| lm + m.x1_marginal_log_density(th, x1))
                .collect();
            let z = log_sum_exp(&lw);
            lw.iter_mut().for_each(|w| *w -= z);
            let rhs: f64 = grid
                .nodes()
                .iter()
                .zip(&lw)
                .map(|(&th, &w)| (w + m.conditional_log_density(th, x1, t)).exp())
                .sum();
            worst = worst.max((lhs - rhs).abs() / rhs.abs().max(1.0));
        }
    }
    outcome(
        worst <= 1e-12,
        format!("60 triples, max discrepancy {worst:.1e} (tol 1e-12)"),
    )
}

fn criterion_8() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_postpred");
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let max_threads = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .max(4);
    let config = r#"{
        "model": {"kind": "gamma-exp"},
        "engine": {"grid_resolution": 1024},
        "risk_curve": {"n_values": [1, 8], "replications": 40},
        "trace": {"theta": 1.0, "checkpoints": [1, 10, 100]},
        "crosscheck": {"n_values": [0, 5], "samples_per_n": 3, "probes_per_sample": 5}
    }"#;
    std::fs::write(dir.join("c.json"), config).unwrap();
    let run = |cmd: &str, out: &str, threads: usize| {
        let st = Command::new(bin)
            .args([
                cmd,
                "--config",
                "c.json",
                "--seed",
                &SEED.to_string(),
                "--out",
                out,
            ])
            .args(["--threads", &threads.to_string()])
            .current_dir(dir)
            .output()
            .unwrap();
        st.status.success()
    };
    let read = |p: &Path| std::fs::read(p).unwrap_or_default();
    let mut pass = true;
    let mut files = 0;
    for (cmd, outputs) in [
        ("estimate", &["estimate.csv", "estimate.json"][..]),
        ("risk-curve", &["risk_curve.csv", "risk_curve.json"][..]),
        ("trace", &["trace.csv", "trace.json"][..]),
        ("crosscheck", &["crosscheck.json"][..]),
    ] {
        pass &= run(cmd, "a", 1) && run(cmd, "b", 1) && run(cmd, "c", max_threads);
        for f in outputs {
            let a = read(&dir.join("a").join(f));
            pass &= !a.is_empty()
                && a == read(&dir.join("b").join(f))
                && a == read(&dir.join("c").join(f));
            files += 1;
        }
    }
    outcome(
        pass,
        format!("{files} output files byte-identical across reruns and 1 vs {max_threads} threads"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 closed-form equivalence (gamma-exp)", criterion_1),
        ("2 exact discrete oracle (two-coin)", criterion_2),
        ("3 risk decay (squared L1 and TV)", criterion_3),
        ("4 Bayes dominance over challengers", criterion_4),
        ("5 strong consistency traces", criterion_5),
        ("6 loss identities and normalization", criterion_6),
        ("7 mixture identity on the grid", criterion_7),
        ("8 CLI determinism", criterion_8),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "acceptance {} [{name}] {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
