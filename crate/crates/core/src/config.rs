//! Experiment configuration: a single JSON document, validated as a whole.
//!
//! Omitted fields are filled with the defaults below and recorded in the
//! parsed [`ExperimentConfig`], so serializing it yields a fully explicit
//! configuration.
//!
//! | field | default |
//! |---|---|
//! | `model.hyperparams` | gamma-exp `lambda=1`; binormal `mu=0, tau=1, sigma=1, rho=0.5` |
//! | `engine` | resolution 4096, L¹ tolerance 1e-7, tail mass 1e-12, 4000 intervals |
//! | `seed` | 20240611 |
//! | `output_dir` | `$POSTPRED_OUT_DIR`, else `out` |
//! | `threads` | 1 |
//! | `estimate` | n=10, x1 from the fresh draw, model-specific probe grid |
//! | `risk_curve` | n = 1,2,4,...,64, 500 replications, numeric estimator |
//! | `trace` | theta drawn from the prior, model-specific probe, n = 1,2,4,...,2048 |
//! | `crosscheck` | n = 0,1,5,20, 10 samples per n, 20 probes per sample |

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::engine::EngineSettings;
use crate::harness::{EstimatorKind, Probe};
use crate::model::{make_model, Model, ModelKind, ModelSpec, Pair, Support};

pub const OUT_DIR_ENV: &str = "POSTPRED_OUT_DIR";
pub const DEFAULT_SEED: u64 = 20240611;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub hyperparams: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeGrid {
    pub lower: f64,
    pub upper: f64,
    pub points: usize,
}

impl ProbeGrid {
    pub fn values(&self) -> Vec<f64> {
        let step = (self.upper - self.lower) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.upper
                } else {
                    self.lower + step * i as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateConfig {
    /// Size of the simulated sample; ignored when `sample` is given.
    pub n: usize,
    /// Conditioning value; the fresh draw's `x1` when absent.
    pub x1: Option<f64>,
    /// Explicit observed sample.
    pub sample: Option<Vec<Pair>>,
    /// Evaluation points for continuous `X2`; discrete supports use their
    /// points.
    pub probe: ProbeGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskCurveConfig {
    pub n_values: Vec<usize>,
    pub replications: usize,
    pub estimator: EstimatorKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceConfig {
    pub theta: Option<f64>,
    pub probes: Vec<Probe>,
    pub checkpoints: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrosscheckConfig {
    pub n_values: Vec<usize>,
    pub samples_per_n: usize,
    pub probes_per_sample: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub engine: EngineSettings,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub threads: usize,
    pub estimate: EstimateConfig,
    pub risk_curve: RiskCurveConfig,
    pub trace: TraceConfig,
    pub crosscheck: CrosscheckConfig,
}

impl ExperimentConfig {
    pub fn model_spec(&self) -> ModelSpec {
        make_model(self.model.kind, &self.model.hyperparams).expect("validated at parse time")
    }

    /// Everything that determines results: the configuration without the
    /// output directory and thread count.
    pub fn reproducible_view(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        let obj = v.as_object_mut().expect("object");
        obj.remove("output_dir");
        obj.remove("threads");
        v
    }

    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let digest = Sha256::digest(self.reproducible_view().to_string().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// All violations found in a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration ({} problem(s)):", self.0.len())?;
        for e in &self.0 {
            writeln!(f, "  - {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

/// Applies a `key.path=value` override. The value is read as JSON when it
/// parses, otherwise as a string.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<(), String> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| format!("override `{assignment}` is not of the form key=value"))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(format!("override key `{key}` has an empty segment"));
        }
        if !node.is_object() {
            *node = Value::Object(Map::new());
        }
        let obj = node.as_object_mut().expect("object");
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Map::new()));
    }
    unreachable!("split yields at least one segment")
}

struct Reader {
    errors: Vec<String>,
}

impl Reader {
    fn field<T: DeserializeOwned>(
        &mut self,
        obj: Option<&Map<String, Value>>,
        path: &str,
        key: &str,
    ) -> Option<T> {
        let v = obj?.get(key)?;
        if v.is_null() {
            return None;
        }
        match serde_json::from_value(v.clone()) {
            Ok(t) => Some(t),
            Err(e) => {
                self.errors.push(format!("{path}{key}: {e}"));
                None
            }
        }
    }

    fn section<'a>(
        &mut self,
        root: &'a Map<String, Value>,
        key: &str,
    ) -> Option<&'a Map<String, Value>> {
        match root.get(key) {
            None | Some(Value::Null) => None,
            Some(Value::Object(m)) => Some(m),
            Some(_) => {
                self.errors.push(format!("{key}: expected an object"));
                None
            }
        }
    }

    fn unknown(&mut self, obj: Option<&Map<String, Value>>, path: &str, known: &[&str]) {
        if let Some(obj) = obj {
            for k in obj.keys() {
                if !known.contains(&k.as_str()) {
                    self.errors.push(format!("{path}{k}: unknown field"));
                }
            }
        }
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.errors.push(msg());
        }
    }
}

fn default_probe_grid(kind: ModelKind) -> ProbeGrid {
    match kind {
        ModelKind::GammaExp => ProbeGrid {
            lower: 0.0,
            upper: 5.0,
            points: 101,
        },
        ModelKind::TwoCoin => ProbeGrid {
            lower: 0.0,
            upper: 1.0,
            points: 2,
        },
        ModelKind::Binormal => ProbeGrid {
            lower: -4.0,
            upper: 4.0,
            points: 161,
        },
    }
}

fn default_probes(kind: ModelKind) -> Vec<Probe> {
    match kind {
        ModelKind::GammaExp | ModelKind::TwoCoin => vec![Probe { t: 1.0, x1: 1.0 }],
        ModelKind::Binormal => vec![Probe { t: 0.0, x1: 0.0 }],
    }
}

fn default_output_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Validates a configuration value, filling defaults. Reports every
/// violation rather than the first.
pub fn parse_config_value(root: &Value) -> Result<ExperimentConfig, ConfigErrors> {
    let mut r = Reader { errors: Vec::new() };
    let Some(root) = root.as_object() else {
        return Err(ConfigErrors(vec![
            "configuration must be a JSON object".into()
        ]));
    };
    r.unknown(
        Some(root),
        "",
        &[
            "model",
            "engine",
            "seed",
            "output_dir",
            "threads",
            "estimate",
            "risk_curve",
            "trace",
            "crosscheck",
        ],
    );

    // model
    let model_obj = r.section(root, "model");
    r.unknown(model_obj, "model.", &["kind", "hyperparams"]);
    let kind_raw: Option<String> = r.field(model_obj, "model.", "kind");
    let kind = match kind_raw {
        None => {
            r.errors
                .push("model.kind: required (gamma-exp, two-coin or binormal)".into());
            None
        }
        Some(s) => match s.parse::<ModelKind>() {
            Ok(k) => Some(k),
            Err(e) => {
                r.errors.push(format!("model.kind: {e}"));
                None
            }
        },
    };
    let given_hyper: BTreeMap<String, f64> = r
        .field(model_obj, "model.", "hyperparams")
        .unwrap_or_default();
    let mut model_spec = None;
    let mut hyperparams = BTreeMap::new();
    if let Some(kind) = kind {
        hyperparams = kind.default_hyperparams();
        hyperparams.extend(given_hyper);
        match make_model(kind, &hyperparams) {
            Ok(m) => model_spec = Some(m),
            Err(e) => r.errors.push(format!("model.hyperparams: {e}")),
        }
    }

    // engine
    let engine_obj = r.section(root, "engine");
    r.unknown(
        engine_obj,
        "engine.",
        &[
            "grid_resolution",
            "l1_abs_tol",
            "tail_mass",
            "max_intervals",
            "truncation",
        ],
    );
    let d = EngineSettings::default();
    let engine = EngineSettings {
        grid_resolution: r
            .field(engine_obj, "engine.", "grid_resolution")
            .unwrap_or(d.grid_resolution),
        l1_abs_tol: r
            .field(engine_obj, "engine.", "l1_abs_tol")
            .unwrap_or(d.l1_abs_tol),
        tail_mass: r
            .field(engine_obj, "engine.", "tail_mass")
            .unwrap_or(d.tail_mass),
        max_intervals: r
            .field(engine_obj, "engine.", "max_intervals")
            .unwrap_or(d.max_intervals),
        truncation: r.field(engine_obj, "engine.", "truncation"),
    };
    r.check(engine.grid_resolution >= 16, || {
        format!(
            "engine.grid_resolution: must be >= 16, got {}",
            engine.grid_resolution
        )
    });
    r.check(engine.l1_abs_tol > 0.0, || {
        format!("engine.l1_abs_tol: must be > 0, got {}", engine.l1_abs_tol)
    });
    r.check(engine.tail_mass > 0.0 && engine.tail_mass <= 1e-3, || {
        format!(
            "engine.tail_mass: must be in (0, 1e-3], got {}",
            engine.tail_mass
        )
    });
    r.check(engine.max_intervals >= 1, || {
        "engine.max_intervals: must be >= 1".into()
    });
    if let Some((a, b)) = engine.truncation {
        r.check(a.is_finite() && b.is_finite() && a < b, || {
            format!("engine.truncation: must be a finite interval [lo, hi] with lo < hi, got [{a}, {b}]")
        });
    }

    let seed: u64 = r.field(Some(root), "", "seed").unwrap_or(DEFAULT_SEED);
    let output_dir: PathBuf = r
        .field(Some(root), "", "output_dir")
        .unwrap_or_else(default_output_dir);
    let threads: usize = r.field(Some(root), "", "threads").unwrap_or(1);
    r.check(threads >= 1, || "threads: must be >= 1".into());

    let probe_kind = kind.unwrap_or(ModelKind::GammaExp);
    let x1_support = model_spec.as_ref().map(|m| m.x1_support());
    let in_x1 = |x: f64| x1_support.as_ref().map(|s| s.contains(x)).unwrap_or(true);

    // estimate
    let est_obj = r.section(root, "estimate");
    r.unknown(est_obj, "estimate.", &["n", "x1", "sample", "probe"]);
    let estimate = EstimateConfig {
        n: r.field(est_obj, "estimate.", "n").unwrap_or(10),
        x1: r.field(est_obj, "estimate.", "x1"),
        sample: r.field(est_obj, "estimate.", "sample"),
        probe: r
            .field(est_obj, "estimate.", "probe")
            .unwrap_or_else(|| default_probe_grid(probe_kind)),
    };
    if let Some(x1) = estimate.x1 {
        r.check(in_x1(x1), || {
            format!("estimate.x1: {x1} is outside the x1 support")
        });
    }
    if let (Some(sample), Some(m)) = (&estimate.sample, &model_spec) {
        let (s1, s2) = (m.x1_support(), m.x2_support());
        for (i, p) in sample.iter().enumerate() {
            r.check(s1.contains(p.x1) && s2.contains(p.x2), || {
                format!(
                    "estimate.sample[{i}]: ({}, {}) is outside the model support",
                    p.x1, p.x2
                )
            });
        }
    }
    let pg = estimate.probe;
    r.check(
        pg.points >= 2 && pg.lower.is_finite() && pg.upper.is_finite() && pg.lower < pg.upper,
        || format!("estimate.probe: need finite lower < upper and points >= 2, got {pg:?}"),
    );

    // risk curve
    let risk_obj = r.section(root, "risk_curve");
    r.unknown(
        risk_obj,
        "risk_curve.",
        &["n_values", "replications", "estimator"],
    );
    let risk_curve = RiskCurveConfig {
        n_values: r
            .field(risk_obj, "risk_curve.", "n_values")
            .unwrap_or_else(|| vec![1, 2, 4, 8, 16, 32, 64]),
        replications: r
            .field(risk_obj, "risk_curve.", "replications")
            .unwrap_or(500),
        estimator: r
            .field(risk_obj, "risk_curve.", "estimator")
            .unwrap_or(EstimatorKind::Numeric),
    };
    r.check(!risk_curve.n_values.is_empty(), || {
        "risk_curve.n_values: must be nonempty".into()
    });
    r.check(risk_curve.replications >= 2, || {
        format!(
            "risk_curve.replications: replications ≥ 2 required, got {}",
            risk_curve.replications
        )
    });

    // trace
    let trace_obj = r.section(root, "trace");
    r.unknown(trace_obj, "trace.", &["theta", "probes", "checkpoints"]);
    let trace = TraceConfig {
        theta: r.field(trace_obj, "trace.", "theta"),
        probes: r
            .field(trace_obj, "trace.", "probes")
            .unwrap_or_else(|| default_probes(probe_kind)),
        checkpoints: r
            .field(trace_obj, "trace.", "checkpoints")
            .unwrap_or_else(|| (0..12).map(|k| 1usize << k).collect()),
    };
    r.check(!trace.probes.is_empty(), || {
        "trace.probes: must be nonempty".into()
    });
    r.check(
        !trace.checkpoints.is_empty() && trace.checkpoints.windows(2).all(|w| w[0] < w[1]),
        || "trace.checkpoints: must be nonempty and strictly increasing".into(),
    );
    if let (Some(theta), Some(m)) = (trace.theta, &model_spec) {
        r.check(m.prior_log_density(theta) > f64::NEG_INFINITY, || {
            format!("trace.theta: {theta} is outside the parameter space")
        });
    }
    for (i, p) in trace.probes.iter().enumerate() {
        r.check(in_x1(p.x1), || {
            format!("trace.probes[{i}].x1: {} is outside the x1 support", p.x1)
        });
        if let Some(m) = &model_spec {
            if let Support::Discrete(_) = m.x2_support() {
                r.check(m.x2_support().contains(p.t), || {
                    format!("trace.probes[{i}].t: {} is outside the x2 support", p.t)
                });
            }
        }
    }

    // crosscheck
    let cc_obj = r.section(root, "crosscheck");
    r.unknown(
        cc_obj,
        "crosscheck.",
        &["n_values", "samples_per_n", "probes_per_sample"],
    );
    let crosscheck = CrosscheckConfig {
        n_values: r
            .field(cc_obj, "crosscheck.", "n_values")
            .unwrap_or_else(|| vec![0, 1, 5, 20]),
        samples_per_n: r
            .field(cc_obj, "crosscheck.", "samples_per_n")
            .unwrap_or(10),
        probes_per_sample: r
            .field(cc_obj, "crosscheck.", "probes_per_sample")
            .unwrap_or(20),
    };
    r.check(!crosscheck.n_values.is_empty(), || {
        "crosscheck.n_values: must be nonempty".into()
    });
    r.check(crosscheck.samples_per_n >= 1, || {
        "crosscheck.samples_per_n: must be >= 1".into()
    });
    r.check(crosscheck.probes_per_sample >= 1, || {
        "crosscheck.probes_per_sample: must be >= 1".into()
    });

    if !r.errors.is_empty() {
        return Err(ConfigErrors(r.errors));
    }
    Ok(ExperimentConfig {
        model: ModelConfig {
            kind: kind.expect("checked"),
            hyperparams,
        },
        engine,
        seed,
        output_dir,
        threads,
        estimate,
        risk_curve,
        trace,
        crosscheck,
    })
}

pub fn parse_config_str(
    text: &str,
    overrides: &[String],
) -> Result<ExperimentConfig, ConfigErrors> {
    let mut root: Value = serde_json::from_str(text)
        .map_err(|e| ConfigErrors(vec![format!("malformed JSON: {e}")]))?;
    let errs: Vec<String> = overrides
        .iter()
        .filter_map(|o| apply_override(&mut root, o).err())
        .collect();
    if !errs.is_empty() {
        return Err(ConfigErrors(errs));
    }
    parse_config_value(&root)
}

/// Reads and validates a configuration file.
pub fn validate_config(path: &Path) -> Result<ExperimentConfig, ConfigErrors> {
    load_config(path, &[])
}

pub fn load_config(path: &Path, overrides: &[String]) -> Result<ExperimentConfig, ConfigErrors> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigErrors(vec![format!("cannot read {}: {e}", path.display())]))?;
    parse_config_str(&text, overrides)
}
