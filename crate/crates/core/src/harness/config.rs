use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::estimation::{EstimatorConfig, MlqaeConfig};
use crate::optimize::OptimizerConfig;
use crate::poisson::Method;
use crate::rng::derive_seed;
use crate::vqls::{CostKind, ProblemSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Train,
    SampleFidelity,
    InnerpError,
    OpError,
    CostVariation,
    GradSimilarity,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Train,
        ExperimentKind::SampleFidelity,
        ExperimentKind::InnerpError,
        ExperimentKind::OpError,
        ExperimentKind::CostVariation,
        ExperimentKind::GradSimilarity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Train => "train",
            ExperimentKind::SampleFidelity => "sample-fidelity",
            ExperimentKind::InnerpError => "innerp-error",
            ExperimentKind::OpError => "op-error",
            ExperimentKind::CostVariation => "cost-variation",
            ExperimentKind::GradSimilarity => "grad-similarity",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
                Error::config("experiment", format!("unknown experiment {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

/// Inner-product estimators compared by `innerp-error`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InnerProductEstimator {
    /// `Re<f|psi>` from the Hadamard test.
    Hadamard,
    /// `|<f|psi>|^2` from the overlap test.
    Overlap,
    /// `|<f|psi>|^2` from maximum-likelihood amplitude estimation.
    Mlqae,
}

impl InnerProductEstimator {
    pub fn name(self) -> &'static str {
        match self {
            InnerProductEstimator::Hadamard => "hadamard",
            InnerProductEstimator::Overlap => "overlap",
            InnerProductEstimator::Mlqae => "mlqae",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    /// Random parameter samples for the per-sample experiments.
    pub samples: usize,
    pub percentiles: Vec<f64>,
    /// Shot counts swept by the estimator experiments.
    pub shots: Vec<u64>,
    /// Base points of `cost-variation`.
    pub bases: usize,
    /// Directions per base point of `cost-variation`.
    pub directions: usize,
    /// Step sizes of `cost-variation`.
    pub steps: Vec<f64>,
    /// Half-width of the uniform direction components.
    pub direction_range: f64,
    /// Decompositions compared by `op-error`.
    pub methods: Vec<Method>,
    /// Estimators compared by `innerp-error`.
    pub estimators: Vec<InnerProductEstimator>,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            samples: 100,
            percentiles: vec![0.0, 5.0, 25.0, 50.0, 75.0, 95.0, 100.0],
            shots: vec![100, 1000, 10_000],
            bases: 50,
            directions: 100,
            steps: vec![0.1],
            direction_range: std::f64::consts::TAU,
            methods: Method::ALL.to_vec(),
            estimators: vec![
                InnerProductEstimator::Hadamard,
                InnerProductEstimator::Overlap,
                InnerProductEstimator::Mlqae,
            ],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Master seed; every other seed is derived from it.
    pub seed: u64,
    pub problem: ProblemSpec,
    /// Decomposition of `A` used by shot-based estimates.
    pub method: Method,
    pub cost: CostKind,
    pub estimator: EstimatorConfig,
    pub optimizer: OptimizerConfig,
    pub sampling: SamplingConfig,
    pub mlqae: MlqaeConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: ExperimentKind::Train,
            seed: 0,
            problem: ProblemSpec::default(),
            method: Method::Liu21,
            cost: CostKind::CN,
            estimator: EstimatorConfig::default(),
            optimizer: OptimizerConfig::default(),
            sampling: SamplingConfig::default(),
            mlqae: MlqaeConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn for_experiment(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            experiment: kind,
            ..Self::default()
        }
    }

    /// Parse a JSON document, reporting the failing field path.
    pub fn from_value(value: Value) -> Result<Self> {
        serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            Error::config(if path == "." { "<root>".into() } else { path }, e.into_inner().to_string())
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::config("<file>", e.to_string()))?;
        Self::from_value(value)
    }

    /// Load a config file, apply `key=value` overrides, then validate.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut value = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::config("--config", format!("cannot read {}: {e}", p.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| Error::config("--config", format!("{}: {e}", p.display())))?
            }
            None => Value::Object(Default::default()),
        };
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let cfg = Self::from_value(value)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Propagate the master seed into the estimator and optimizer blocks.
    pub fn with_master_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.estimator.seed = derive_seed(seed, 1);
        self.optimizer.seed = derive_seed(seed, 2);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.problem;
        if p.n < 2 {
            return Err(Error::config("problem.n", "need at least 2 qubits"));
        }
        if !(p.h > 0.0) {
            return Err(Error::config("problem.h", "mesh size must be positive"));
        }
        self.estimator.validate()?;
        self.optimizer.validate()?;
        self.mlqae.validate()?;
        let s = &self.sampling;
        if s.percentiles.iter().any(|q| !(0.0..=100.0).contains(q)) {
            return Err(Error::config("sampling.percentiles", "percentiles must lie in [0, 100]"));
        }
        if s.samples == 0 {
            return Err(Error::config("sampling.samples", "must be at least 1"));
        }
        if s.shots.is_empty() || s.shots.contains(&0) {
            return Err(Error::config("sampling.shots", "need at least one positive shot count"));
        }
        if s.bases == 0 || s.directions == 0 {
            return Err(Error::config("sampling.bases", "bases and directions must be at least 1"));
        }
        if s.steps.is_empty() {
            return Err(Error::config("sampling.steps", "need at least one step size"));
        }
        if !(s.direction_range > 0.0) {
            return Err(Error::config("sampling.direction_range", "must be positive"));
        }
        if self.experiment == ExperimentKind::OpError && s.methods.is_empty() {
            return Err(Error::config("sampling.methods", "need at least one decomposition"));
        }
        if self.experiment == ExperimentKind::InnerpError && s.estimators.is_empty() {
            return Err(Error::config("sampling.estimators", "need at least one estimator"));
        }
        let shot_based = matches!(
            self.experiment,
            ExperimentKind::CostVariation | ExperimentKind::GradSimilarity
        );
        if shot_based && self.cost.exact_only() {
            return Err(Error::config("cost", format!("{} has no shot-based estimator", self.cost)));
        }
        if self.experiment == ExperimentKind::Train && self.cost.exact_only() && !self.estimator.is_exact() {
            return Err(Error::config("cost", format!("{} is only available with the exact backend", self.cost)));
        }
        Ok(())
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Set a dotted key path in a JSON document. The value is parsed as JSON
/// when possible and taken as a string otherwise.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::config("--set", format!("expected key=value, got {assignment:?}")))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(Error::config("--set", format!("malformed key {key:?}")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if !node.is_object() {
            if node.is_null() {
                *node = Value::Object(Default::default());
            } else {
                return Err(Error::config(parts[..i].join("."), "not an object"));
            }
        }
        let map = node.as_object_mut().expect("object");
        if i + 1 == parts.len() {
            map.insert(part.to_string(), value);
            return Ok(());
        }
        node = map.entry(part.to_string()).or_insert(Value::Null);
    }
    unreachable!("key has at least one part")
}
