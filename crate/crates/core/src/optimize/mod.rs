//! Classical optimizers with full evaluation tracing.

mod bfgs;
mod nft;
mod powell;
mod spsa;

use std::f64::consts::TAU;
use std::fmt;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

pub use bfgs::BfgsConfig;
pub use nft::NftConfig;
pub use powell::PowellConfig;
pub use spsa::SpsaConfig;

use crate::error::{Error, Result};
use crate::estimation::EstimatorConfig;
use crate::rng::{derive_path, derive_seed, rng_from_seed};
use crate::vqls::{CostEvalRecord, CostKind, Flags, GradientMethod, Problem};

/// Result of one cost evaluation as seen by an optimizer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    /// The (possibly noisy) value the optimizer works with.
    pub value: f64,
    /// Noise-free cost at the same point, when known.
    pub exact: Option<f64>,
    /// Solution fidelity at the same point, when known.
    pub fidelity: Option<f64>,
    pub flags: Flags,
}

impl Evaluation {
    pub fn plain(value: f64) -> Self {
        Evaluation {
            value,
            exact: None,
            fidelity: None,
            flags: Flags::default(),
        }
    }
}

pub trait Objective {
    fn dim(&self) -> usize;

    fn evaluate(&mut self, x: &[f64]) -> Result<Evaluation>;

    /// `None` when the objective has no gradient.
    fn gradient(&mut self, _x: &[f64]) -> Result<Option<Vec<f64>>> {
        Ok(None)
    }

    /// Whether repeated evaluations at one point can differ.
    fn is_stochastic(&self) -> bool {
        false
    }
}

/// Plain closure objective, handy for tests and benchmarks.
pub struct FnObjective<F, G> {
    pub dim: usize,
    pub f: F,
    pub grad: Option<G>,
}

impl<F, G> Objective for FnObjective<F, G>
where
    F: FnMut(&[f64]) -> f64,
    G: FnMut(&[f64]) -> Vec<f64>,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<Evaluation> {
        Ok(Evaluation::plain((self.f)(x)))
    }

    fn gradient(&mut self, x: &[f64]) -> Result<Option<Vec<f64>>> {
        Ok(self.grad.as_mut().map(|g| g(x)))
    }
}

/// Cost function of a [`Problem`] as an optimizer objective. Every evaluation
/// draws a fresh sub-seed, so reruns with the same seed give the same trace.
pub struct VqlsObjective<'a> {
    pub problem: &'a Problem,
    pub kind: CostKind,
    pub estimator: EstimatorConfig,
    pub gradient_method: GradientMethod,
    calls: u64,
    /// Circuits executed so far (shot backends), using the problem's circuit counts.
    pub circuits: u64,
}

impl<'a> VqlsObjective<'a> {
    pub fn new(problem: &'a Problem, kind: CostKind, estimator: EstimatorConfig) -> Self {
        VqlsObjective {
            problem,
            kind,
            estimator,
            gradient_method: GradientMethod::Auto,
            calls: 0,
            circuits: 0,
        }
    }

    fn next_cfg(&mut self) -> EstimatorConfig {
        let cfg = self.estimator.with_seed(derive_seed(self.estimator.seed, self.calls));
        self.calls += 1;
        cfg
    }
}

impl Objective for VqlsObjective<'_> {
    fn dim(&self) -> usize {
        self.problem.dim(self.kind)
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<Evaluation> {
        let cfg = self.next_cfg();
        let est = self.problem.cost(self.kind, x, &cfg)?;
        let exact = if cfg.is_exact() {
            est.value
        } else {
            self.circuits += self.problem.circuit_counts().0 as u64;
            self.problem.cost_exact(self.kind, x)?
        };
        Ok(Evaluation {
            value: est.value,
            exact: Some(exact),
            fidelity: Some(self.problem.fidelity(x)?),
            flags: est.flags,
        })
    }

    fn gradient(&mut self, x: &[f64]) -> Result<Option<Vec<f64>>> {
        let cfg = self.next_cfg();
        if !cfg.is_exact() {
            self.circuits += self.problem.gradient_circuits() as u64;
        }
        self.problem
            .gradient_with(self.kind, x, &cfg, self.gradient_method)
            .map(Some)
    }

    fn is_stochastic(&self) -> bool {
        !self.estimator.is_exact()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerMethod {
    Bfgs,
    Spsa,
    Powell,
    Nft,
}

impl OptimizerMethod {
    pub fn name(self) -> &'static str {
        match self {
            OptimizerMethod::Bfgs => "bfgs",
            OptimizerMethod::Spsa => "spsa",
            OptimizerMethod::Powell => "powell",
            OptimizerMethod::Nft => "nft",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub method: OptimizerMethod,
    /// Cost-evaluation budget per run.
    pub max_evals: usize,
    /// Number of multistart runs.
    pub starts: usize,
    pub seed: u64,
    /// Initial value of the `CNN` scale variable.
    pub initial_scale: f64,
    pub bfgs: BfgsConfig,
    pub spsa: SpsaConfig,
    pub powell: PowellConfig,
    pub nft: NftConfig,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            method: OptimizerMethod::Bfgs,
            max_evals: 5000,
            starts: 15,
            seed: 0,
            initial_scale: 1.0,
            bfgs: BfgsConfig::default(),
            spsa: SpsaConfig::default(),
            powell: PowellConfig::default(),
            nft: NftConfig::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_evals == 0 {
            return Err(Error::config("optimizer.max_evals", "must be at least 1"));
        }
        if self.starts == 0 {
            return Err(Error::config("optimizer.starts", "must be at least 1"));
        }
        self.spsa.validate()?;
        self.nft.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    MaxEvals,
    MaxIterations,
    Converged,
    LineSearchFailed,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::MaxEvals => "max-evals",
            Termination::MaxIterations => "max-iterations",
            Termination::Converged => "converged",
            Termination::LineSearchFailed => "line-search-failed",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub method: OptimizerMethod,
    pub best_params: Vec<f64>,
    pub best_cost: f64,
    pub trace: Vec<CostEvalRecord>,
    pub termination: Termination,
    pub n_gradients: usize,
}

impl RunResult {
    /// Record with the smallest estimated cost.
    pub fn best_record(&self) -> Option<&CostEvalRecord> {
        self.trace
            .iter()
            .min_by(|a, b| a.cost_est.total_cmp(&b.cost_est))
    }

    /// Fidelity at the best recorded point.
    pub fn best_fidelity(&self) -> f64 {
        self.best_record().map_or(f64::NAN, |r| r.fidelity)
    }

    pub fn trace_csv(&self) -> String {
        let mut s = String::from(CostEvalRecord::CSV_HEADER);
        s.push('\n');
        for r in &self.trace {
            s.push_str(&r.csv_row());
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "method": self.method.name(),
            "best_cost": self.best_cost,
            "best_fidelity": self.best_fidelity(),
            "best_params": self.best_params,
            "termination": self.termination.to_string(),
            "n_evals": self.trace.len(),
            "n_gradients": self.n_gradients,
            "trace_csv": self.trace_csv(),
        })
    }
}

/// Why an optimizer loop stopped early.
pub(crate) enum Halt {
    Budget,
    Fail(Error),
}

impl From<Error> for Halt {
    fn from(e: Error) -> Self {
        Halt::Fail(e)
    }
}

pub(crate) type Step<T> = std::result::Result<T, Halt>;

/// Wraps an objective, enforcing the evaluation budget and recording every call.
pub(crate) struct Tracker<'o> {
    obj: &'o mut dyn Objective,
    max_evals: usize,
    pub trace: Vec<CostEvalRecord>,
    pub n_gradients: usize,
}

impl<'o> Tracker<'o> {
    pub fn new(obj: &'o mut dyn Objective, max_evals: usize) -> Self {
        Tracker {
            obj,
            max_evals,
            trace: Vec::new(),
            n_gradients: 0,
        }
    }

    pub fn stochastic(&self) -> bool {
        self.obj.is_stochastic()
    }

    pub fn eval(&mut self, x: &[f64]) -> Step<f64> {
        if self.trace.len() >= self.max_evals {
            return Err(Halt::Budget);
        }
        let e = self.obj.evaluate(x)?;
        self.trace.push(CostEvalRecord {
            eval_index: self.trace.len(),
            params: x.to_vec(),
            cost_est: e.value,
            cost_exact: e.exact.unwrap_or(f64::NAN),
            fidelity: e.fidelity.unwrap_or(f64::NAN),
            flags: e.flags,
        });
        Ok(e.value)
    }

    pub fn gradient(&mut self, x: &[f64]) -> Step<Vec<f64>> {
        self.n_gradients += 1;
        self.obj
            .gradient(x)?
            .ok_or_else(|| Halt::Fail(Error::config("optimizer.method", "this method needs a gradient")))
    }

    fn finish(self, method: OptimizerMethod, termination: Termination) -> RunResult {
        let (best_params, best_cost) = self
            .trace
            .iter()
            .min_by(|a, b| a.cost_est.total_cmp(&b.cost_est))
            .map(|r| (r.params.clone(), r.cost_est))
            .unwrap_or_default();
        RunResult {
            method,
            best_params,
            best_cost,
            trace: self.trace,
            termination,
            n_gradients: self.n_gradients,
        }
    }
}

/// Minimize `obj` from `x0`. `seed` drives the optimizer's own randomness (SPSA).
pub fn minimize(obj: &mut dyn Objective, x0: &[f64], config: &OptimizerConfig, seed: u64) -> Result<RunResult> {
    config.validate()?;
    if x0.len() != obj.dim() {
        return Err(Error::config(
            "optimizer.x0",
            format!("initial point has {} entries, objective expects {}", x0.len(), obj.dim()),
        ));
    }
    let mut t = Tracker::new(obj, config.max_evals);
    let outcome = match config.method {
        OptimizerMethod::Bfgs => bfgs::run(&mut t, x0, &config.bfgs),
        OptimizerMethod::Spsa => spsa::run(&mut t, x0, &config.spsa, seed),
        OptimizerMethod::Powell => powell::run(&mut t, x0, &config.powell),
        OptimizerMethod::Nft => nft::run(&mut t, x0, &config.nft),
    };
    let termination = match outcome {
        Ok(reason) => reason,
        Err(Halt::Budget) => Termination::MaxEvals,
        Err(Halt::Fail(e)) => return Err(e),
    };
    Ok(t.finish(config.method, termination))
}

/// Initial point of run `k`: circuit angles uniform in `[0, 2 pi)`, followed by `extra`.
pub fn initial_point(master_seed: u64, k: usize, n_theta: usize, extra: &[f64]) -> Vec<f64> {
    let mut rng = rng_from_seed(derive_path(master_seed, &[0x696e_6974, k as u64]));
    let mut x: Vec<f64> = (0..n_theta).map(|_| rng.random::<f64>() * TAU).collect();
    x.extend_from_slice(extra);
    x
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiStart {
    pub runs: Vec<RunResult>,
    /// Index of the run with the smallest observed estimated cost.
    pub best: usize,
}

impl MultiStart {
    pub fn best_run(&self) -> &RunResult {
        &self.runs[self.best]
    }
}

/// Run `config.starts` independent optimizations. `make` builds the objective
/// for run `k` given that run's seed; `x0(k)` gives its initial point.
pub fn multistart<O, M, X>(mut make: M, mut x0: X, config: &OptimizerConfig) -> Result<MultiStart>
where
    O: Objective,
    M: FnMut(usize, u64) -> Result<O>,
    X: FnMut(usize) -> Vec<f64>,
{
    config.validate()?;
    let mut runs = Vec::with_capacity(config.starts);
    for k in 0..config.starts {
        let seed = derive_seed(config.seed, k as u64);
        let mut obj = make(k, seed)?;
        let start = x0(k);
        runs.push(minimize(&mut obj, &start, config, derive_seed(seed, 1))?);
        log::debug!(
            "run {k}: best cost {:.6e} after {} evaluations ({})",
            runs[k].best_cost,
            runs[k].trace.len(),
            runs[k].termination
        );
    }
    let best = runs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.best_cost.total_cmp(&b.1.best_cost))
        .map(|(i, _)| i)
        .unwrap_or(0);
    Ok(MultiStart { runs, best })
}

/// Multistart training of a VQLS cost.
pub fn train(problem: &Problem, kind: CostKind, estimator: &EstimatorConfig, config: &OptimizerConfig) -> Result<MultiStart> {
    config.validate()?;
    let runs = (0..config.starts)
        .map(|k| train_run(problem, kind, estimator, config, k))
        .collect::<Result<Vec<_>>>()?;
    let best = runs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.best_cost.total_cmp(&b.1.best_cost))
        .map(|(i, _)| i)
        .unwrap_or(0);
    Ok(MultiStart { runs, best })
}

/// Run `k` of [`train`] on its own, with the same seeds and initial point.
pub fn train_run(
    problem: &Problem,
    kind: CostKind,
    estimator: &EstimatorConfig,
    config: &OptimizerConfig,
    k: usize,
) -> Result<RunResult> {
    let extra: Vec<f64> = if kind == CostKind::CNN {
        vec![config.initial_scale]
    } else {
        Vec::new()
    };
    let seed = derive_seed(config.seed, k as u64);
    let mut obj = VqlsObjective::new(problem, kind, estimator.with_seed(derive_seed(estimator.seed ^ seed, 2)));
    let x0 = initial_point(config.seed, k, problem.n_params(), &extra);
    let run = minimize(&mut obj, &x0, config, derive_seed(seed, 1))?;
    log::debug!(
        "run {k}: best cost {:.6e} after {} evaluations ({})",
        run.best_cost,
        run.trace.len(),
        run.termination
    );
    Ok(run)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
