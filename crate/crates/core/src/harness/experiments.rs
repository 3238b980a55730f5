use std::f64::consts::TAU;

use rand::Rng as _;

use super::config::{ExperimentConfig, ExperimentKind, InnerProductEstimator};
use super::report::{describe, parse_f64, summarize_groups, Table};
use crate::error::Result;
use crate::estimation::{
    expval_a, hadamard_test_re, mlqae_overlap, overlap_test, relative_error, EstimatorConfig, Mode,
};
use crate::optimize::train_run;
use crate::poisson::{decomposition, Decomposition};
use crate::rng::{derive_path, rng_from_seed};
use crate::sim::{sample_counts, sample_counts_noisy};
use crate::vqls::{cosine_similarity, fmt_f64, optimal_scale, CostKind, GradientMethod, Problem};

const TAG_SAMPLE: u64 = 0x7361_6d70;
const TAG_DIRECTION: u64 = 0x6469_7265;
const TAG_SHOTS: u64 = 0x7368_6f74;

/// Raw-table columns of each experiment; the first column is the unit index
/// used for resuming.
pub fn raw_header(kind: ExperimentKind) -> &'static [&'static str] {
    match kind {
        ExperimentKind::Train => &["run", "eval_index", "cost_est", "cost_exact", "fidelity", "flags"],
        ExperimentKind::SampleFidelity => &["sample", "shots", "fidelity"],
        ExperimentKind::InnerpError => &["sample", "estimator", "shots", "estimate", "exact", "rel_error"],
        ExperimentKind::OpError => &["sample", "method", "shots", "estimate", "exact", "rel_error"],
        ExperimentKind::CostVariation => &["base", "quantity", "direction", "step", "shots", "value"],
        ExperimentKind::GradSimilarity => &["sample", "shots", "cosine"],
    }
}

/// Number of resumable units: runs, samples or base points.
pub fn unit_count(cfg: &ExperimentConfig) -> usize {
    match cfg.experiment {
        ExperimentKind::Train => cfg.optimizer.starts,
        ExperimentKind::CostVariation => cfg.sampling.bases,
        _ => cfg.sampling.samples,
    }
}

/// Everything an experiment needs that is built once per run.
pub struct Context {
    pub cfg: ExperimentConfig,
    pub problem: Problem,
    decompositions: Vec<Decomposition>,
}

impl Context {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let problem = Problem::new(&cfg.problem, cfg.method)?;
        let decompositions = if cfg.experiment == ExperimentKind::OpError {
            cfg.sampling
                .methods
                .iter()
                .map(|&m| decomposition(m, cfg.problem.n, cfg.problem.h))
                .collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        if cfg.experiment == ExperimentKind::InnerpError
            && !cfg.problem.family.is_real()
            && cfg.sampling.estimators.iter().any(|e| *e != InnerProductEstimator::Hadamard)
        {
            log::warn!(
                "{} prepares complex amplitudes; overlap-based estimates assume real states",
                cfg.problem.family.name()
            );
        }
        Ok(Context {
            cfg: cfg.clone(),
            problem,
            decompositions,
        })
    }

    /// Rows of unit `u`.
    pub fn run_unit(&self, u: usize) -> Result<Vec<Vec<String>>> {
        match self.cfg.experiment {
            ExperimentKind::Train => self.train(u),
            ExperimentKind::SampleFidelity => self.sample_fidelity(u),
            ExperimentKind::InnerpError => self.innerp_error(u),
            ExperimentKind::OpError => self.op_error(u),
            ExperimentKind::CostVariation => self.cost_variation(u),
            ExperimentKind::GradSimilarity => self.grad_similarity(u),
        }
    }

    /// Random circuit angles of sample `u`, uniform in `[0, 2 pi)`.
    fn sample_theta(&self, u: usize) -> Vec<f64> {
        let mut rng = rng_from_seed(derive_path(self.cfg.seed, &[TAG_SAMPLE, u as u64]));
        (0..self.problem.n_params()).map(|_| rng.random::<f64>() * TAU).collect()
    }

    /// Angles plus, for `CNN`, the optimal scale at those angles.
    fn sample_point(&self, u: usize) -> Result<Vec<f64>> {
        let mut x = self.sample_theta(u);
        if self.cfg.cost == CostKind::CNN {
            let t = self.problem.terms_exact(&self.problem.state(&x)?);
            x.push(optimal_scale(t));
        }
        Ok(x)
    }

    /// Estimator with `shots` shots for unit `u`; noise is kept when configured.
    fn shot_cfg(&self, shots: u64, u: usize, stream: u64) -> EstimatorConfig {
        let base = &self.cfg.estimator;
        EstimatorConfig {
            mode: if base.mode == Mode::Noisy { Mode::Noisy } else { Mode::Shots },
            shots,
            seed: derive_path(base.seed, &[TAG_SHOTS, u as u64, stream, shots]),
            ..*base
        }
    }

    fn train(&self, k: usize) -> Result<Vec<Vec<String>>> {
        let c = &self.cfg;
        let run = train_run(&self.problem, c.cost, &c.estimator, &c.optimizer, k)?;
        Ok(run
            .trace
            .iter()
            .map(|r| {
                vec![
                    k.to_string(),
                    r.eval_index.to_string(),
                    fmt_f64(r.cost_est),
                    fmt_f64(r.cost_exact),
                    fmt_f64(r.fidelity),
                    r.flags.to_string(),
                ]
            })
            .collect())
    }

    /// Hellinger fidelity `(sum_b sqrt(p_b q_b))^2` between the sampled and
    /// exact output distributions of the ansatz.
    fn sample_fidelity(&self, u: usize) -> Result<Vec<Vec<String>>> {
        let theta = self.sample_theta(u);
        let psi = self.problem.state(&theta)?;
        let probs = psi.probabilities();
        let mut rows = Vec::new();
        for (j, &shots) in self.cfg.sampling.shots.iter().enumerate() {
            let sc = self.shot_cfg(shots, u, j as u64);
            let counts = match (sc.mode, sc.noise) {
                (Mode::Noisy, Some(noise)) => sample_counts_noisy(&self.problem.ansatz, &theta, shots, sc.seed, &noise)?,
                _ => sample_counts(&psi, shots, sc.seed)?,
            };
            let bc: f64 = counts
                .iter()
                .map(|(b, c)| (probs[b as usize] * c as f64 / shots as f64).sqrt())
                .sum();
            rows.push(vec![u.to_string(), shots.to_string(), fmt_f64(bc * bc)]);
        }
        Ok(rows)
    }

    fn innerp_error(&self, u: usize) -> Result<Vec<Vec<String>>> {
        let p = &self.problem;
        let theta = self.sample_theta(u);
        let overlap = p.rhs_state().inner(&p.state(&theta)?);
        let mut rows = Vec::new();
        for (i, &est) in self.cfg.sampling.estimators.iter().enumerate() {
            for (j, &shots) in self.cfg.sampling.shots.iter().enumerate() {
                let sc = self.shot_cfg(shots, u, (i * 1000 + j) as u64);
                let (estimate, exact) = match est {
                    InnerProductEstimator::Hadamard => (hadamard_test_re(&p.ansatz, &p.rhs, &theta, &sc)?, overlap.re),
                    InnerProductEstimator::Overlap => (overlap_test(&p.ansatz, &p.rhs, &theta, &sc)?, overlap.norm_sqr()),
                    InnerProductEstimator::Mlqae => {
                        // equal total shots: the budget is split across the powers
                        let per_power = (shots / self.cfg.mlqae.powers.len() as u64).max(1);
                        let sc = EstimatorConfig { shots: per_power, ..sc };
                        let r = mlqae_overlap(&p.ansatz, &p.rhs, &theta, &self.cfg.mlqae, &sc)?;
                        (r.estimate, overlap.norm_sqr())
                    }
                };
                rows.push(vec![
                    u.to_string(),
                    est.name().to_string(),
                    shots.to_string(),
                    fmt_f64(estimate),
                    fmt_f64(exact),
                    fmt_f64(relative_error(estimate, exact)),
                ]);
            }
        }
        Ok(rows)
    }

    fn op_error(&self, u: usize) -> Result<Vec<Vec<String>>> {
        let p = &self.problem;
        let theta = self.sample_theta(u);
        let exact = p.system.quadratic_form(p.state(&theta)?.amplitudes());
        let mut rows = Vec::new();
        for (i, d) in self.decompositions.iter().enumerate() {
            for (j, &shots) in self.cfg.sampling.shots.iter().enumerate() {
                let sc = self.shot_cfg(shots, u, (i * 1000 + j) as u64);
                let estimate = expval_a(&p.ansatz, &theta, d, &sc)?;
                rows.push(vec![
                    u.to_string(),
                    d.method.name().to_string(),
                    shots.to_string(),
                    fmt_f64(estimate),
                    fmt_f64(exact),
                    fmt_f64(relative_error(estimate, exact)),
                ]);
            }
        }
        Ok(rows)
    }

    /// `|C(theta) - C(theta + step * delta)|` for every direction and step,
    /// plus `|C_est(theta) - C(theta)|` for every shot count. Directions act
    /// on the circuit angles only; the `CNN` scale stays fixed.
    fn cost_variation(&self, b: usize) -> Result<Vec<Vec<String>>> {
        let p = &self.problem;
        let s = &self.cfg.sampling;
        let kind = self.cfg.cost;
        let base = self.sample_point(b)?;
        let c0 = p.cost_exact(kind, &base)?;
        let mut rows = Vec::new();
        let directions: Vec<Vec<f64>> = (0..s.directions).map(|d| self.direction(b, d)).collect();
        for &step in &s.steps {
            for (d, delta) in directions.iter().enumerate() {
                let mut x = base.clone();
                x.iter_mut().zip(delta).for_each(|(xi, di)| *xi += step * di);
                let var = (c0 - p.cost_exact(kind, &x)?).abs();
                rows.push(vec![
                    b.to_string(),
                    "variation".into(),
                    d.to_string(),
                    fmt_f64(step),
                    String::new(),
                    fmt_f64(var),
                ]);
            }
        }
        for (j, &shots) in s.shots.iter().enumerate() {
            let est = p.cost(kind, &base, &self.shot_cfg(shots, b, j as u64))?.value;
            rows.push(vec![
                b.to_string(),
                "estimation_error".into(),
                String::new(),
                String::new(),
                shots.to_string(),
                fmt_f64((est - c0).abs()),
            ]);
        }
        Ok(rows)
    }

    /// Perturbation `delta` number `d` around base point `b`: circuit angles
    /// uniform in `[-range, range]`; a `CNN` scale is left unperturbed.
    pub fn direction(&self, b: usize, d: usize) -> Vec<f64> {
        let range = self.cfg.sampling.direction_range;
        let mut rng = rng_from_seed(derive_path(self.cfg.seed, &[TAG_DIRECTION, b as u64, d as u64]));
        (0..self.problem.n_params())
            .map(|_| rng.random_range(-range..=range))
            .collect()
    }

    fn grad_similarity(&self, u: usize) -> Result<Vec<Vec<String>>> {
        let p = &self.problem;
        let kind = self.cfg.cost;
        let x = self.sample_point(u)?;
        let exact = p.gradient_with(kind, &x, &EstimatorConfig::exact(), GradientMethod::Adjoint)?;
        let mut rows = Vec::new();
        for (j, &shots) in self.cfg.sampling.shots.iter().enumerate() {
            let est = p.gradient_shift(kind, &x, &self.shot_cfg(shots, u, j as u64))?;
            // undefined when the estimate vanishes, e.g. a Hadamard test with an even split
            let cosine = cosine_similarity(&est, &exact).unwrap_or(f64::NAN);
            rows.push(vec![u.to_string(), shots.to_string(), fmt_f64(cosine)]);
        }
        Ok(rows)
    }
}

/// Summary table computed from the raw table alone.
pub fn summarize(cfg: &ExperimentConfig, raw: &Table) -> Result<Table> {
    let q = &cfg.sampling.percentiles;
    match cfg.experiment {
        ExperimentKind::Train => summarize_train(raw, q),
        ExperimentKind::SampleFidelity => summarize_groups(raw, &["shots"], "fidelity", q),
        ExperimentKind::InnerpError => summarize_groups(raw, &["estimator", "shots"], "rel_error", q),
        ExperimentKind::OpError => summarize_groups(raw, &["method", "shots"], "rel_error", q),
        ExperimentKind::CostVariation => summarize_groups(raw, &["quantity", "step", "shots"], "value", q),
        ExperimentKind::GradSimilarity => summarize_groups(raw, &["shots"], "cosine", q),
    }
}

/// Per run: evaluation count, smallest estimated cost, the fidelity and
/// exact cost at that evaluation, and the final fidelity. Then the best run
/// and statistics of the per-run best fidelities.
fn summarize_train(raw: &Table, percentiles: &[f64]) -> Result<Table> {
    let [run, idx, est, exact, fid] = ["run", "eval_index", "cost_est", "cost_exact", "fidelity"].map(|c| raw.column(c));
    let (run, idx, est, exact, fid) = (run?, idx?, est?, exact?, fid?);
    struct RunStats {
        id: String,
        evals: usize,
        best: (f64, String, f64, f64),
        last_fidelity: f64,
    }
    let mut runs: Vec<RunStats> = Vec::new();
    for (i, row) in raw.rows.iter().enumerate() {
        let line = i + 2;
        let (c, f, ce) = (parse_f64(&row[est], line)?, parse_f64(&row[fid], line)?, parse_f64(&row[exact], line)?);
        if runs.last().map_or(true, |r| r.id != row[run]) {
            runs.push(RunStats {
                id: row[run].clone(),
                evals: 0,
                best: (f64::INFINITY, String::new(), f64::NAN, f64::NAN),
                last_fidelity: f64::NAN,
            });
        }
        let r = runs.last_mut().expect("just pushed");
        r.evals += 1;
        r.last_fidelity = f;
        if c < r.best.0 {
            r.best = (c, row[idx].clone(), ce, f);
        }
    }
    let mut out = Table::new(&["group", "statistic", "value"]);
    let mut push = |g: &str, s: &str, v: String| out.rows.push(vec![g.to_string(), s.to_string(), v]);
    for r in &runs {
        let g = format!("run={}", r.id);
        push(&g, "n_evals", r.evals.to_string());
        push(&g, "best_cost", fmt_f64(r.best.0));
        push(&g, "best_eval_index", r.best.1.clone());
        push(&g, "best_cost_exact", fmt_f64(r.best.2));
        push(&g, "best_fidelity", fmt_f64(r.best.3));
        push(&g, "final_fidelity", fmt_f64(r.last_fidelity));
    }
    if let Some(best) = runs.iter().min_by(|a, b| a.best.0.total_cmp(&b.best.0)) {
        push("best", "run", best.id.clone());
        push("best", "best_cost", fmt_f64(best.best.0));
        push("best", "best_fidelity", fmt_f64(best.best.3));
        let fids: Vec<f64> = runs.iter().map(|r| r.best.3).collect();
        for (s, v) in describe(&fids, percentiles)? {
            push("runs", &format!("best_fidelity_{s}"), v);
        }
    }
    Ok(out)
}

/// Convenience for tests: the raw table of one experiment computed in memory.
pub fn run_in_memory(cfg: &ExperimentConfig) -> Result<(Table, Table)> {
    let ctx = Context::new(cfg)?;
    let mut raw = Table::new(raw_header(cfg.experiment));
    for u in 0..unit_count(cfg) {
        raw.rows.extend(ctx.run_unit(u)?);
    }
    let summary = summarize(cfg, &raw)?;
    Ok((raw, summary))
}
