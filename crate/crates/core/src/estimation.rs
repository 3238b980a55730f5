//! Inner-product and operator-expectation estimators with exact, finite-shot
//! and noisy backends.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::circuit::{Angle, Circuit, Gate};
use crate::error::{Error, Result};
use crate::poisson::Decomposition;
use crate::rng::derive_seed;
use crate::sim::{marginalize, sample_counts, sample_counts_noisy, Counts, NoiseParams, StateVector};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Infinite-shot expectation values.
    #[default]
    Exact,
    /// Finite sampling from the ideal state.
    Shots,
    /// Finite sampling with trajectory noise.
    Noisy,
}

/// How `shots` is spread over the circuits of a multi-term estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShotAllocation {
    /// Every circuit gets `shots`.
    #[default]
    PerCircuit,
    /// `shots` is split evenly across circuits (at least one each).
    Total,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    pub mode: Mode,
    pub shots: u64,
    pub seed: u64,
    pub noise: Option<NoiseParams>,
    pub allocation: ShotAllocation,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            mode: Mode::Exact,
            shots: 1000,
            seed: 0,
            noise: None,
            allocation: ShotAllocation::PerCircuit,
        }
    }
}

impl EstimatorConfig {
    pub fn exact() -> Self {
        Self::default()
    }

    pub fn shots(shots: u64, seed: u64) -> Self {
        EstimatorConfig {
            mode: Mode::Shots,
            shots,
            seed,
            ..Self::default()
        }
    }

    pub fn noisy(shots: u64, seed: u64, noise: NoiseParams) -> Self {
        EstimatorConfig {
            mode: Mode::Noisy,
            shots,
            seed,
            noise: Some(noise),
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn is_exact(&self) -> bool {
        self.mode == Mode::Exact
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode != Mode::Exact && self.shots == 0 {
            return Err(Error::config("estimator.shots", "shots must be at least 1"));
        }
        if let Some(noise) = &self.noise {
            noise.validate()?;
        }
        if self.mode == Mode::Noisy && self.noise.is_none() {
            return Err(Error::config("estimator.noise", "noisy mode needs noise parameters"));
        }
        Ok(())
    }

    /// Shots given to each of `circuits` circuits.
    pub fn shots_per_circuit(&self, circuits: usize) -> u64 {
        match self.allocation {
            ShotAllocation::PerCircuit => self.shots,
            ShotAllocation::Total => (self.shots / circuits.max(1) as u64).max(1),
        }
    }
}

/// Measure all qubits after `prep` then `post`. `prepared` may hold `prep`'s
/// ideal output to skip re-simulation in the noiseless case.
fn counts_after(
    cfg: &EstimatorConfig,
    prep: &Circuit,
    params: &[f64],
    prepared: Option<&StateVector>,
    post: &Circuit,
    shots: u64,
    seed: u64,
) -> Result<Counts> {
    match cfg.mode {
        Mode::Noisy => {
            let mut full = prep.widened(prep.n_qubits().max(post.n_qubits()))?;
            full.append(post)?;
            sample_counts_noisy(&full, params, shots, seed, &cfg.noise.unwrap_or_default())
        }
        _ => {
            let mut s = match prepared {
                Some(s) => s.clone(),
                None => StateVector::prepare(prep, params)?,
            };
            s.apply_circuit(post, &[])?;
            sample_counts(&s, shots, seed)
        }
    }
}

fn check_same_register(ansatz: &Circuit, rhs: &Circuit) -> Result<()> {
    if ansatz.n_qubits() != rhs.n_qubits() {
        return Err(Error::config(
            "problem",
            format!("ansatz acts on {} qubits, rhs on {}", ansatz.n_qubits(), rhs.n_qubits()),
        ));
    }
    Ok(())
}

/// Ancilla (qubit `n`) circuit whose `P(0) - P(1)` is `Re<f|psi>`, or
/// `Im<f|psi>` when `imaginary` is set.
pub fn hadamard_test_circuit(ansatz: &Circuit, rhs: &Circuit, imaginary: bool) -> Result<Circuit> {
    check_same_register(ansatz, rhs)?;
    let n = ansatz.n_qubits();
    let mut c = Circuit::with_params(n + 1, ansatz.n_params());
    c.push(Gate::h(n))?;
    if imaginary {
        c.push(Gate::rz(n, Angle::Fixed(-FRAC_PI_2)))?;
    }
    c.append(&ansatz.controlled())?;
    c.push(Gate::x(n))?;
    c.append(&rhs.controlled())?;
    c.push(Gate::h(n))?;
    Ok(c)
}

fn hadamard_test(ansatz: &Circuit, rhs: &Circuit, params: &[f64], cfg: &EstimatorConfig, imaginary: bool) -> Result<f64> {
    cfg.validate()?;
    let circ = hadamard_test_circuit(ansatz, rhs, imaginary)?;
    let n = ansatz.n_qubits();
    if cfg.is_exact() {
        let s = StateVector::prepare(&circ, params)?;
        let ancilla = 1usize << n;
        return Ok(s
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(i, a)| if i & ancilla == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum());
    }
    let counts = counts_after(cfg, &circ, params, None, &Circuit::new(n + 1), cfg.shots, cfg.seed)?;
    let anc = marginalize(&counts, &[n])?;
    Ok((anc.get(0) as f64 - anc.get(1) as f64) / anc.shots() as f64)
}

/// Estimate of `Re<f|psi(theta)>`.
pub fn hadamard_test_re(ansatz: &Circuit, rhs: &Circuit, params: &[f64], cfg: &EstimatorConfig) -> Result<f64> {
    hadamard_test(ansatz, rhs, params, cfg, false)
}

/// Estimate of `Im<f|psi(theta)>`.
pub fn hadamard_test_im(ansatz: &Circuit, rhs: &Circuit, params: &[f64], cfg: &EstimatorConfig) -> Result<f64> {
    hadamard_test(ansatz, rhs, params, cfg, true)
}

/// `U(theta)` followed by `U_f^dagger`.
pub fn overlap_circuit(ansatz: &Circuit, rhs: &Circuit) -> Result<Circuit> {
    check_same_register(ansatz, rhs)?;
    let mut c = ansatz.clone();
    c.append(&rhs.inverse())?;
    Ok(c)
}

/// Estimate of `|<f|psi(theta)>|^2` as the all-zeros frequency. Only meaningful
/// for real-amplitude states.
pub fn overlap_test(ansatz: &Circuit, rhs: &Circuit, params: &[f64], cfg: &EstimatorConfig) -> Result<f64> {
    cfg.validate()?;
    let circ = overlap_circuit(ansatz, rhs)?;
    if cfg.is_exact() {
        let s = StateVector::prepare(&circ, params)?;
        return Ok(s.amplitudes()[0].norm_sqr());
    }
    let counts = counts_after(cfg, &circ, params, None, &Circuit::new(circ.n_qubits()), cfg.shots, cfg.seed)?;
    Ok(counts.frequency(0))
}

/// Per-term estimates of a decomposition; `result[k]` is the mean eigenvalue of term `k`.
pub fn term_means(ansatz: &Circuit, params: &[f64], decomposition: &Decomposition, cfg: &EstimatorConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    if decomposition.n != ansatz.n_qubits() {
        return Err(Error::config(
            "estimator.method",
            format!("decomposition is for {} qubits, ansatz has {}", decomposition.n, ansatz.n_qubits()),
        ));
    }
    let psi = if cfg.mode == Mode::Noisy {
        None
    } else {
        Some(StateVector::prepare(ansatz, params)?)
    };
    let shots = cfg.shots_per_circuit(decomposition.terms.len());
    decomposition
        .terms
        .iter()
        .enumerate()
        .map(|(k, t)| match (&psi, cfg.mode) {
            (Some(s), Mode::Exact) => s.exact_expectation(&t.circuit, &t.eigmap),
            _ => {
                let seed = derive_seed(cfg.seed, k as u64);
                let counts = counts_after(cfg, ansatz, params, psi.as_ref(), &t.circuit, shots, seed)?;
                Ok(counts.mean(&t.eigmap))
            }
        })
        .collect()
}

/// Estimate of `<psi(theta)|A|psi(theta)>`.
pub fn expval_a(ansatz: &Circuit, params: &[f64], decomposition: &Decomposition, cfg: &EstimatorConfig) -> Result<f64> {
    let means = term_means(ansatz, params, decomposition, cfg)?;
    Ok(decomposition.constant
        + decomposition
            .terms
            .iter()
            .zip(&means)
            .map(|(t, m)| t.coefficient * m)
            .sum::<f64>())
}

/// Reflection `I - 2|0><0|` on `n` qubits.
pub fn zero_reflection(n: usize) -> Circuit {
    let mut c = Circuit::new(n);
    let top = n - 1;
    for q in 0..n {
        c.add(Gate::x(q));
    }
    c.add(Gate::h(top));
    let controls: Vec<usize> = (0..top).collect();
    c.add(Gate::mcx(&controls, top));
    c.add(Gate::h(top));
    for q in 0..n {
        c.add(Gate::x(q));
    }
    c
}

/// `B Q^m |0>` with `B = U_f^dagger U(theta)` and `Q = B S_0 B^dagger S_0`.
pub fn grover_circuit(ansatz: &Circuit, rhs: &Circuit, power: usize) -> Result<Circuit> {
    let b = overlap_circuit(ansatz, rhs)?;
    let b_dag = b.inverse();
    let s0 = zero_reflection(ansatz.n_qubits());
    let mut c = b.clone();
    for _ in 0..power {
        c.append(&s0)?;
        c.append(&b_dag)?;
        c.append(&s0)?;
        c.append(&b)?;
    }
    Ok(c)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlqaeConfig {
    /// Grover powers `m`; must be nonempty and nondecreasing.
    pub powers: Vec<usize>,
    /// Likelihood grid points on `[0, 1]`.
    pub grid_points: usize,
}

impl Default for MlqaeConfig {
    fn default() -> Self {
        MlqaeConfig {
            powers: vec![0, 1, 2, 4],
            grid_points: 10_000,
        }
    }
}

impl MlqaeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.powers.is_empty() {
            return Err(Error::config("mlqae.powers", "at least one power is required"));
        }
        if self.powers.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::config("mlqae.powers", "powers must be nondecreasing"));
        }
        if self.grid_points < 2 {
            return Err(Error::config("mlqae.grid_points", "need at least 2 grid points"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MlqaeResult {
    pub estimate: f64,
    /// `(power, good outcomes, shots)` per circuit.
    pub hits: Vec<(usize, u64, u64)>,
}

/// Maximum-likelihood amplitude estimate of `|<f|psi(theta)>|^2` from Grover
/// powers `m`, each run with `cfg.shots` shots.
pub fn mlqae_overlap(
    ansatz: &Circuit,
    rhs: &Circuit,
    params: &[f64],
    mlqae: &MlqaeConfig,
    cfg: &EstimatorConfig,
) -> Result<MlqaeResult> {
    mlqae.validate()?;
    cfg.validate()?;
    if cfg.is_exact() {
        let a = overlap_test(ansatz, rhs, params, cfg)?;
        return Ok(MlqaeResult { estimate: a, hits: Vec::new() });
    }
    let mut hits = Vec::with_capacity(mlqae.powers.len());
    for (k, &m) in mlqae.powers.iter().enumerate() {
        let circ = grover_circuit(ansatz, rhs, m)?;
        let seed = derive_seed(cfg.seed, k as u64);
        let counts = counts_after(cfg, &circ, params, None, &Circuit::new(circ.n_qubits()), cfg.shots, seed)?;
        hits.push((m, counts.get(0), counts.shots()));
    }
    let estimate = mlqae_estimate(&hits, mlqae.grid_points);
    Ok(MlqaeResult { estimate, hits })
}

/// Log-likelihood of amplitude `a` given `(power, good, shots)` observations.
pub fn mlqae_log_likelihood(a: f64, hits: &[(usize, u64, u64)]) -> f64 {
    let phi = a.clamp(0.0, 1.0).sqrt().asin();
    hits.iter()
        .map(|&(m, good, shots)| {
            let p = ((2 * m + 1) as f64 * phi).sin().powi(2);
            let bad = shots - good;
            let mut ll = 0.0;
            if good > 0 {
                ll += good as f64 * p.max(1e-300).ln();
            }
            if bad > 0 {
                ll += bad as f64 * (1.0 - p).max(1e-300).ln();
            }
            ll
        })
        .sum()
}

/// Grid argmax of the likelihood followed by a golden-section refinement
/// within the neighbouring grid cells.
pub fn mlqae_estimate(hits: &[(usize, u64, u64)], grid_points: usize) -> f64 {
    let step = 1.0 / (grid_points - 1) as f64;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for i in 0..grid_points {
        let a = i as f64 * step;
        let ll = mlqae_log_likelihood(a, hits);
        if ll > best.0 {
            best = (ll, a);
        }
    }
    let (mut lo, mut hi) = ((best.1 - step).max(0.0), (best.1 + step).min(1.0));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (mlqae_log_likelihood(x1, hits), mlqae_log_likelihood(x2, hits));
    for _ in 0..60 {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = mlqae_log_likelihood(x1, hits);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = mlqae_log_likelihood(x2, hits);
        }
    }
    let refined = 0.5 * (lo + hi);
    if mlqae_log_likelihood(refined, hits) >= best.0 {
        refined
    } else {
        best.1
    }
}

/// `|est - exact| / max(|exact|, 1e-12)`.
pub fn relative_error(estimate: f64, exact: f64) -> f64 {
    (estimate - exact).abs() / exact.abs().max(1e-12)
}
