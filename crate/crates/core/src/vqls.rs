//! Cost functions, their gradients and solution-quality metrics.

use std::f64::consts::{FRAC_PI_2, SQRT_2};
use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::circuit::{build_ansatz, AnsatzFamily, Circuit, RhsKind, XPlacement};
use crate::error::{Error, Result};
use crate::estimation::{expval_a, hadamard_test_re, EstimatorConfig};
use crate::poisson::{decomposition, stiffness, Decomposition, Method, StiffnessSystem};
use crate::rng::{derive_path, derive_seed};
use crate::sim::StateVector;

/// Floor applied to `<psi|A|psi>` estimates in the denominator of `CN`.
pub const DENOMINATOR_FLOOR: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostKind {
    /// `-1/2 Re<f|psi>^2 / <psi|A|psi>`.
    CN,
    /// `1/2 s^4 <psi|A|psi> - s^2 Re<f|psi>`, with `s` appended to the parameters.
    CNN,
    /// Global projector cost `1 - |<f|A psi>|^2 / ||A psi||^2`.
    CG,
    /// Local projector cost averaging single-qubit projectors after `U_f^dagger`.
    CL,
}

impl CostKind {
    pub const ALL: [CostKind; 4] = [CostKind::CN, CostKind::CNN, CostKind::CG, CostKind::CL];

    pub fn name(self) -> &'static str {
        match self {
            CostKind::CN => "cn",
            CostKind::CNN => "cnn",
            CostKind::CG => "cg",
            CostKind::CL => "cl",
        }
    }

    /// Number of optimization variables beyond the circuit parameters.
    pub fn extra_params(self) -> usize {
        usize::from(self == CostKind::CNN)
    }

    pub fn exact_only(self) -> bool {
        matches!(self, CostKind::CG | CostKind::CL)
    }
}

impl fmt::Display for CostKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for CostKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CostKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::config("cost", format!("unknown cost `{s}`")))
    }
}

/// Status bits attached to a cost evaluation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Flags(pub u32);

impl Flags {
    pub const CLAMPED: Flags = Flags(1);

    pub fn contains(self, other: Flags) -> bool {
        self.0 & other.0 == other.0 && other.0 != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

impl std::ops::BitOr for Flags {
    type Output = Flags;
    fn bitor(self, rhs: Flags) -> Flags {
        Flags(self.0 | rhs.0)
    }
}

impl std::ops::BitOrAssign for Flags {
    fn bitor_assign(&mut self, rhs: Flags) {
        self.0 |= rhs.0;
    }
}

impl fmt::Display for Flags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.contains(Flags::CLAMPED) {
            f.write_str("clamped")
        } else {
            Ok(())
        }
    }
}

/// One row of an optimizer trace.
#[derive(Clone, Debug, PartialEq)]
pub struct CostEvalRecord {
    pub eval_index: usize,
    pub params: Vec<f64>,
    pub cost_est: f64,
    pub cost_exact: f64,
    pub fidelity: f64,
    pub flags: Flags,
}

impl CostEvalRecord {
    pub const CSV_HEADER: &'static str = "eval_index,cost_est,cost_exact,fidelity,flags";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.eval_index,
            fmt_f64(self.cost_est),
            fmt_f64(self.cost_exact),
            fmt_f64(self.fidelity),
            self.flags
        )
    }
}

/// Scientific notation with 17 significant digits; round-trips exactly.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// The problem block shared by every experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemSpec {
    pub n: usize,
    pub layers: usize,
    pub family: AnsatzFamily,
    pub rhs: RhsKind,
    pub x_placement: XPlacement,
    pub h: f64,
}

impl Default for ProblemSpec {
    fn default() -> Self {
        ProblemSpec {
            n: 3,
            layers: 3,
            family: AnsatzFamily::LinearAltRyCz,
            rhs: RhsKind::HnX,
            x_placement: XPlacement::MostSignificant,
            h: 1.0,
        }
    }
}

/// Quantities entering the cost functions, evaluated at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Terms {
    /// `Re<f|psi>` with the rescaled `f`.
    pub x: f64,
    /// `<psi|A|psi>`.
    pub y: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostValue {
    pub value: f64,
    pub flags: Flags,
}

/// How gradients are computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMethod {
    /// Parameter shift for shot backends, reverse-mode for the exact backend.
    Auto,
    ParameterShift,
    Adjoint,
}

/// A fully built VQLS instance.
#[derive(Clone, Debug)]
pub struct Problem {
    pub spec: ProblemSpec,
    pub system: StiffnessSystem,
    pub ansatz: Circuit,
    pub rhs: Circuit,
    pub decomposition: Decomposition,
    f_state: StateVector,
    f_norm: f64,
    solution: StateVector,
    solution_norm: f64,
}

impl Problem {
    pub fn new(spec: &ProblemSpec, method: Method) -> Result<Problem> {
        let system = stiffness(spec.n, spec.h)?.with_rhs(spec.rhs, spec.x_placement);
        let ansatz = build_ansatz(spec.family, spec.n, spec.layers)?;
        let rhs = system.rhs_circuit()?;
        let decomposition = decomposition(method, spec.n, spec.h)?;
        let f_state = StateVector::prepare(&rhs, &[])?;
        let (u, solution_norm) = system.exact_solution()?;
        Ok(Problem {
            spec: spec.clone(),
            system,
            ansatz,
            rhs,
            decomposition,
            f_state,
            f_norm: 1.0 / spec.h,
            solution: StateVector::from_real(&u)?,
            solution_norm,
        })
    }

    pub fn n_params(&self) -> usize {
        self.ansatz.n_params()
    }

    pub fn dim(&self, kind: CostKind) -> usize {
        self.n_params() + kind.extra_params()
    }

    pub fn solution(&self) -> &StateVector {
        &self.solution
    }

    pub fn solution_norm(&self) -> f64 {
        self.solution_norm
    }

    pub fn rhs_state(&self) -> &StateVector {
        &self.f_state
    }

    pub fn state(&self, theta: &[f64]) -> Result<StateVector> {
        StateVector::prepare(&self.ansatz, theta)
    }

    /// `|<u|psi(theta)>|^2`.
    pub fn fidelity(&self, theta: &[f64]) -> Result<f64> {
        Ok(self.solution.fidelity(&self.state(&theta[..self.n_params()])?))
    }

    fn split<'a>(&self, kind: CostKind, params: &'a [f64]) -> Result<(&'a [f64], f64)> {
        let p = self.n_params();
        if params.len() != self.dim(kind) {
            return Err(Error::config(
                "optimizer.x0",
                format!("{kind} expects {} variables, got {}", self.dim(kind), params.len()),
            ));
        }
        Ok((&params[..p], if kind == CostKind::CNN { params[p] } else { 1.0 }))
    }

    /// `x`, `y` from the statevector directly.
    pub fn terms_exact(&self, psi: &StateVector) -> Terms {
        Terms {
            x: self.f_norm * self.f_state.inner(psi).re,
            y: self.system.quadratic_form(psi.amplitudes()),
        }
    }

    /// `x`, `y` from the Hadamard test and the decomposition estimator.
    pub fn terms_estimated(&self, theta: &[f64], cfg: &EstimatorConfig) -> Result<Terms> {
        self.terms_for(&self.ansatz, theta, cfg)
    }

    fn terms(&self, theta: &[f64], cfg: &EstimatorConfig) -> Result<Terms> {
        if cfg.is_exact() {
            Ok(self.terms_exact(&self.state(theta)?))
        } else {
            self.terms_for(&self.ansatz, theta, cfg)
        }
    }

    /// `x`, `y` for an arbitrary circuit on the problem register.
    fn terms_for(&self, ansatz: &Circuit, theta: &[f64], cfg: &EstimatorConfig) -> Result<Terms> {
        if cfg.is_exact() {
            return Ok(self.terms_exact(&StateVector::prepare(ansatz, theta)?));
        }
        let ht = cfg.with_seed(derive_seed(cfg.seed, 0));
        let av = cfg.with_seed(derive_seed(cfg.seed, 1));
        Ok(Terms {
            x: self.f_norm * hadamard_test_re(ansatz, &self.rhs, theta, &ht)?,
            y: expval_a(ansatz, theta, &self.decomposition, &av)?,
        })
    }

    fn check_backend(&self, kind: CostKind, cfg: &EstimatorConfig) -> Result<()> {
        cfg.validate()?;
        if kind.exact_only() && !cfg.is_exact() {
            return Err(Error::config("cost", format!("{kind} is only available with the exact backend")));
        }
        Ok(())
    }

    /// Cost estimate at `params` (`theta`, plus `s` for `CNN`).
    pub fn cost(&self, kind: CostKind, params: &[f64], cfg: &EstimatorConfig) -> Result<CostValue> {
        self.check_backend(kind, cfg)?;
        let (theta, s) = self.split(kind, params)?;
        match kind {
            CostKind::CN | CostKind::CNN => Ok(combine(kind, self.terms(theta, cfg)?, s)),
            CostKind::CG | CostKind::CL => Ok(CostValue {
                value: self.projector_cost(kind, &self.state(theta)?)?.0,
                flags: Flags::default(),
            }),
        }
    }

    pub fn cost_exact(&self, kind: CostKind, params: &[f64]) -> Result<f64> {
        Ok(self.cost(kind, params, &EstimatorConfig::exact())?.value)
    }

    /// `1 - N/D` for the projector costs, returning `(cost, N, D)`.
    fn projector_cost(&self, kind: CostKind, psi: &StateVector) -> Result<(f64, f64, f64)> {
        let a_psi = self.system.apply(psi.amplitudes());
        let d: f64 = a_psi.iter().map(|a| a.norm_sqr()).sum();
        let num = match kind {
            CostKind::CG => {
                let c: C64 = self.f_state.amplitudes().iter().zip(&a_psi).map(|(f, a)| f.conj() * a).sum();
                c.norm_sqr()
            }
            _ => {
                let w = self.unprepare_rhs(a_psi)?;
                let weights = local_weights(self.spec.n);
                w.amplitudes().iter().zip(&weights).map(|(a, m)| a.norm_sqr() * m).sum()
            }
        };
        Ok((1.0 - num / d, num, d))
    }

    /// `U_f^dagger v` for an arbitrary vector.
    fn unprepare_rhs(&self, v: Vec<C64>) -> Result<StateVector> {
        let mut s = StateVector::from_amplitudes(v)?;
        s.apply_circuit(&self.rhs.inverse(), &[])?;
        Ok(s)
    }

    /// Gradient of the cost in all optimization variables.
    pub fn gradient(&self, kind: CostKind, params: &[f64], cfg: &EstimatorConfig) -> Result<Vec<f64>> {
        self.gradient_with(kind, params, cfg, GradientMethod::Auto)
    }

    pub fn gradient_with(
        &self,
        kind: CostKind,
        params: &[f64],
        cfg: &EstimatorConfig,
        method: GradientMethod,
    ) -> Result<Vec<f64>> {
        self.check_backend(kind, cfg)?;
        self.split(kind, params)?;
        match method {
            GradientMethod::Adjoint if !cfg.is_exact() => Err(Error::config(
                "optimizer.gradient",
                "reverse-mode gradients need the exact backend",
            )),
            GradientMethod::Adjoint => self.gradient_adjoint(kind, params),
            GradientMethod::Auto if cfg.is_exact() => self.gradient_adjoint(kind, params),
            _ => self.gradient_shift(kind, params, cfg),
        }
    }

    /// Reverse-mode gradient on the exact backend.
    pub fn gradient_adjoint(&self, kind: CostKind, params: &[f64]) -> Result<Vec<f64>> {
        let (theta, s) = self.split(kind, params)?;
        let psi = self.state(theta)?;
        let f_vec = || self.f_state.amplitudes().iter().map(|f| f * self.f_norm);
        let mut extra = None;
        let g: Vec<C64> = match kind {
            CostKind::CN | CostKind::CNN => {
                let t = self.terms_exact(&psi);
                let a_psi = self.system.apply(psi.amplitudes());
                let (cf, ca) = if kind == CostKind::CN {
                    (-t.x / t.y, t.x * t.x / (t.y * t.y))
                } else {
                    extra = Some(2.0 * s.powi(3) * t.y - 2.0 * s * t.x);
                    (-s * s, s.powi(4))
                };
                f_vec().zip(&a_psi).map(|(f, a)| f * cf + a * ca).collect()
            }
            CostKind::CG | CostKind::CL => {
                let (_, num, d) = self.projector_cost(kind, &psi)?;
                let a_psi = self.system.apply(psi.amplitudes());
                let aa_psi = self.system.apply(&a_psi);
                let m_vec: Vec<C64> = if kind == CostKind::CG {
                    let c: C64 = self.f_state.amplitudes().iter().zip(&a_psi).map(|(f, a)| f.conj() * a).sum();
                    let f_scaled: Vec<C64> = self.f_state.amplitudes().iter().map(|f| f * c).collect();
                    self.system.apply(&f_scaled)
                } else {
                    let mut w = self.unprepare_rhs(a_psi)?;
                    for (a, m) in w.amplitudes_mut().iter_mut().zip(local_weights(self.spec.n)) {
                        *a *= m;
                    }
                    w.apply_circuit(&self.rhs, &[])?;
                    self.system.apply(w.amplitudes())
                };
                m_vec
                    .iter()
                    .zip(&aa_psi)
                    .map(|(m, aa)| (m * (-1.0 / d) + aa * (num / (d * d))) * 2.0)
                    .collect()
            }
        };
        let mut grad = adjoint_pass(&self.ansatz, theta, psi, g)?;
        grad.extend(extra);
        Ok(grad)
    }

    /// Parameter-shift gradient: every rotation occurrence is evaluated at
    /// `+-pi/2`; shared parameters sum their occurrences.
    pub fn gradient_shift(&self, kind: CostKind, params: &[f64], cfg: &EstimatorConfig) -> Result<Vec<f64>> {
        let (theta, s) = self.split(kind, params)?;
        let occurrences = self.ansatz.occurrences();
        for o in &occurrences {
            if !self.ansatz.gates()[o.gate].kind.is_pauli_rotation() || !self.ansatz.gates()[o.gate].controls.is_empty() {
                return Err(Error::config(
                    "problem.family",
                    "parameter shift requires uncontrolled Pauli rotations",
                ));
            }
        }
        let mut grad = vec![0.0; self.dim(kind)];
        match kind {
            CostKind::CN | CostKind::CNN => {
                let base_cfg = cfg.with_seed(derive_seed(cfg.seed, 0));
                let t = self.terms(theta, &base_cfg)?;
                let y = t.y.max(DENOMINATOR_FLOOR);
                for (k, o) in occurrences.iter().enumerate() {
                    let mut shifted = [Terms { x: 0.0, y: 0.0 }; 2];
                    for (j, sign) in [1.0, -1.0].into_iter().enumerate() {
                        let sub = cfg.with_seed(derive_path(cfg.seed, &[1 + k as u64, j as u64]));
                        let circ = self.ansatz.with_shift(o.gate, o.slot, sign * FRAC_PI_2);
                        shifted[j] = self.terms_for(&circ, theta, &sub)?;
                    }
                    let dx = (shifted[0].x - shifted[1].x) / (2.0 * SQRT_2);
                    let dy = 0.5 * (shifted[0].y - shifted[1].y);
                    grad[o.param] += o.scale
                        * match kind {
                            CostKind::CN => -(t.x / y) * dx + 0.5 * (t.x * t.x) / (y * y) * dy,
                            _ => 0.5 * s.powi(4) * dy - s * s * dx,
                        };
                }
                if kind == CostKind::CNN {
                    grad[self.n_params()] = 2.0 * s.powi(3) * t.y - 2.0 * s * t.x;
                }
            }
            CostKind::CG | CostKind::CL => {
                let (_, num, d) = self.projector_cost(kind, &self.state(theta)?)?;
                for o in &occurrences {
                    let mut nd = [(0.0, 0.0); 2];
                    for (j, sign) in [1.0, -1.0].into_iter().enumerate() {
                        let circ = self.ansatz.with_shift(o.gate, o.slot, sign * FRAC_PI_2);
                        let (_, n_s, d_s) = self.projector_cost(kind, &StateVector::prepare(&circ, theta)?)?;
                        nd[j] = (n_s, d_s);
                    }
                    let dn = 0.5 * (nd[0].0 - nd[1].0);
                    let dd = 0.5 * (nd[0].1 - nd[1].1);
                    grad[o.param] += o.scale * (-(dn * d - num * dd) / (d * d));
                }
            }
        }
        Ok(grad)
    }

    /// Circuits run per cost evaluation and per rotation occurrence of a
    /// parameter-shift gradient: `(1 + terms, 2 (1 + terms))`.
    pub fn circuit_counts(&self) -> (usize, usize) {
        let per_point = 1 + self.decomposition.n_circuits();
        (per_point, 2 * per_point)
    }

    /// Circuits in one shot-based gradient: `C1 + C2 * occurrences`.
    pub fn gradient_circuits(&self) -> usize {
        let (c1, c2) = self.circuit_counts();
        c1 + c2 * self.ansatz.occurrences().len()
    }
}

fn combine(kind: CostKind, t: Terms, s: f64) -> CostValue {
    match kind {
        CostKind::CN => {
            let mut flags = Flags::default();
            let y = if t.y < DENOMINATOR_FLOOR {
                flags |= Flags::CLAMPED;
                DENOMINATOR_FLOOR
            } else {
                t.y
            };
            CostValue {
                value: -0.5 * t.x * t.x / y,
                flags,
            }
        }
        _ => CostValue {
            value: 0.5 * s.powi(4) * t.y - s * s * t.x,
            flags: Flags::default(),
        },
    }
}

/// Diagonal of `(1/n) sum_j |0><0|_j`: fraction of zero bits in each index.
fn local_weights(n: usize) -> Vec<f64> {
    (0..1usize << n)
        .map(|b| (n - (b.count_ones() as usize)) as f64 / n as f64)
        .collect()
}

/// Reverse sweep computing `dC/dtheta_k = Re<d psi / d theta_k | g>`.
fn adjoint_pass(circuit: &Circuit, theta: &[f64], psi: StateVector, g: Vec<C64>) -> Result<Vec<f64>> {
    let mut grad = vec![0.0; circuit.n_params()];
    let mut phi = psi;
    let mut lambda = StateVector::from_amplitudes(g)?;
    for gate in circuit.gates().iter().rev() {
        let inv = gate.inverse();
        phi.apply_gate(&inv, theta)?;
        let angles: Vec<f64> = gate.angles.iter().map(|a| a.resolve(theta)).collect::<Result<_>>()?;
        for (slot, a) in gate.angles.iter().enumerate() {
            if let crate::circuit::Angle::Param { index, scale, .. } = *a {
                let mut mu = phi.clone();
                mu.apply_derivative(gate, &angles, slot)?;
                grad[index] += scale * mu.inner(&lambda).re;
            }
        }
        lambda.apply_gate(&inv, theta)?;
    }
    Ok(grad)
}

/// Minimizer of `CNN` over `s` for fixed `theta`: `s^2 = max(x / y, 0)`.
pub fn optimal_scale(t: Terms) -> f64 {
    (t.x / t.y).max(0.0).sqrt()
}

/// Trace distance `sqrt(1 - F)` between pure states of fidelity `F`.
pub fn trace_distance_from_fidelity(f: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::Domain(format!("fidelity {f} outside [0, 1]")));
    }
    Ok((1.0 - f).sqrt())
}

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Domain(format!("vector lengths {} and {} differ", a.len(), b.len())));
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Domain("cosine similarity of a zero vector".into()));
    }
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_distance_examples() {
        assert!((trace_distance_from_fidelity(0.1089).unwrap() - 0.944).abs() < 1e-3);
        assert!((trace_distance_from_fidelity(0.99).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(trace_distance_from_fidelity(1.0).unwrap(), 0.0);
        assert!(trace_distance_from_fidelity(1.5).is_err());
    }

    #[test]
    fn cosine_examples() {
        let g = [1.0, -2.0, 0.5];
        let neg: Vec<f64> = g.iter().map(|v| -v).collect();
        assert!((cosine_similarity(&g, &g).unwrap() - 1.0).abs() < 1e-15);
        assert!((cosine_similarity(&g, &neg).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 3.0]).unwrap(), 0.0);
        assert!(cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn local_weights_count_zero_bits() {
        assert_eq!(local_weights(2), vec![1.0, 0.5, 0.5, 0.0]);
    }

    #[test]
    fn csv_floats_have_17_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
    }
}
