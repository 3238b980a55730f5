use num_complex::Complex64 as C64;

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::sim::{EigenMap, MAX_QUBITS};

type Mat2 = [[C64; 2]; 2];

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Dense `2^n` amplitude vector. Qubit `q` is bit `q` of the basis index.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn init_zero(n_qubits: usize) -> Result<Self> {
        check_size(n_qubits)?;
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[0] = ONE;
        Ok(StateVector { n_qubits, amps })
    }

    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Size(format!("amplitude count {len} is not a power of two >= 2")));
        }
        let n_qubits = len.trailing_zeros() as usize;
        check_size(n_qubits)?;
        Ok(StateVector { n_qubits, amps })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::from_amplitudes(values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    /// `circuit` applied to `|0...0>`.
    pub fn prepare(circuit: &Circuit, params: &[f64]) -> Result<Self> {
        let mut s = Self::init_zero(circuit.n_qubits())?;
        s.apply_circuit(circuit, params)?;
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let norm = self.norm_sqr().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Numerical("cannot normalize a zero or non-finite state".into()));
        }
        for a in &mut self.amps {
            *a /= norm;
        }
        Ok(())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit, params: &[f64]) -> Result<()> {
        if circuit.n_qubits() != self.n_qubits {
            return Err(Error::Size(format!(
                "circuit has {} qubits, state has {}",
                circuit.n_qubits(),
                self.n_qubits
            )));
        }
        if params.len() < circuit.n_params() {
            return Err(Error::Binding(format!(
                "circuit needs {} parameters, {} supplied",
                circuit.n_params(),
                params.len()
            )));
        }
        for g in circuit.gates() {
            self.apply_gate(g, params)?;
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, gate: &Gate, params: &[f64]) -> Result<()> {
        let mut angles = [0.0; 3];
        for (slot, a) in angles.iter_mut().zip(&gate.angles) {
            *slot = a.resolve(params)?;
        }
        self.apply_resolved(gate, &angles[..gate.angles.len()])
    }

    /// Apply a gate whose angles have already been evaluated.
    pub fn apply_resolved(&mut self, gate: &Gate, angles: &[f64]) -> Result<()> {
        let cmask = self.mask(&gate.controls)?;
        let q0 = self.qubit(gate.qubits[0])?;
        match gate.kind {
            GateKind::X => self.apply_x(q0, cmask),
            GateKind::CX => {
                let t = self.qubit(gate.qubits[1])?;
                self.apply_x(t, cmask | (1 << q0));
            }
            GateKind::CZ => {
                let b = self.qubit(gate.qubits[1])?;
                let m = cmask | (1 << q0) | (1 << b);
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & m == m {
                        *a = -*a;
                    }
                }
            }
            GateKind::RZZ => {
                let b = self.qubit(gate.qubits[1])?;
                let (even, odd) = rzz_phases(angles[0]);
                self.apply_parity_diag(q0, b, even, odd, cmask);
            }
            GateKind::RZ => {
                let half = 0.5 * angles[0];
                self.apply_diag(q0, C64::from_polar(1.0, -half), C64::from_polar(1.0, half), cmask);
            }
            kind => self.apply_1q(q0, &matrix(kind, angles), cmask),
        }
        Ok(())
    }

    /// Replace the state by `dG/da_which |state>`, where `G` is `gate` with `angles`.
    /// The derivative of a controlled gate vanishes outside the control subspace.
    pub fn apply_derivative(&mut self, gate: &Gate, angles: &[f64], which: usize) -> Result<()> {
        if which >= gate.kind.n_angles() {
            return Err(Error::Binding(format!("{} has no angle {which}", gate.kind.name())));
        }
        let q0 = self.qubit(gate.qubits[0])?;
        let mut cmask = self.mask(&gate.controls)?;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & cmask != cmask {
                *a = ZERO;
            }
        }
        match gate.kind {
            GateKind::RZZ => {
                let b = self.qubit(gate.qubits[1])?;
                let (even, odd) = rzz_phases(angles[0]);
                let i_half = C64::new(0.0, 0.5);
                self.apply_parity_diag(q0, b, -i_half * even, i_half * odd, cmask);
            }
            kind => {
                // controls already projected out; skip the mask test in the kernel
                cmask = 0;
                self.apply_1q(q0, &derivative_matrix(kind, angles, which), cmask);
            }
        }
        Ok(())
    }

    /// Pauli `code` (0=I, 1=X, 2=Y, 3=Z) on qubit `q`.
    pub fn apply_pauli(&mut self, q: usize, code: u8) {
        match code {
            1 => self.apply_x(q, 0),
            2 => self.apply_1q(q, &[[ZERO, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), ZERO]], 0),
            3 => self.apply_diag(q, ONE, -ONE, 0),
            _ => {}
        }
    }

    /// `sum_b |<b| diag_after |psi>|^2 eig(b)`.
    pub fn exact_expectation(&self, diag_after: &Circuit, eigmap: &EigenMap) -> Result<f64> {
        let mut s = self.clone();
        s.apply_circuit(diag_after, &[])?;
        Ok(s.expectation_diag(eigmap))
    }

    /// Expectation of a diagonal observable in the computational basis.
    pub fn expectation_diag(&self, eigmap: &EigenMap) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(b, a)| a.norm_sqr() * eigmap.value(b as u64))
            .sum()
    }

    fn qubit(&self, q: usize) -> Result<usize> {
        if q < self.n_qubits {
            Ok(q)
        } else {
            Err(Error::Index {
                index: q,
                n_qubits: self.n_qubits,
            })
        }
    }

    fn mask(&self, qubits: &[usize]) -> Result<usize> {
        qubits.iter().try_fold(0usize, |m, &q| Ok(m | (1 << self.qubit(q)?)))
    }

    fn apply_x(&mut self, t: usize, cmask: usize) {
        let stride = 1 << t;
        for base in (0..self.amps.len()).step_by(2 * stride) {
            for i in base..base + stride {
                if i & cmask == cmask {
                    self.amps.swap(i, i + stride);
                }
            }
        }
    }

    fn apply_diag(&mut self, t: usize, d0: C64, d1: C64, cmask: usize) {
        let bit = 1 << t;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & cmask == cmask {
                *a *= if i & bit == 0 { d0 } else { d1 };
            }
        }
    }

    fn apply_parity_diag(&mut self, a: usize, b: usize, even: C64, odd: C64, cmask: usize) {
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & cmask == cmask {
                let parity = ((i >> a) ^ (i >> b)) & 1;
                *amp *= if parity == 0 { even } else { odd };
            }
        }
    }

    fn apply_1q(&mut self, t: usize, m: &Mat2, cmask: usize) {
        let stride = 1 << t;
        for base in (0..self.amps.len()).step_by(2 * stride) {
            for i in base..base + stride {
                if i & cmask != cmask {
                    continue;
                }
                let j = i + stride;
                let (a0, a1) = (self.amps[i], self.amps[j]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[j] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }
}

fn check_size(n: usize) -> Result<()> {
    if (1..=MAX_QUBITS).contains(&n) {
        Ok(())
    } else {
        Err(Error::Size(format!("qubit count {n} outside 1..={MAX_QUBITS}")))
    }
}

fn rzz_phases(angle: f64) -> (C64, C64) {
    (C64::from_polar(1.0, -0.5 * angle), C64::from_polar(1.0, 0.5 * angle))
}

/// 2x2 matrix of a single-qubit gate kind.
pub fn matrix(kind: GateKind, angles: &[f64]) -> Mat2 {
    let r = |x: f64| C64::new(x, 0.0);
    match kind {
        GateKind::X | GateKind::CX => [[ZERO, ONE], [ONE, ZERO]],
        GateKind::H => {
            let h = r(std::f64::consts::FRAC_1_SQRT_2);
            [[h, h], [h, -h]]
        }
        GateKind::RX => {
            let (s, c) = (0.5 * angles[0]).sin_cos();
            [[r(c), C64::new(0.0, -s)], [C64::new(0.0, -s), r(c)]]
        }
        GateKind::RY => {
            let (s, c) = (0.5 * angles[0]).sin_cos();
            [[r(c), r(-s)], [r(s), r(c)]]
        }
        GateKind::RZ => {
            let half = 0.5 * angles[0];
            [[C64::from_polar(1.0, -half), ZERO], [ZERO, C64::from_polar(1.0, half)]]
        }
        GateKind::U3 => {
            let (s, c) = (0.5 * angles[0]).sin_cos();
            let (phi, lam) = (angles[1], angles[2]);
            [
                [r(c), -C64::from_polar(s, lam)],
                [C64::from_polar(s, phi), C64::from_polar(c, phi + lam)],
            ]
        }
        GateKind::CZ => [[ONE, ZERO], [ZERO, -ONE]],
        GateKind::RZZ => unreachable!("RZZ is a two-qubit diagonal gate"),
    }
}

fn derivative_matrix(kind: GateKind, angles: &[f64], which: usize) -> Mat2 {
    let r = |x: f64| C64::new(x, 0.0);
    let i = C64::new(0.0, 1.0);
    match kind {
        GateKind::RX => {
            let (s, c) = (0.5 * angles[0]).sin_cos();
            [[r(-0.5 * s), C64::new(0.0, -0.5 * c)], [C64::new(0.0, -0.5 * c), r(-0.5 * s)]]
        }
        GateKind::RY => {
            let (s, c) = (0.5 * angles[0]).sin_cos();
            [[r(-0.5 * s), r(-0.5 * c)], [r(0.5 * c), r(-0.5 * s)]]
        }
        GateKind::RZ => {
            let half = 0.5 * angles[0];
            [
                [-0.5 * i * C64::from_polar(1.0, -half), ZERO],
                [ZERO, 0.5 * i * C64::from_polar(1.0, half)],
            ]
        }
        GateKind::U3 => {
            let (s, c) = (0.5 * angles[0]).sin_cos();
            let (phi, lam) = (angles[1], angles[2]);
            match which {
                0 => [
                    [r(-0.5 * s), -C64::from_polar(0.5 * c, lam)],
                    [C64::from_polar(0.5 * c, phi), -C64::from_polar(0.5 * s, phi + lam)],
                ],
                1 => [
                    [ZERO, ZERO],
                    [i * C64::from_polar(s, phi), i * C64::from_polar(c, phi + lam)],
                ],
                _ => [
                    [ZERO, -i * C64::from_polar(s, lam)],
                    [ZERO, i * C64::from_polar(c, phi + lam)],
                ],
            }
        }
        _ => [[ZERO, ZERO], [ZERO, ZERO]],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Angle;

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn init_zero_bounds() {
        assert!(StateVector::init_zero(0).is_err());
        assert!(StateVector::init_zero(MAX_QUBITS + 1).is_err());
        let s = StateVector::init_zero(3).unwrap();
        assert_eq!(s.dim(), 8);
        assert_eq!(s.amplitudes()[0], ONE);
    }

    #[test]
    fn cx_uses_first_qubit_as_control() {
        let mut s = StateVector::init_zero(2).unwrap();
        s.apply_gate(&Gate::x(0), &[]).unwrap();
        s.apply_gate(&Gate::cx(0, 1), &[]).unwrap();
        assert!(close(s.amplitudes()[3], ONE));
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let gates = [
            Gate::rx(0, Angle::param(0)),
            Gate::ry(1, Angle::param(0)),
            Gate::rz(0, Angle::param(0)),
            Gate::rzz(0, 1, Angle::param(0)),
            Gate::ry(1, Angle::param(0)).with_controls(&[0]),
        ];
        let mut base = StateVector::init_zero(2).unwrap();
        base.apply_gate(&Gate::h(0), &[]).unwrap();
        base.apply_gate(&Gate::ry(1, Angle::Fixed(0.7)), &[]).unwrap();
        let a = 0.37;
        let eps = 1e-6;
        for g in &gates {
            let mut d = base.clone();
            d.apply_derivative(g, &[a], 0).unwrap();
            let mut p = base.clone();
            p.apply_gate(g, &[a + eps]).unwrap();
            let mut m = base.clone();
            m.apply_gate(g, &[a - eps]).unwrap();
            for k in 0..4 {
                let fd = (p.amplitudes()[k] - m.amplitudes()[k]) / (2.0 * eps);
                assert!((fd - d.amplitudes()[k]).norm() < 1e-8, "{g}");
            }
        }
        let u3 = Gate::u3(0, Angle::param(0), Angle::param(1), Angle::param(2));
        let angles = [0.3, -1.1, 2.0];
        for which in 0..3 {
            let mut d = base.clone();
            d.apply_derivative(&u3, &angles, which).unwrap();
            let mut plus = angles;
            plus[which] += eps;
            let mut minus = angles;
            minus[which] -= eps;
            let mut p = base.clone();
            p.apply_resolved(&u3, &plus).unwrap();
            let mut m = base.clone();
            m.apply_resolved(&u3, &minus).unwrap();
            for k in 0..4 {
                let fd = (p.amplitudes()[k] - m.amplitudes()[k]) / (2.0 * eps);
                assert!((fd - d.amplitudes()[k]).norm() < 1e-8);
            }
        }
    }
}
