//! The finite-element stiffness system `A u = f` on `N = 2^n` interior grid
//! points and decompositions of `A` into measurable observables.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::circuit::{build_rhs, Angle, Circuit, Gate, RhsKind, XPlacement};
use crate::error::{Error, Result};
use crate::sim::{EigenMap, StateVector};

/// Largest register for which dense matrices are materialized.
pub const DENSE_LIMIT: usize = 12;
/// Largest register accepted by [`pauli_decompose`].
pub const PAULI_LIMIT: usize = 10;

/// `A = (1/h) tridiag(-1, 2, -1)` with a right-hand side rescaled so `||f|| h = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct StiffnessSystem {
    pub n: usize,
    pub h: f64,
    pub rhs: RhsKind,
    pub placement: XPlacement,
}

pub fn stiffness(n: usize, h: f64) -> Result<StiffnessSystem> {
    if n < 2 || n > crate::sim::MAX_QUBITS {
        return Err(Error::config("problem.n", format!("{n} qubits outside 2..={}", crate::sim::MAX_QUBITS)));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::config("problem.h", format!("mesh size must be positive, got {h}")));
    }
    Ok(StiffnessSystem {
        n,
        h,
        rhs: RhsKind::Hn,
        placement: XPlacement::default(),
    })
}

impl StiffnessSystem {
    pub fn with_rhs(mut self, rhs: RhsKind, placement: XPlacement) -> Self {
        self.rhs = rhs;
        self.placement = placement;
        self
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn diagonal(&self) -> f64 {
        2.0 / self.h
    }

    pub fn off_diagonal(&self) -> f64 {
        -1.0 / self.h
    }

    /// Dense row-major matrix; only for `n <= DENSE_LIMIT`.
    pub fn matrix(&self) -> Result<Vec<Vec<f64>>> {
        if self.n > DENSE_LIMIT {
            return Err(Error::Size(format!("dense matrix disabled above {DENSE_LIMIT} qubits")));
        }
        let d = self.dim();
        let mut m = vec![vec![0.0; d]; d];
        for i in 0..d {
            m[i][i] = self.diagonal();
            if i + 1 < d {
                m[i][i + 1] = self.off_diagonal();
                m[i + 1][i] = self.off_diagonal();
            }
        }
        Ok(m)
    }

    /// `A x` without materializing `A`.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let d = x.len();
        let (a, b) = (self.diagonal(), self.off_diagonal());
        (0..d)
            .map(|i| {
                let mut y = x[i] * a;
                if i > 0 {
                    y += x[i - 1] * b;
                }
                if i + 1 < d {
                    y += x[i + 1] * b;
                }
                y
            })
            .collect()
    }

    /// `<x|A|x>`.
    pub fn quadratic_form(&self, x: &[C64]) -> f64 {
        let ax = self.apply(x);
        x.iter().zip(&ax).map(|(u, v)| (u.conj() * v).re).sum()
    }

    /// Closed-form spectrum `(2 - 2 cos(k pi / (N+1))) / h`, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let d = self.dim();
        (1..=d)
            .map(|k| (2.0 - 2.0 * (k as f64 * PI / (d as f64 + 1.0)).cos()) / self.h)
            .collect()
    }

    pub fn rhs_circuit(&self) -> Result<Circuit> {
        build_rhs(self.rhs, self.n, self.placement)
    }

    /// Normalized `|f>`.
    pub fn rhs_state(&self) -> Result<StateVector> {
        StateVector::prepare(&self.rhs_circuit()?, &[])
    }

    /// `f` as a vector with `||f|| h = 1`.
    pub fn rhs_vector(&self) -> Result<Vec<f64>> {
        let s = self.rhs_state()?;
        Ok(s.amplitudes().iter().map(|a| a.re / self.h).collect())
    }

    /// Normalized solution `|u>` and the norm of the unnormalized solution.
    pub fn exact_solution(&self) -> Result<(Vec<f64>, f64)> {
        let f = self.rhs_vector()?;
        let u = solve_tridiagonal(self.diagonal(), self.off_diagonal(), &f)?;
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Numerical("degenerate solution".into()));
        }
        Ok((u.iter().map(|v| v / norm).collect(), norm))
    }

    pub fn solution_state(&self) -> Result<StateVector> {
        StateVector::from_real(&self.exact_solution()?.0)
    }
}

/// Thomas algorithm for a symmetric Toeplitz tridiagonal system.
fn solve_tridiagonal(diag: f64, off: f64, rhs: &[f64]) -> Result<Vec<f64>> {
    let d = rhs.len();
    let mut c = vec![0.0; d];
    let mut y = vec![0.0; d];
    let mut denom = diag;
    for i in 0..d {
        if i > 0 {
            denom = diag - off * c[i - 1];
        }
        if denom.abs() < 1e-300 {
            return Err(Error::Numerical("zero pivot in tridiagonal solve".into()));
        }
        c[i] = off / denom;
        y[i] = (rhs[i] - if i > 0 { off * y[i - 1] } else { 0.0 }) / denom;
    }
    for i in (0..d.saturating_sub(1)).rev() {
        y[i] -= c[i] * y[i + 1];
    }
    Ok(y)
}

/// Ways of writing `<psi|A|psi>` as a combination of measured observables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Pauli strings, grouped by qubit-wise commuting measurement basis.
    Pauli,
    /// `I (x) X` plus one cyclic-increment circuit covering all odd-position couplings.
    Sato21,
    /// `I (x) X` plus one CX-ladder circuit per carry length.
    Liu21,
    /// `I (x) X` plus one circuit mapping every odd-position coupling onto a qubit-0 flip.
    Liu21Grouped,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Pauli, Method::Sato21, Method::Liu21, Method::Liu21Grouped];

    pub fn name(self) -> &'static str {
        match self {
            Method::Pauli => "pauli",
            Method::Sato21 => "sato21",
            Method::Liu21 => "liu21",
            Method::Liu21Grouped => "liu21-grouped",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace(['_', '-'], "");
        Method::ALL
            .into_iter()
            .find(|m| m.name().replace('-', "") == key)
            .ok_or_else(|| Error::config("estimator.method", format!("unknown decomposition `{s}`")))
    }
}

/// One measured observable: run `circuit` after the state preparation, measure
/// all qubits, and average `eigmap` over outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct DecompTerm {
    pub coefficient: f64,
    pub circuit: Circuit,
    pub eigmap: EigenMap,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub method: Method,
    pub n: usize,
    pub h: f64,
    pub constant: f64,
    pub terms: Vec<DecompTerm>,
}

impl Decomposition {
    /// `constant + sum_k c_k <O_k>` evaluated exactly.
    pub fn expectation_exact(&self, state: &StateVector) -> Result<f64> {
        let mut total = self.constant;
        for t in &self.terms {
            total += t.coefficient * state.exact_expectation(&t.circuit, &t.eigmap)?;
        }
        Ok(total)
    }

    pub fn n_circuits(&self) -> usize {
        self.terms.len()
    }

    /// CNOT count of each measurement circuit under naive gate counting.
    pub fn cnot_counts(&self) -> Vec<usize> {
        self.terms.iter().map(|t| t.circuit.cnot_count()).collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "decomposition method={} n={} h={:?} constant={:?} terms={}",
            self.method.name(),
            self.n,
            self.h,
            self.constant,
            self.terms.len()
        );
        for (k, t) in self.terms.iter().enumerate() {
            let _ = writeln!(s, "term {k} coefficient={:?} eigmap={}", t.coefficient, t.eigmap.describe());
            s.push_str(&t.circuit.to_text());
            s.push_str("end\n");
        }
        s
    }
}

pub fn decomposition(method: Method, n: usize, h: f64) -> Result<Decomposition> {
    let sys = stiffness(n, h)?;
    let c = sys.off_diagonal();
    let ix = || {
        let mut circ = Circuit::new(n);
        circ.add(Gate::h(0));
        DecompTerm {
            coefficient: c,
            circuit: circ,
            eigmap: EigenMap::Parity { mask: 1 },
        }
    };
    let mut terms = Vec::new();
    match method {
        Method::Liu21 => {
            terms.push(ix());
            for level in 1..n {
                let mut circ = Circuit::new(n);
                for k in 1..=level {
                    circ.add(Gate::cx(0, k));
                }
                circ.add(Gate::h(0));
                terms.push(DecompTerm {
                    coefficient: c,
                    circuit: circ,
                    eigmap: EigenMap::LadderPair { level },
                });
            }
        }
        Method::Sato21 => {
            terms.push(ix());
            let mut circ = Circuit::new(n);
            for k in (1..n).rev() {
                let controls: Vec<usize> = (0..k).collect();
                circ.add(Gate::mcx(&controls, k));
            }
            circ.add(Gate::x(0));
            circ.add(Gate::h(0));
            terms.push(DecompTerm {
                coefficient: c,
                circuit: circ,
                eigmap: EigenMap::ShiftedPair { n_qubits: n },
            });
        }
        Method::Liu21Grouped => {
            if n < 3 {
                return Err(Error::config("problem.n", "liu21-grouped needs at least 3 qubits"));
            }
            terms.push(ix());
            let mut circ = Circuit::new(n);
            circ.add(Gate::cx(0, 1));
            for k in 2..n {
                // X on q_k when q0 = 1 and q1..q_{k-1} = 0
                for q in 1..k {
                    circ.add(Gate::x(q));
                }
                let controls: Vec<usize> = (0..k).collect();
                circ.add(Gate::mcx(&controls, k));
                for q in 1..k {
                    circ.add(Gate::x(q));
                }
            }
            circ.add(Gate::h(0));
            terms.push(DecompTerm {
                coefficient: c,
                circuit: circ,
                eigmap: EigenMap::ShiftedPair { n_qubits: n },
            });
        }
        Method::Pauli => {
            let strings = pauli_decompose(n, h)?;
            let mut constant = 0.0;
            let mut groups: Vec<(Vec<u8>, Vec<(f64, u64)>)> = Vec::new();
            for (coef, p) in strings {
                if p.is_identity() {
                    constant += coef;
                    continue;
                }
                let basis = p.basis(n);
                let slot = groups.iter_mut().find(|(b, _)| compatible(b, &basis));
                let weight = (coef, p.x | p.z);
                match slot {
                    Some((b, ws)) => {
                        for (q, &op) in basis.iter().enumerate() {
                            if op != 0 {
                                b[q] = op;
                            }
                        }
                        ws.push(weight);
                    }
                    None => groups.push((basis, vec![weight])),
                }
            }
            for (basis, weights) in groups {
                let mut circ = Circuit::new(n);
                for (q, &op) in basis.iter().enumerate() {
                    match op {
                        1 => circ.add(Gate::h(q)),
                        2 => circ.add(Gate::rx(q, Angle::Fixed(FRAC_PI_2))),
                        _ => {}
                    }
                }
                terms.push(DecompTerm {
                    coefficient: 1.0,
                    circuit: circ,
                    eigmap: EigenMap::Weighted(weights),
                });
            }
            return Ok(Decomposition {
                method,
                n,
                h,
                constant,
                terms,
            });
        }
    }
    Ok(Decomposition {
        method,
        n,
        h,
        constant: sys.diagonal(),
        terms,
    })
}

/// Qubit-wise compatibility of two measurement bases (0 = unconstrained).
fn compatible(a: &[u8], b: &[u8]) -> bool {
    a.iter().zip(b).all(|(&x, &y)| x == 0 || y == 0 || x == y)
}

/// Pauli string as symplectic masks: qubit `q` carries X if bit `q` of `x` is
/// set and Z if bit `q` of `z` is set (both: Y).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    pub x: u64,
    pub z: u64,
}

impl PauliString {
    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Per-qubit operator codes: 0 = I, 1 = X, 2 = Y, 3 = Z.
    pub fn basis(&self, n: usize) -> Vec<u8> {
        (0..n)
            .map(|q| match ((self.x >> q) & 1, (self.z >> q) & 1) {
                (0, 0) => 0,
                (1, 0) => 1,
                (1, 1) => 2,
                _ => 3,
            })
            .collect()
    }

    /// Label with the most significant qubit first, e.g. `IIX` for X on qubit 0.
    pub fn label(&self, n: usize) -> String {
        self.basis(n).iter().rev().map(|&c| ['I', 'X', 'Y', 'Z'][c as usize]).collect()
    }

    /// Matrix element `<row|P|col>`.
    pub fn element(&self, row: u64, col: u64) -> C64 {
        if row != col ^ self.x {
            return C64::new(0.0, 0.0);
        }
        let phase = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)]
            [((self.x & self.z).count_ones() % 4) as usize];
        if (col & self.z).count_ones() % 2 == 0 {
            phase
        } else {
            -phase
        }
    }
}

/// `A = sum_P c_P P` with `c_P = Tr(P A) / 2^n`; zero coefficients dropped.
pub fn pauli_decompose(n: usize, h: f64) -> Result<Vec<(f64, PauliString)>> {
    if n > PAULI_LIMIT {
        return Err(Error::Size(format!("Pauli decomposition limited to {PAULI_LIMIT} qubits")));
    }
    let sys = stiffness(n, h)?;
    let d = 1u64 << n;
    let scale = 1.0 / d as f64;
    let mut out = BTreeMap::new();
    out.insert(PauliString { x: 0, z: 0 }, sys.diagonal());
    // only X masks of the form 2^(t+1) - 1 connect neighbouring indices
    for t in 0..n {
        let x = (1u64 << (t + 1)) - 1;
        for z in 0..d {
            let p = PauliString { x, z };
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..d {
                let partner = k ^ x;
                if partner == k + 1 || k == partner + 1 {
                    acc += p.element(partner, k) * sys.off_diagonal();
                }
            }
            let c = acc * scale;
            debug_assert!(c.im.abs() < 1e-12);
            if c.re.abs() > 1e-14 {
                out.insert(p, c.re);
            }
        }
    }
    Ok(out.into_iter().map(|(p, c)| (c, p)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thomas_solves_small_system() {
        let sys = stiffness(2, 1.0).unwrap();
        let u = solve_tridiagonal(2.0, -1.0, &[1.0; 4]).unwrap();
        let au: Vec<f64> = sys.apply(&u.iter().map(|&v| C64::new(v, 0.0)).collect::<Vec<_>>()).iter().map(|c| c.re).collect();
        for v in au {
            assert!((v - 1.0).abs() < 1e-12);
        }
        assert!((u[1] / u[0] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn pauli_labels() {
        let p = PauliString { x: 1, z: 0 };
        assert_eq!(p.label(3), "IIX");
        let p = PauliString { x: 3, z: 2 };
        assert_eq!(p.label(2), "YX");
    }

    #[test]
    fn liu21_circuit_count() {
        assert_eq!(decomposition(Method::Liu21, 5, 1.0).unwrap().n_circuits(), 5);
        assert_eq!(decomposition(Method::Sato21, 5, 1.0).unwrap().n_circuits(), 2);
        assert!(decomposition(Method::Liu21Grouped, 2, 1.0).is_err());
    }
}
