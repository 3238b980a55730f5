//! Independent dense-matrix oracles shared by the integration tests.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vqls_core::{Circuit, GateKind, StateVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_angles(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect()
}

/// Haar-like random state from normalized complex Gaussians (Box-Muller).
pub fn random_state(rng: &mut ChaCha8Rng, n: usize) -> StateVector {
    let gauss = |rng: &mut ChaCha8Rng| {
        let (u1, u2): (f64, f64) = (rng.random_range(1e-12..1.0), rng.random());
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    };
    let amps: Vec<C64> = (0..1usize << n).map(|_| C64::new(gauss(rng), gauss(rng))).collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).unwrap()
}

/// Gate-local matrix written out from textbook definitions. Two-qubit local
/// index is `bit(qubits[0]) + 2 bit(qubits[1])`.
fn local_matrix(kind: GateKind, a: &[f64]) -> DMatrix<C64> {
    let c = |re: f64, im: f64| C64::new(re, im);
    let e = |phase: f64| C64::from_polar(1.0, phase);
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    match kind {
        GateKind::X => DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
        GateKind::H => DMatrix::from_row_slice(2, 2, &[c(s2, 0.), c(s2, 0.), c(s2, 0.), c(-s2, 0.)]),
        GateKind::RX => {
            let (s, co) = (a[0] / 2.0).sin_cos();
            DMatrix::from_row_slice(2, 2, &[c(co, 0.), c(0., -s), c(0., -s), c(co, 0.)])
        }
        GateKind::RY => {
            let (s, co) = (a[0] / 2.0).sin_cos();
            DMatrix::from_row_slice(2, 2, &[c(co, 0.), c(-s, 0.), c(s, 0.), c(co, 0.)])
        }
        GateKind::RZ => DMatrix::from_row_slice(2, 2, &[e(-a[0] / 2.0), c(0., 0.), c(0., 0.), e(a[0] / 2.0)]),
        GateKind::U3 => {
            let (s, co) = (a[0] / 2.0).sin_cos();
            DMatrix::from_row_slice(
                2,
                2,
                &[c(co, 0.), -e(a[2]) * s, e(a[1]) * s, e(a[1] + a[2]) * co],
            )
        }
        GateKind::CX => {
            // control = local bit 0, target = local bit 1
            let mut m = DMatrix::zeros(4, 4);
            for b in 0..4usize {
                let out = if b & 1 == 1 { b ^ 2 } else { b };
                m[(out, b)] = c(1., 0.);
            }
            m
        }
        GateKind::CZ => DMatrix::from_diagonal(&DVector::from_vec(vec![
            c(1., 0.),
            c(1., 0.),
            c(1., 0.),
            c(-1., 0.),
        ])),
        GateKind::RZZ => {
            let d: Vec<C64> = (0..4u32)
                .map(|b| if b.count_ones() % 2 == 0 { e(-a[0] / 2.0) } else { e(a[0] / 2.0) })
                .collect();
            DMatrix::from_diagonal(&DVector::from_vec(d))
        }
    }
}

/// Full `2^n` unitary of a circuit, built column by column.
pub fn unitary(circuit: &Circuit, params: &[f64]) -> DMatrix<C64> {
    let n = circuit.n_qubits();
    let dim = 1usize << n;
    let mut u = DMatrix::<C64>::identity(dim, dim);
    for g in circuit.gates() {
        let angles: Vec<f64> = g.angles.iter().map(|a| a.resolve(params).unwrap()).collect();
        let local = local_matrix(g.kind, &angles);
        let k = g.qubits.len();
        let mut full = DMatrix::<C64>::zeros(dim, dim);
        for col in 0..dim {
            if !g.controls.iter().all(|&q| col >> q & 1 == 1) {
                full[(col, col)] = C64::new(1.0, 0.0);
                continue;
            }
            let lin: usize = g.qubits.iter().enumerate().map(|(i, &q)| (col >> q & 1) << i).sum();
            for lout in 0..1usize << k {
                let amp = local[(lout, lin)];
                if amp == C64::new(0.0, 0.0) {
                    continue;
                }
                let mut row = col;
                for (i, &q) in g.qubits.iter().enumerate() {
                    row = (row & !(1 << q)) | ((lout >> i & 1) << q);
                }
                full[(row, col)] += amp;
            }
        }
        u = full * u;
    }
    u
}

pub fn to_dvector(s: &StateVector) -> DVector<C64> {
    DVector::from_column_slice(s.amplitudes())
}

/// `U |0>` through the dense oracle.
pub fn dense_state(circuit: &Circuit, params: &[f64]) -> DVector<C64> {
    unitary(circuit, params).column(0).into_owned()
}

/// Stiffness matrix straight from its definition.
pub fn stiffness_matrix(n: usize, h: f64) -> DMatrix<f64> {
    let dim = 1usize << n;
    DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            2.0 / h
        } else if i.abs_diff(j) == 1 {
            -1.0 / h
        } else {
            0.0
        }
    })
}

/// `<psi| M |psi>` for a real symmetric `M`.
pub fn quadratic_form(m: &DMatrix<f64>, psi: &StateVector) -> f64 {
    let v = to_dvector(psi);
    let mc = m.map(|x| C64::new(x, 0.0));
    (v.adjoint() * mc * &v)[(0, 0)].re
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
