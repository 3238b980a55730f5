mod common;

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use common::*;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use vqls_core::sim::MAX_QUBITS;
use vqls_core::*;

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() < tol
}

#[test]
fn init_zero_examples() {
    let s = StateVector::init_zero(1).unwrap();
    assert_eq!(s.amplitudes(), &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    let s = StateVector::init_zero(3).unwrap();
    assert_eq!(s.dim(), 8);
    assert_eq!(s.amplitudes()[0], C64::new(1.0, 0.0));
    assert!(s.amplitudes()[1..].iter().all(|a| a.norm() == 0.0));
    assert!(matches!(StateVector::init_zero(0), Err(Error::Size(_))));
    assert!(matches!(StateVector::init_zero(MAX_QUBITS + 1), Err(Error::Size(_))));
}

#[test]
fn hadamard_and_involution() {
    let mut c = Circuit::new(1);
    c.push(Gate::h(0)).unwrap();
    let s = StateVector::prepare(&c, &[]).unwrap();
    assert!(close(s.amplitudes()[0], C64::new(FRAC_1_SQRT_2, 0.0), 1e-15));
    assert!(close(s.amplitudes()[1], C64::new(FRAC_1_SQRT_2, 0.0), 1e-15));

    let mut c = Circuit::new(1);
    c.push(Gate::x(0)).unwrap();
    c.push(Gate::x(0)).unwrap();
    let s = StateVector::prepare(&c, &[]).unwrap();
    assert_eq!(s.amplitudes()[0], C64::new(1.0, 0.0));
}

#[test]
fn ry_pi_flips_zero() {
    let mut c = Circuit::with_params(1, 1);
    c.push(Gate::ry(0, Angle::param(0))).unwrap();
    let s = StateVector::prepare(&c, &[PI]).unwrap();
    // matrix exponential exp(-i pi Y / 2) = -i Y, whose first column is (0, 1)
    let oracle = dense_state(&c, &[PI]);
    assert!(close(s.amplitudes()[1], oracle[1], 1e-15));
    assert!((s.amplitudes()[1].norm() - 1.0).abs() < 1e-15);
}

#[test]
fn binding_and_index_errors() {
    let mut c = Circuit::with_params(2, 1);
    c.push(Gate::rx(0, Angle::param(0))).unwrap();
    let mut s = StateVector::init_zero(2).unwrap();
    assert!(matches!(s.apply_circuit(&c, &[]), Err(Error::Binding(_))));
    assert!(matches!(Circuit::new(2).push(Gate::x(2)), Err(Error::Index { index: 2, .. })));
}

#[test]
fn every_gate_kind_matches_dense_oracle() {
    let mut r = rng(11);
    let mut c = Circuit::with_params(4, 6);
    c.push(Gate::h(0)).unwrap();
    c.push(Gate::rx(1, Angle::param(0))).unwrap();
    c.push(Gate::ry(2, Angle::param(1))).unwrap();
    c.push(Gate::rz(3, Angle::param(2))).unwrap();
    c.push(Gate::u3(0, Angle::param(3), Angle::param(4), Angle::param(5))).unwrap();
    c.push(Gate::cx(0, 2)).unwrap();
    c.push(Gate::cx(3, 1)).unwrap();
    c.push(Gate::cz(1, 3)).unwrap();
    c.push(Gate::rzz(2, 0, Angle::param(1))).unwrap();
    c.push(Gate::mcx(&[0, 1], 3)).unwrap();
    c.push(Gate::ry(2, Angle::param(2)).with_controls(&[1, 3])).unwrap();
    c.push(Gate::rzz(0, 1, Angle::param(4)).with_controls(&[2])).unwrap();
    c.push(Gate::u3(1, Angle::param(0), Angle::param(1), Angle::param(2)).with_controls(&[0])).unwrap();
    for _ in 0..5 {
        let theta = random_angles(&mut r, 6);
        let s = StateVector::prepare(&c, &theta).unwrap();
        let oracle = dense_state(&c, &theta);
        for (a, b) in s.amplitudes().iter().zip(oracle.iter()) {
            assert!(close(*a, *b, 1e-12), "{a} vs {b}");
        }
    }
}

#[test]
fn exact_expectation_examples() {
    let mut h = Circuit::new(1);
    h.push(Gate::h(0)).unwrap();
    let zpar = EigenMap::Parity { mask: 1 };
    let zero = StateVector::init_zero(1).unwrap();
    assert!(zero.exact_expectation(&h, &zpar).unwrap().abs() < 1e-15);
    let plus = StateVector::prepare(&h, &[]).unwrap();
    assert!((plus.exact_expectation(&h, &zpar).unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn exact_expectation_matches_dense_quadratic_form() {
    // <psi| D^dag diag(eig) D |psi> through the dense unitary of D
    let mut r = rng(5);
    let mut diag = Circuit::new(3);
    diag.push(Gate::cx(0, 2)).unwrap();
    diag.push(Gate::h(0)).unwrap();
    diag.push(Gate::rx(1, Angle::Fixed(std::f64::consts::FRAC_PI_2))).unwrap();
    let maps = [
        EigenMap::Parity { mask: 0b101 },
        EigenMap::LadderPair { level: 2 },
        EigenMap::ShiftedPair { n_qubits: 3 },
        EigenMap::AllZeros,
        EigenMap::Weighted(vec![(0.3, 0b011), (-1.2, 0b110)]),
    ];
    let u = unitary(&diag, &[]);
    for _ in 0..10 {
        let psi = random_state(&mut r, 3);
        let v = u.clone() * to_dvector(&psi);
        for m in &maps {
            let dense: f64 = v.iter().enumerate().map(|(b, a)| a.norm_sqr() * m.value(b as u64)).sum();
            let got = psi.exact_expectation(&diag, m).unwrap();
            assert!((got - dense).abs() < 1e-12);
        }
    }
}

#[test]
fn sample_counts_examples() {
    let zero = StateVector::init_zero(1).unwrap();
    let c = sample_counts(&zero, 100, 3).unwrap();
    assert_eq!(c.to_bitstring_table().into_iter().collect::<Vec<_>>(), vec![("0".to_string(), 100)]);
    assert!(matches!(sample_counts(&zero, 0, 3), Err(Error::Size(_))));

    let mut h = Circuit::new(1);
    h.push(Gate::h(0)).unwrap();
    let plus = StateVector::prepare(&h, &[]).unwrap();
    let c = sample_counts(&plus, 1_000_000, 42).unwrap();
    // binomial: sd = 0.0005, so [0.498, 0.502] is a 4-sigma band
    let f1 = c.frequency(1);
    assert!((0.498..=0.502).contains(&f1), "{f1}");
    assert_eq!(c, sample_counts(&plus, 1_000_000, 42).unwrap());
    assert_eq!(c.shots(), 1_000_000);
}

#[test]
fn bitstrings_are_most_significant_first() {
    let mut c = Circuit::new(3);
    c.push(Gate::x(0)).unwrap();
    let s = StateVector::prepare(&c, &[]).unwrap();
    let counts = sample_counts(&s, 5, 0).unwrap();
    assert_eq!(counts.get_bits("001"), 5);
}

#[test]
fn sampling_error_scales_as_inverse_sqrt_shots() {
    let mut r = rng(9);
    let psi = random_state(&mut r, 3);
    let probs = psi.probabilities();
    let shots = [100u64, 1_000, 10_000, 100_000];
    let rms: Vec<f64> = shots
        .iter()
        .map(|&s| {
            let reps = 200;
            let mse: f64 = (0..reps)
                .map(|k| {
                    let c = sample_counts(&psi, s, 1000 * s + k).unwrap();
                    probs.iter().enumerate().map(|(b, p)| (c.frequency(b as u64) - p).powi(2)).sum::<f64>()
                })
                .sum::<f64>()
                / reps as f64;
            mse.sqrt()
        })
        .collect();
    let x: Vec<f64> = shots.iter().map(|&s| s as f64).collect();
    let slope = loglog_slope(&x, &rms);
    assert!((slope + 0.5).abs() < 0.1, "slope {slope}");
}

#[test]
fn zero_noise_is_bit_identical() {
    let c = build_ansatz(AnsatzFamily::LinearAltRyCz, 4, 2).unwrap();
    let theta = random_angles(&mut rng(1), c.n_params());
    let s = StateVector::prepare(&c, &theta).unwrap();
    for seed in 0..5 {
        let a = sample_counts(&s, 5000, seed).unwrap();
        let b = sample_counts_noisy(&c, &theta, 5000, seed, &NoiseParams::default()).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn readout_flips_match_binomial() {
    let c = Circuit::new(2);
    let noise = NoiseParams { p1: 0.0, p2: 0.0, p_ro: 0.1 };
    let counts = sample_counts_noisy(&c, &[], 100_000, 8, &noise).unwrap();
    for q in 0..2 {
        let m = marginalize(&counts, &[q]).unwrap();
        let f = m.frequency(1);
        assert!((f - 0.1).abs() < 0.01, "qubit {q}: {f}");
    }
}

#[test]
fn full_depolarizing_randomizes_x() {
    // a uniform Pauli after X leaves |1> or |0> with probability 1/2 each
    let mut c = Circuit::new(1);
    c.push(Gate::x(0)).unwrap();
    let noise = NoiseParams { p1: 1.0, p2: 0.0, p_ro: 0.0 };
    let counts = sample_counts_noisy(&c, &[], 100_000, 3, &noise).unwrap();
    assert!((counts.frequency(1) - 0.5).abs() < 0.02);
}

#[test]
fn noise_rejects_bad_probabilities() {
    let noise = NoiseParams { p1: 1.5, p2: 0.0, p_ro: 0.0 };
    assert!(sample_counts_noisy(&Circuit::new(1), &[], 10, 0, &noise).unwrap_err().is_config());
}

#[test]
fn marginalize_examples() {
    let c = Counts::from_bitstrings([("01", 3), ("11", 5)]).unwrap();
    let m = marginalize(&c, &[0]).unwrap();
    assert_eq!(m.get_bits("1"), 8);
    assert_eq!(m.shots(), 8);

    let c = Counts::from_bitstrings([("01", 3), ("10", 5)]).unwrap();
    let m = marginalize(&c, &[1]).unwrap();
    assert_eq!((m.get_bits("0"), m.get_bits("1")), (3, 5));
    assert_eq!(marginalize(&c, &[0, 1]).unwrap(), c);
    assert!(matches!(marginalize(&c, &[]), Err(Error::Size(_))));
}

fn arb_circuit() -> impl Strategy<Value = (Circuit, Vec<f64>)> {
    (1usize..=6).prop_flat_map(|n| {
        let gate = (0usize..9, 0..n, 0..n, -PI..PI);
        (Just(n), prop::collection::vec(gate, 0..=50))
    })
    .prop_map(|(n, specs)| {
        let mut c = Circuit::new(n);
        for (k, a, b, angle) in specs {
            let a2 = if n > 1 && a == b { (b + 1) % n } else { b };
            let f = Angle::Fixed(angle);
            let g = match k {
                0 => Gate::x(a),
                1 => Gate::h(a),
                2 => Gate::rx(a, f),
                3 => Gate::ry(a, f),
                4 => Gate::rz(a, f),
                5 => Gate::u3(a, f, Angle::Fixed(0.3 * angle), Angle::Fixed(-angle)),
                6 if n > 1 => Gate::cx(a, a2),
                7 if n > 1 => Gate::cz(a, a2),
                8 if n > 1 => Gate::rzz(a, a2, f),
                _ => Gate::h(a),
            };
            c.push(g).unwrap();
        }
        (c, Vec::new())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn norm_is_preserved((c, params) in arb_circuit()) {
        let s = StateVector::prepare(&c, &params).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
    }
}

proptest! {
    #[test]
    fn sampling_is_deterministic_and_complete(seed in any::<u64>(), shots in 1u64..5000) {
        let mut r = rng(seed);
        let psi = random_state(&mut r, 3);
        let a = sample_counts(&psi, shots, seed).unwrap();
        prop_assert_eq!(a.iter().map(|(_, c)| c).sum::<u64>(), shots);
        prop_assert_eq!(a, sample_counts(&psi, shots, seed).unwrap());
    }
}
