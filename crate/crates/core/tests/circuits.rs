mod common;

use common::*;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use vqls_core::*;

#[test]
fn parameter_counts() {
    assert_eq!(param_count(AnsatzFamily::LinearAltRyCz, 5, 2).unwrap(), 21);
    assert_eq!(param_count(AnsatzFamily::LinearAltRyCz, 5, 3).unwrap(), 29);
    assert_eq!(param_count(AnsatzFamily::LinearRyCz, 5, 2).unwrap(), 15);
    assert_eq!(param_count(AnsatzFamily::Qaoa, 5, 2).unwrap(), 4);
    for n in 2..=8 {
        for l in 0..=4 {
            assert_eq!(param_count(AnsatzFamily::LinearRyCz, n, l).unwrap(), n * (l + 1));
            assert_eq!(param_count(AnsatzFamily::LinearAltRyCz, n, l).unwrap(), n + l * (2 * n - 2));
            assert_eq!(param_count(AnsatzFamily::Qaoa, n, l).unwrap(), 2 * l);
            assert_eq!(param_count(AnsatzFamily::QaoaPeriodic, n, l).unwrap(), 2 * l);
        }
    }
}

#[test]
fn zero_layers_is_a_rotation_column() {
    let c = build_ansatz(AnsatzFamily::LinearRyCz, 5, 0).unwrap();
    assert_eq!(c.n_params(), 5);
    assert_eq!(c.len(), 5);
    assert!(c.gates().iter().all(|g| g.kind == GateKind::RY && g.qubits.len() == 1));
    let used: Vec<usize> = c.gates().iter().map(|g| g.qubits[0]).collect();
    assert_eq!(used, vec![0, 1, 2, 3, 4]);
}

#[test]
fn alt_ry_cz_indices_cover_every_parameter_once() {
    let c = build_ansatz(AnsatzFamily::LinearAltRyCz, 5, 2).unwrap();
    let mut seen: Vec<usize> = c.occurrences().iter().map(|o| o.param).collect();
    seen.sort();
    assert_eq!(seen, (0..21).collect::<Vec<_>>());
}

#[test]
fn every_family_builds_for_small_sizes() {
    for fam in AnsatzFamily::ALL {
        for n in 2..=8 {
            for l in 0..=4 {
                let c = build_ansatz(fam, n, l).unwrap();
                assert_eq!(c.n_params(), param_count(fam, n, l).unwrap(), "{} {n} {l}", fam.name());
                let theta = random_angles(&mut rng((n * 10 + l) as u64), c.n_params());
                let s = StateVector::prepare(&c, &theta).unwrap();
                assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
                for o in c.occurrences() {
                    assert!(o.param < c.n_params());
                }
            }
        }
    }
}

#[test]
fn families_match_dense_oracle() {
    for fam in AnsatzFamily::ALL {
        let c = build_ansatz(fam, 4, 2).unwrap();
        let theta = random_angles(&mut rng(3), c.n_params());
        let s = StateVector::prepare(&c, &theta).unwrap();
        let oracle = dense_state(&c, &theta);
        for (a, b) in s.amplitudes().iter().zip(oracle.iter()) {
            assert!((a - b).norm() < 1e-12, "{}", fam.name());
        }
    }
}

#[test]
fn real_families_have_real_amplitudes() {
    for fam in AnsatzFamily::ALL.into_iter().filter(|f| f.is_real()) {
        for seed in 0..5 {
            let c = build_ansatz(fam, 5, 3).unwrap();
            let theta = random_angles(&mut rng(seed), c.n_params());
            let s = StateVector::prepare(&c, &theta).unwrap();
            assert!(s.amplitudes().iter().all(|a| a.im.abs() < 1e-12), "{}", fam.name());
        }
    }
}

#[test]
fn qaoa_shares_one_angle_per_layer() {
    let c = build_ansatz(AnsatzFamily::Qaoa, 5, 2).unwrap();
    let rzz: Vec<usize> = c
        .gates()
        .iter()
        .filter(|g| g.kind == GateKind::RZZ)
        .map(|g| g.angles[0].param_index().unwrap())
        .collect();
    assert_eq!(rzz.len(), 8);
    assert!(rzz[..4].iter().all(|&p| p == rzz[0]));
    let theta = [0.3, 0.7, -1.1, 2.0];
    let bound = c.bind(&theta).unwrap();
    let angles: Vec<f64> = bound
        .gates()
        .iter()
        .filter(|g| g.kind == GateKind::RZZ)
        .map(|g| g.angles[0].resolve(&[]).unwrap())
        .collect();
    assert!(angles[..4].iter().all(|&a| a == angles[0]));
}

#[test]
fn bind_matches_direct_application() {
    for fam in AnsatzFamily::ALL {
        let c = build_ansatz(fam, 3, 2).unwrap();
        let theta = random_angles(&mut rng(7), c.n_params());
        let bound = c.bind(&theta).unwrap();
        assert_eq!(bound.n_params(), 0);
        let a = StateVector::prepare(&c, &theta).unwrap();
        let b = StateVector::prepare(&bound, &[]).unwrap();
        assert_eq!(a.amplitudes(), b.amplitudes());
    }
    let c = build_ansatz(AnsatzFamily::LinearRyCz, 3, 1).unwrap();
    assert!(matches!(c.bind(&[0.0; 5]), Err(Error::Binding(_))));
}

#[test]
fn rhs_states() {
    let hn = build_rhs(RhsKind::Hn, 3, XPlacement::MostSignificant).unwrap();
    assert_eq!(hn.n_params(), 0);
    let s = StateVector::prepare(&hn, &[]).unwrap();
    assert!(s.amplitudes().iter().all(|a| (a.re - 8f64.sqrt().recip()).abs() < 1e-15 && a.im == 0.0));

    let hnx = build_rhs(RhsKind::HnX, 3, XPlacement::MostSignificant).unwrap();
    let s = StateVector::prepare(&hnx, &[]).unwrap();
    let oracle = dense_state(&hnx, &[]);
    for (i, a) in s.amplitudes().iter().enumerate() {
        let want = if i >= 4 { 0.5 } else { 0.0 };
        assert!((a.re - want).abs() < 1e-15 && (oracle[i].re - want).abs() < 1e-15);
    }

    let mut twice = build_rhs(RhsKind::Hn, 2, XPlacement::MostSignificant).unwrap();
    twice.append(&build_rhs(RhsKind::Hn, 2, XPlacement::MostSignificant).unwrap()).unwrap();
    let s = StateVector::prepare(&twice, &[]).unwrap();
    assert!((s.amplitudes()[0].re - 1.0).abs() < 1e-15);
}

#[test]
fn controlled_truth_table() {
    let mut c = Circuit::new(1);
    c.push(Gate::x(0)).unwrap();
    let cc = c.controlled();
    assert_eq!(cc.n_qubits(), 2);
    // |10>: control (qubit 1) set, target clear
    let mut s = StateVector::from_real(&[0.0, 0.0, 1.0, 0.0]).unwrap();
    s.apply_circuit(&cc, &[]).unwrap();
    assert_eq!(s.amplitudes()[3], C64::new(1.0, 0.0));

    let u = build_ansatz(AnsatzFamily::LinearU3Cx, 3, 1).unwrap().controlled();
    let theta = random_angles(&mut rng(2), u.n_params());
    let psi = random_state(&mut rng(4), 3);
    let mut amps = psi.amplitudes().to_vec();
    amps.extend(vec![C64::new(0.0, 0.0); 8]);
    let mut s = StateVector::from_amplitudes(amps.clone()).unwrap();
    s.apply_circuit(&u, &theta).unwrap();
    for (a, b) in s.amplitudes().iter().zip(&amps) {
        assert!((a - b).norm() < 1e-14);
    }
}

#[test]
fn controlled_is_block_diagonal() {
    for fam in AnsatzFamily::ALL {
        for n in 2..=3 {
            let c = build_ansatz(fam, n, 1).unwrap();
            let theta = random_angles(&mut rng(n as u64), c.n_params());
            let u = unitary(&c, &theta);
            let cu = unitary(&c.controlled(), &theta);
            let d = 1 << n;
            let mut want = DMatrix::<C64>::identity(2 * d, 2 * d);
            want.view_mut((d, d), (d, d)).copy_from(&u);
            assert!((cu - want).norm() < 1e-12, "{}", fam.name());
        }
    }
}

#[test]
fn inverse_undoes_circuit() {
    let c = build_ansatz(AnsatzFamily::LinearAltPeriodicU3Cx, 4, 2).unwrap();
    let theta = random_angles(&mut rng(8), c.n_params());
    let mut both = c.clone();
    both.append(&c.inverse()).unwrap();
    let s = StateVector::prepare(&both, &theta).unwrap();
    assert!((s.amplitudes()[0].norm() - 1.0).abs() < 1e-12);
}

#[test]
fn text_round_trip() {
    for fam in AnsatzFamily::ALL {
        let c = build_ansatz(fam, 4, 2).unwrap();
        let text = c.to_text();
        assert_eq!(Circuit::from_text(&text).unwrap(), c);
    }
    assert!(Circuit::from_text("circuit n_qubits=2 n_params=0\nfoo 0\n").is_err());
}

proptest! {
    #[test]
    fn real_ansatz_states_stay_real(
        n in 2usize..=6,
        l in 0usize..=3,
        seed in any::<u64>(),
    ) {
        for fam in [AnsatzFamily::LinearRyCz, AnsatzFamily::LinearAltRyCz] {
            let c = build_ansatz(fam, n, l).unwrap();
            let theta = random_angles(&mut rng(seed), c.n_params());
            let s = StateVector::prepare(&c, &theta).unwrap();
            prop_assert!(s.amplitudes().iter().all(|a| a.im.abs() < 1e-12));
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }
}
