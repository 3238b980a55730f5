use std::collections::BTreeMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::sim::sampling::sample_into;
use crate::sim::{Counts, StateVector};

const ERROR_STREAM: u64 = 0x6e6f_6973_65;
const READOUT_STREAM: u64 = 0x7265_6164;

/// Stochastic Pauli and readout-flip noise.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseParams {
    /// Error probability after each single-qubit gate.
    pub p1: f64,
    /// Error probability after each gate touching two or more qubits.
    pub p2: f64,
    /// Per-qubit readout flip probability.
    pub p_ro: f64,
}

impl NoiseParams {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p1", self.p1), ("p2", self.p2), ("p_ro", self.p_ro)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::config(format!("noise.{name}"), format!("{p} is not a probability")));
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.p1 == 0.0 && self.p2 == 0.0 && self.p_ro == 0.0
    }
}

/// Prepare `circuit` from `|0...0>` once per shot, inserting a uniformly random
/// Pauli string (identity included) on each gate's qubits with probability
/// `p1`/`p2`, then flip each measured bit with probability `p_ro`.
///
/// Shots that draw the same error pattern share one simulation. Outcome
/// sampling uses the stream of [`super::sample_counts`], so all-zero noise
/// gives identical counts for the same seed.
pub fn sample_counts_noisy(
    circuit: &Circuit,
    params: &[f64],
    shots: u64,
    seed: u64,
    noise: &NoiseParams,
) -> Result<Counts> {
    if shots == 0 {
        return Err(Error::Size("shots must be at least 1".into()));
    }
    noise.validate()?;
    let mut sample_rng = rng_from_seed(seed);
    let mut counts = Counts::new(circuit.n_qubits());

    if noise.p1 == 0.0 && noise.p2 == 0.0 {
        let state = StateVector::prepare(circuit, params)?;
        sample_into(&state.probabilities(), shots, &mut sample_rng, &mut counts);
    } else {
        let mut err_rng = rng_from_seed(derive_seed(seed, ERROR_STREAM));
        let mut patterns: BTreeMap<Vec<(u32, u32)>, u64> = BTreeMap::new();
        for _ in 0..shots {
            let mut pattern = Vec::new();
            for (gi, g) in circuit.gates().iter().enumerate() {
                let k = g.arity();
                let p = if k == 1 { noise.p1 } else { noise.p2 };
                if p > 0.0 && err_rng.random::<f64>() < p {
                    let code = err_rng.random_range(0..1u32 << (2 * k));
                    if code != 0 {
                        pattern.push((gi as u32, code));
                    }
                }
            }
            *patterns.entry(pattern).or_insert(0) += 1;
        }
        let mut resolved = Vec::with_capacity(circuit.gates().len());
        for g in circuit.gates() {
            let angles: Vec<f64> = g.angles.iter().map(|a| a.resolve(params)).collect::<Result<_>>()?;
            resolved.push(angles);
        }
        for (pattern, count) in &patterns {
            let mut state = StateVector::init_zero(circuit.n_qubits())?;
            let mut errors = pattern.iter().peekable();
            for (gi, g) in circuit.gates().iter().enumerate() {
                state.apply_resolved(g, &resolved[gi])?;
                if let Some(&(_, code)) = errors.next_if(|e| e.0 as usize == gi) {
                    for (j, q) in g.support().enumerate() {
                        state.apply_pauli(q, ((code >> (2 * j)) & 3) as u8);
                    }
                }
            }
            sample_into(&state.probabilities(), *count, &mut sample_rng, &mut counts);
        }
    }

    if noise.p_ro > 0.0 {
        let mut ro_rng = rng_from_seed(derive_seed(seed, READOUT_STREAM));
        counts = counts.with_readout_flips(noise.p_ro, &mut ro_rng);
    }
    Ok(counts)
}
