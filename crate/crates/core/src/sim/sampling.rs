use std::collections::BTreeMap;

use rand::Rng as _;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, Rng};
use crate::sim::{EigenMap, StateVector};

/// Measurement outcomes. Keys are basis indices; [`Counts::bitstring`] renders
/// them most-significant qubit first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counts {
    n_qubits: usize,
    shots: u64,
    table: BTreeMap<u64, u64>,
}

impl Counts {
    pub fn new(n_qubits: usize) -> Self {
        Counts {
            n_qubits,
            shots: 0,
            table: BTreeMap::new(),
        }
    }

    pub fn from_bitstrings<'a>(entries: impl IntoIterator<Item = (&'a str, u64)>) -> Result<Self> {
        let mut n = None;
        let mut counts = Counts::new(0);
        for (bits, c) in entries {
            if *n.get_or_insert(bits.len()) != bits.len() || bits.is_empty() {
                return Err(Error::Size(format!("bitstring `{bits}` has inconsistent length")));
            }
            let idx = u64::from_str_radix(bits, 2)
                .map_err(|_| Error::Size(format!("`{bits}` is not a bitstring")))?;
            counts.add(idx, c);
        }
        counts.n_qubits = n.ok_or_else(|| Error::Size("no outcomes".into()))?;
        Ok(counts)
    }

    pub fn add(&mut self, outcome: u64, count: u64) {
        if count > 0 {
            *self.table.entry(outcome).or_insert(0) += count;
            self.shots += count;
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn get(&self, outcome: u64) -> u64 {
        self.table.get(&outcome).copied().unwrap_or(0)
    }

    pub fn get_bits(&self, bits: &str) -> u64 {
        u64::from_str_radix(bits, 2).map(|i| self.get(i)).unwrap_or(0)
    }

    pub fn frequency(&self, outcome: u64) -> f64 {
        self.get(outcome) as f64 / self.shots as f64
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.table.iter().map(|(&k, &v)| (k, v))
    }

    pub fn bitstring(&self, outcome: u64) -> String {
        format!("{outcome:0width$b}", width = self.n_qubits)
    }

    pub fn to_bitstring_table(&self) -> BTreeMap<String, u64> {
        self.iter().map(|(k, v)| (self.bitstring(k), v)).collect()
    }

    /// Sample mean of a diagonal observable.
    pub fn mean(&self, eigmap: &EigenMap) -> f64 {
        let total: f64 = self.iter().map(|(k, v)| v as f64 * eigmap.value(k)).sum();
        total / self.shots as f64
    }

    /// Flip every bit of every shot independently with probability `p`.
    pub(crate) fn with_readout_flips(&self, p: f64, rng: &mut Rng) -> Counts {
        if p <= 0.0 {
            return self.clone();
        }
        let mut out = Counts::new(self.n_qubits);
        for (outcome, count) in self.iter() {
            for _ in 0..count {
                let mut b = outcome;
                for q in 0..self.n_qubits {
                    if rng.random::<f64>() < p {
                        b ^= 1 << q;
                    }
                }
                out.add(b, 1);
            }
        }
        out
    }
}

/// Draw `shots` i.i.d. outcomes from `|amplitude|^2`.
pub fn sample_counts(state: &StateVector, shots: u64, seed: u64) -> Result<Counts> {
    if shots == 0 {
        return Err(Error::Size("shots must be at least 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut counts = Counts::new(state.n_qubits());
    sample_into(&state.probabilities(), shots, &mut rng, &mut counts);
    Ok(counts)
}

/// Multinomial draw by sequential conditional binomials, in index order.
pub(crate) fn sample_into(probs: &[f64], shots: u64, rng: &mut Rng, counts: &mut Counts) {
    let mut remaining = shots;
    let mut mass: f64 = probs.iter().sum();
    let mut last = None;
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if p <= 0.0 {
            continue;
        }
        last = Some(i);
        let q = (p / mass).clamp(0.0, 1.0);
        let k = if q >= 1.0 {
            remaining
        } else {
            Binomial::new(remaining, q).map(|d| d.sample(rng)).unwrap_or(0)
        };
        counts.add(i as u64, k);
        remaining -= k;
        mass -= p;
    }
    if remaining > 0 {
        // rounding left some mass unassigned
        if let Some(i) = last {
            counts.add(i as u64, remaining);
        }
    }
}

/// Sum counts over all qubits not in `qubits`. Bit `k` of each new outcome is
/// the value of `qubits[k]`.
pub fn marginalize(counts: &Counts, qubits: &[usize]) -> Result<Counts> {
    if qubits.is_empty() {
        return Err(Error::Size("marginalize needs at least one qubit".into()));
    }
    let mut seen = 0u64;
    for &q in qubits {
        if q >= counts.n_qubits {
            return Err(Error::Index {
                index: q,
                n_qubits: counts.n_qubits,
            });
        }
        if seen & (1 << q) != 0 {
            return Err(Error::Size(format!("qubit {q} listed twice")));
        }
        seen |= 1 << q;
    }
    let mut out = Counts::new(qubits.len());
    for (outcome, c) in counts.iter() {
        let b = qubits
            .iter()
            .enumerate()
            .fold(0u64, |acc, (k, &q)| acc | (((outcome >> q) & 1) << k));
        out.add(b, c);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marginal_examples() {
        let c = Counts::from_bitstrings([("01", 3), ("11", 5)]).unwrap();
        let m = marginalize(&c, &[0]).unwrap();
        assert_eq!(m.to_bitstring_table(), BTreeMap::from([("1".to_string(), 8)]));
        let c = Counts::from_bitstrings([("01", 3), ("10", 5)]).unwrap();
        let m = marginalize(&c, &[1]).unwrap();
        assert_eq!(m.get_bits("0"), 3);
        assert_eq!(m.get_bits("1"), 5);
        assert_eq!(marginalize(&c, &[0, 1]).unwrap(), c);
        assert!(marginalize(&c, &[]).is_err());
    }

    #[test]
    fn multinomial_preserves_total() {
        let mut rng = rng_from_seed(1);
        let mut counts = Counts::new(2);
        sample_into(&[0.1, 0.2, 0.3, 0.4], 12345, &mut rng, &mut counts);
        assert_eq!(counts.shots(), 12345);
    }
}
