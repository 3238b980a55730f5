//! Dense statevector simulation, finite-shot sampling and trajectory noise.

mod noise;
mod sampling;
mod state;

pub use noise::{sample_counts_noisy, NoiseParams};
pub use sampling::{marginalize, sample_counts, Counts};
pub use state::{matrix, StateVector};

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 24;

/// Eigenvalue assigned to each computational-basis outcome after a
/// diagonalizing circuit. Bit `q` of the outcome is qubit `q`.
#[derive(Clone, Debug, PartialEq)]
pub enum EigenMap {
    /// `(-1)^popcount(b & mask)`.
    Parity { mask: u64 },
    /// `(-1)^b0` when bit `level` is set and bits `1..level` are clear, else 0.
    LadderPair { level: usize },
    /// `(-1)^b0` unless bits `1..n_qubits` are all clear, in which case 0.
    ShiftedPair { n_qubits: usize },
    /// 1 on the all-zeros outcome, 0 elsewhere.
    AllZeros,
    /// `sum_k w_k (-1)^popcount(b & mask_k)`.
    Weighted(Vec<(f64, u64)>),
}

impl EigenMap {
    pub fn value(&self, b: u64) -> f64 {
        let sign = |m: u64| if (b & m).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        match self {
            EigenMap::Parity { mask } => sign(*mask),
            EigenMap::LadderPair { level } => {
                let between = ((1u64 << level) - 1) & !1;
                if b & (1 << level) != 0 && b & between == 0 {
                    sign(1)
                } else {
                    0.0
                }
            }
            EigenMap::ShiftedPair { n_qubits } => {
                let upper = ((1u64 << n_qubits) - 1) & !1;
                if b & upper != 0 {
                    sign(1)
                } else {
                    0.0
                }
            }
            EigenMap::AllZeros => {
                if b == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            EigenMap::Weighted(terms) => terms.iter().map(|&(w, m)| w * sign(m)).sum(),
        }
    }

    /// Largest `|value|` over all outcomes (used for variance bounds).
    pub fn max_abs(&self) -> f64 {
        match self {
            EigenMap::Weighted(terms) => terms.iter().map(|(w, _)| w.abs()).sum(),
            _ => 1.0,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            EigenMap::Parity { mask } => format!("parity mask={mask:#b}"),
            EigenMap::LadderPair { level } => format!("ladder-pair level={level}"),
            EigenMap::ShiftedPair { n_qubits } => format!("shifted-pair n={n_qubits}"),
            EigenMap::AllZeros => "all-zeros".to_string(),
            EigenMap::Weighted(terms) => {
                let parts: Vec<String> = terms.iter().map(|(w, m)| format!("{w:?}@{m:#b}")).collect();
                format!("weighted {}", parts.join(" "))
            }
        }
    }
}
