use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};

/// Right-hand-side states `|f>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RhsKind {
    /// Uniform load: Hadamard on every qubit.
    Hn,
    /// Step load: Hadamard on `n-1` qubits and X on the remaining one.
    HnX,
}

/// Which qubit receives the X gate of [`RhsKind::HnX`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum XPlacement {
    /// Qubit `n-1`: support on the upper half of the grid (a jump in the load).
    #[default]
    MostSignificant,
    /// Qubit 0: support on odd grid points.
    LeastSignificant,
}

pub fn build_rhs(kind: RhsKind, n: usize, placement: XPlacement) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::config("problem.n", format!("right-hand side needs at least 2 qubits, got {n}")));
    }
    let mut c = Circuit::new(n);
    let xq = match placement {
        XPlacement::MostSignificant => n - 1,
        XPlacement::LeastSignificant => 0,
    };
    for q in 0..n {
        if kind == RhsKind::HnX && q == xq {
            c.add(Gate::x(q));
        } else {
            c.add(Gate::h(q));
        }
    }
    Ok(c)
}
