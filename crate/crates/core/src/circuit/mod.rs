//! Circuit IR, ansatz families and right-hand-side preparation circuits.

mod ansatz;
mod gate;
mod rhs;

use std::fmt;
use std::str::FromStr;

pub use ansatz::{build_ansatz, param_count, AnsatzFamily};
pub use gate::{Angle, Gate, GateKind};
pub use rhs::{build_rhs, RhsKind, XPlacement};

use crate::error::{Error, Result};

/// Ordered gate list on `n_qubits` qubits referencing `n_params` symbolic parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    n_params: usize,
    gates: Vec<Gate>,
}

/// Where a symbolic parameter is used: gate index, angle slot, and the chain-rule factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Occurrence {
    pub gate: usize,
    pub slot: usize,
    pub param: usize,
    pub scale: f64,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self::with_params(n_qubits, 0)
    }

    pub fn with_params(n_qubits: usize, n_params: usize) -> Self {
        Circuit {
            n_qubits,
            n_params,
            gates: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.n_qubits, self.n_params)?;
        self.gates.push(gate);
        Ok(())
    }

    /// Builder-internal push for gates that are correct by construction.
    pub(crate) fn add(&mut self, gate: Gate) {
        debug_assert!(gate.validate(self.n_qubits, self.n_params).is_ok(), "{gate}");
        self.gates.push(gate);
    }

    /// Append `other`, which may act on a smaller register (mapped onto the low qubits).
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.n_qubits > self.n_qubits {
            return Err(Error::Size(format!(
                "cannot append a {}-qubit circuit to a {}-qubit one",
                other.n_qubits, self.n_qubits
            )));
        }
        self.n_params = self.n_params.max(other.n_params);
        self.gates.extend(other.gates.iter().cloned());
        Ok(())
    }

    /// Same gates on a register of `n_qubits >= self.n_qubits()`.
    pub fn widened(&self, n_qubits: usize) -> Result<Circuit> {
        let mut c = Circuit::with_params(n_qubits, self.n_params);
        c.append(self)?;
        Ok(c)
    }

    pub fn inverse(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            n_params: self.n_params,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// Every gate gains qubit `n_qubits` (a new top qubit) as an extra control.
    pub fn controlled(&self) -> Circuit {
        let ctrl = self.n_qubits;
        Circuit {
            n_qubits: self.n_qubits + 1,
            n_params: self.n_params,
            gates: self
                .gates
                .iter()
                .map(|g| g.clone().with_controls(&[ctrl]))
                .collect(),
        }
    }

    /// Replace every symbolic angle by its value.
    pub fn bind(&self, params: &[f64]) -> Result<Circuit> {
        if params.len() != self.n_params {
            return Err(Error::Binding(format!(
                "expected {} parameters, got {}",
                self.n_params,
                params.len()
            )));
        }
        let mut gates = Vec::with_capacity(self.gates.len());
        for g in &self.gates {
            let angles = g
                .angles
                .iter()
                .map(|a| a.resolve(params).map(Angle::Fixed))
                .collect::<Result<Vec<_>>>()?;
            gates.push(Gate { angles, ..g.clone() });
        }
        Ok(Circuit {
            n_qubits: self.n_qubits,
            n_params: 0,
            gates,
        })
    }

    pub fn occurrences(&self) -> Vec<Occurrence> {
        let mut out = Vec::new();
        for (gi, g) in self.gates.iter().enumerate() {
            for (slot, a) in g.angles.iter().enumerate() {
                if let Angle::Param { index, scale, .. } = *a {
                    out.push(Occurrence {
                        gate: gi,
                        slot,
                        param: index,
                        scale,
                    });
                }
            }
        }
        out
    }

    /// Copy with the angle at (`gate`, `slot`) shifted by `delta`.
    pub fn with_shift(&self, gate: usize, slot: usize, delta: f64) -> Circuit {
        let mut c = self.clone();
        let a = &mut c.gates[gate].angles[slot];
        *a = a.shifted(delta);
        c
    }

    pub fn cnot_count(&self) -> usize {
        self.gates.iter().map(Gate::cnot_cost).sum()
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn from_text(text: &str) -> Result<Circuit> {
        text.parse()
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "circuit n_qubits={} n_params={}", self.n_qubits, self.n_params)?;
        for g in &self.gates {
            writeln!(f, "{g}")?;
        }
        Ok(())
    }
}

impl FromStr for Circuit {
    type Err = Error;

    fn from_str(text: &str) -> Result<Circuit> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 0,
            message: "empty circuit text".into(),
        })?;
        let perr = |line: usize, message: String| Error::Parse { line, message };
        let mut fields = header.split_whitespace();
        if fields.next() != Some("circuit") {
            return Err(perr(hline, "expected `circuit` header".into()));
        }
        let (mut n_qubits, mut n_params) = (None, None);
        for f in fields {
            let (k, v) = f.split_once('=').ok_or_else(|| perr(hline, format!("malformed `{f}`")))?;
            let v: usize = v.parse().map_err(|_| perr(hline, format!("bad value in `{f}`")))?;
            match k {
                "n_qubits" => n_qubits = Some(v),
                "n_params" => n_params = Some(v),
                _ => return Err(perr(hline, format!("unknown header field `{k}`"))),
            }
        }
        let mut c = Circuit::with_params(
            n_qubits.ok_or_else(|| perr(hline, "missing n_qubits".into()))?,
            n_params.unwrap_or(0),
        );
        for (line, l) in lines {
            let g: Gate = l.parse().map_err(|e: Error| perr(line, e.to_string()))?;
            c.push(g).map_err(|e| perr(line, e.to_string()))?;
        }
        Ok(c)
    }
}
