use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gate kinds understood by the simulator.
///
/// `CX` takes `[control, target]`, `CZ` and `RZZ` take two symmetric qubits.
/// Any kind may carry additional control qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    X,
    H,
    RX,
    RY,
    RZ,
    U3,
    CX,
    CZ,
    RZZ,
}

impl GateKind {
    pub fn n_qubits(self) -> usize {
        match self {
            GateKind::CX | GateKind::CZ | GateKind::RZZ => 2,
            _ => 1,
        }
    }

    pub fn n_angles(self) -> usize {
        match self {
            GateKind::RX | GateKind::RY | GateKind::RZ | GateKind::RZZ => 1,
            GateKind::U3 => 3,
            _ => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::H => "h",
            GateKind::RX => "rx",
            GateKind::RY => "ry",
            GateKind::RZ => "rz",
            GateKind::U3 => "u3",
            GateKind::CX => "cx",
            GateKind::CZ => "cz",
            GateKind::RZZ => "rzz",
        }
    }

    /// Rotation gates `exp(-i a G / 2)` with a Pauli-product generator `G`.
    pub fn is_pauli_rotation(self) -> bool {
        matches!(self, GateKind::RX | GateKind::RY | GateKind::RZ | GateKind::RZZ)
    }
}

impl FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "x" => GateKind::X,
            "h" => GateKind::H,
            "rx" => GateKind::RX,
            "ry" => GateKind::RY,
            "rz" => GateKind::RZ,
            "u3" => GateKind::U3,
            "cx" => GateKind::CX,
            "cz" => GateKind::CZ,
            "rzz" => GateKind::RZZ,
            other => return Err(Error::config("gate.kind", format!("unknown gate `{other}`"))),
        })
    }
}

/// A gate angle: either a bound value or `scale * theta[index] + offset`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Angle {
    Fixed(f64),
    Param { index: usize, scale: f64, offset: f64 },
}

impl Angle {
    pub fn param(index: usize) -> Self {
        Angle::Param {
            index,
            scale: 1.0,
            offset: 0.0,
        }
    }

    pub fn resolve(&self, params: &[f64]) -> Result<f64> {
        match *self {
            Angle::Fixed(v) => Ok(v),
            Angle::Param { index, scale, offset } => params
                .get(index)
                .map(|t| scale * t + offset)
                .ok_or_else(|| {
                    Error::Binding(format!(
                        "parameter theta[{index}] unresolved ({} values supplied)",
                        params.len()
                    ))
                }),
        }
    }

    pub fn negated(self) -> Self {
        match self {
            Angle::Fixed(v) => Angle::Fixed(-v),
            Angle::Param { index, scale, offset } => Angle::Param {
                index,
                scale: -scale,
                offset: -offset,
            },
        }
    }

    pub fn shifted(self, delta: f64) -> Self {
        match self {
            Angle::Fixed(v) => Angle::Fixed(v + delta),
            Angle::Param { index, scale, offset } => Angle::Param {
                index,
                scale,
                offset: offset + delta,
            },
        }
    }

    pub fn param_index(&self) -> Option<usize> {
        match *self {
            Angle::Param { index, .. } => Some(index),
            Angle::Fixed(_) => None,
        }
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Angle::Fixed(v) => write!(f, "{v:?}"),
            Angle::Param { index, scale, offset } => {
                if scale == 1.0 && offset == 0.0 {
                    write!(f, "${index}")
                } else {
                    write!(f, "${index}*{scale:?}+{offset:?}")
                }
            }
        }
    }
}

impl FromStr for Angle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |m: &str| Error::config("gate.angle", format!("{m}: `{s}`"));
        if let Some(rest) = s.strip_prefix('$') {
            let (idx, tail) = match rest.find('*') {
                Some(p) => (&rest[..p], Some(&rest[p + 1..])),
                None => (rest, None),
            };
            let index: usize = idx.parse().map_err(|_| bad("bad parameter index"))?;
            let (scale, offset) = match tail {
                None => (1.0, 0.0),
                Some(t) => {
                    // offset may itself be negative, so split on the first '+' after the scale's exponent/sign
                    let split = t
                        .char_indices()
                        .skip(1)
                        .find(|&(i, c)| c == '+' && !matches!(t.as_bytes()[i - 1], b'e' | b'E'))
                        .map(|(i, _)| i)
                        .ok_or_else(|| bad("missing offset"))?;
                    let scale: f64 = t[..split].parse().map_err(|_| bad("bad scale"))?;
                    let offset: f64 = t[split + 1..].parse().map_err(|_| bad("bad offset"))?;
                    (scale, offset)
                }
            };
            Ok(Angle::Param { index, scale, offset })
        } else {
            s.parse::<f64>().map(Angle::Fixed).map_err(|_| bad("bad angle"))
        }
    }
}

/// One gate application.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub angles: Vec<Angle>,
    pub controls: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: Vec<usize>, angles: Vec<Angle>) -> Self {
        Gate {
            kind,
            qubits,
            angles,
            controls: Vec::new(),
        }
    }

    pub fn x(q: usize) -> Self {
        Gate::new(GateKind::X, vec![q], vec![])
    }

    pub fn h(q: usize) -> Self {
        Gate::new(GateKind::H, vec![q], vec![])
    }

    pub fn rx(q: usize, a: Angle) -> Self {
        Gate::new(GateKind::RX, vec![q], vec![a])
    }

    pub fn ry(q: usize, a: Angle) -> Self {
        Gate::new(GateKind::RY, vec![q], vec![a])
    }

    pub fn rz(q: usize, a: Angle) -> Self {
        Gate::new(GateKind::RZ, vec![q], vec![a])
    }

    pub fn u3(q: usize, theta: Angle, phi: Angle, lambda: Angle) -> Self {
        Gate::new(GateKind::U3, vec![q], vec![theta, phi, lambda])
    }

    pub fn cx(control: usize, target: usize) -> Self {
        Gate::new(GateKind::CX, vec![control, target], vec![])
    }

    pub fn cz(a: usize, b: usize) -> Self {
        Gate::new(GateKind::CZ, vec![a, b], vec![])
    }

    pub fn rzz(a: usize, b: usize, angle: Angle) -> Self {
        Gate::new(GateKind::RZZ, vec![a, b], vec![angle])
    }

    /// Multi-controlled X on `target`.
    pub fn mcx(controls: &[usize], target: usize) -> Self {
        Gate::x(target).with_controls(controls)
    }

    pub fn with_controls(mut self, controls: &[usize]) -> Self {
        self.controls.extend_from_slice(controls);
        self
    }

    /// All qubits touched, targets first.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.qubits.iter().chain(self.controls.iter()).copied()
    }

    pub fn arity(&self) -> usize {
        self.qubits.len() + self.controls.len()
    }

    pub fn inverse(&self) -> Gate {
        let angles = match self.kind {
            // U3(t, p, l)^-1 = U3(-t, -l, -p)
            GateKind::U3 => vec![
                self.angles[0].negated(),
                self.angles[2].negated(),
                self.angles[1].negated(),
            ],
            _ => self.angles.iter().map(|a| a.negated()).collect(),
        };
        Gate {
            kind: self.kind,
            qubits: self.qubits.clone(),
            angles,
            controls: self.controls.clone(),
        }
    }

    pub(crate) fn validate(&self, n_qubits: usize, n_params: usize) -> Result<()> {
        if self.qubits.len() != self.kind.n_qubits() {
            return Err(Error::config(
                "gate.qubits",
                format!("{} expects {} qubits, got {}", self.kind.name(), self.kind.n_qubits(), self.qubits.len()),
            ));
        }
        if self.angles.len() != self.kind.n_angles() {
            return Err(Error::config(
                "gate.angles",
                format!("{} expects {} angles, got {}", self.kind.name(), self.kind.n_angles(), self.angles.len()),
            ));
        }
        let mut seen = 0u64;
        for q in self.support() {
            if q >= n_qubits {
                return Err(Error::Index { index: q, n_qubits });
            }
            if seen & (1 << q) != 0 {
                return Err(Error::config("gate.qubits", format!("qubit {q} used twice in one gate")));
            }
            seen |= 1 << q;
        }
        for a in &self.angles {
            if let Some(index) = a.param_index() {
                if index >= n_params {
                    return Err(Error::Binding(format!(
                        "parameter theta[{index}] out of range for {n_params} parameters"
                    )));
                }
            }
        }
        Ok(())
    }

    /// CNOT-equivalent count under textbook decompositions without ancillas.
    pub fn cnot_cost(&self) -> usize {
        let extra = self.controls.len();
        match self.kind {
            GateKind::CX => mcx_cost(extra + 1),
            GateKind::CZ => mcx_cost(extra + 1),
            GateKind::X => mcx_cost(extra),
            GateKind::RZZ => 2 * controlled_1q_cost(extra).max(1),
            _ => controlled_1q_cost(extra),
        }
    }
}

fn mcx_cost(controls: usize) -> usize {
    match controls {
        0 => 0,
        1 => 1,
        2 => 6,
        k => 6 * (2 * k - 3),
    }
}

fn controlled_1q_cost(controls: usize) -> usize {
    match controls {
        0 => 0,
        1 => 2,
        k => 2 * mcx_cost(k),
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| {
            if v.is_empty() {
                "-".to_string()
            } else {
                v.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(",")
            }
        };
        let angles = if self.angles.is_empty() {
            "-".to_string()
        } else {
            self.angles.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(";")
        };
        write!(
            f,
            "{} q={} c={} a={}",
            self.kind.name(),
            join(&self.qubits),
            join(&self.controls),
            angles
        )
    }
}

impl FromStr for Gate {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let mut parts = line.split_whitespace();
        let kind: GateKind = parts
            .next()
            .ok_or_else(|| Error::config("gate", "empty gate line"))?
            .parse()?;
        let mut qubits = None;
        let mut controls = None;
        let mut angles = None;
        for field in parts {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::config("gate", format!("malformed field `{field}`")))?;
            let list = |v: &str| -> Result<Vec<usize>> {
                if v == "-" {
                    return Ok(Vec::new());
                }
                v.split(',')
                    .map(|q| q.parse().map_err(|_| Error::config("gate.qubits", format!("bad index `{q}`"))))
                    .collect()
            };
            match key {
                "q" => qubits = Some(list(value)?),
                "c" => controls = Some(list(value)?),
                "a" => {
                    angles = Some(if value == "-" {
                        Vec::new()
                    } else {
                        value.split(';').map(str::parse).collect::<Result<Vec<Angle>>>()?
                    })
                }
                other => return Err(Error::config("gate", format!("unknown field `{other}`"))),
            }
        }
        Ok(Gate {
            kind,
            qubits: qubits.ok_or_else(|| Error::config("gate.qubits", "missing q="))?,
            angles: angles.unwrap_or_default(),
            controls: controls.unwrap_or_default(),
        })
    }
}
