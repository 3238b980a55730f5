use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuit::{Angle, Circuit, Gate};
use crate::error::{Error, Result};

/// Parametrized circuit families for `|psi(theta)>`.
///
/// Entangling blocks repeat once per layer; `layers = 0` leaves only the
/// initial rotation column (or the Hadamard column for the QAOA families).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnsatzFamily {
    /// RY column, then per layer a CZ chain followed by an RY column.
    LinearRyCz,
    /// RY column, then per layer CZ on even pairs, RY on those qubits, CZ on odd
    /// pairs, RY on those qubits.
    LinearAltRyCz,
    /// Alternating CX pairs plus a CX(0, n-1) wrap, each followed by RX-RY-RZ
    /// triples on the touched qubits.
    LinearAltPeriodicU3Cx,
    /// RZ column, `layers` forward blocks (alternating CX pairs and wrap) then
    /// `layers` mirrored blocks with reversed CX direction, RZ after each column.
    LinearAltPeriodicBidirRzCx,
    /// Hadamard column, then per layer a shared-angle RZZ chain and shared-angle RX column.
    Qaoa,
    /// QAOA with an extra YY-type coupling between qubits 0 and n-1 sharing the RZZ angle.
    QaoaPeriodic,
    /// RX column, then per layer a CX chain and an RX column.
    LinearRxCx,
    /// RZ column, then per layer a CX chain and an RZ column.
    LinearRzCx,
    /// RX-RY-RZ triples, then per layer a CX chain and another triple column.
    LinearU3Cx,
}

impl AnsatzFamily {
    pub const ALL: [AnsatzFamily; 9] = [
        AnsatzFamily::LinearRyCz,
        AnsatzFamily::LinearAltRyCz,
        AnsatzFamily::LinearAltPeriodicU3Cx,
        AnsatzFamily::LinearAltPeriodicBidirRzCx,
        AnsatzFamily::Qaoa,
        AnsatzFamily::QaoaPeriodic,
        AnsatzFamily::LinearRxCx,
        AnsatzFamily::LinearRzCx,
        AnsatzFamily::LinearU3Cx,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AnsatzFamily::LinearRyCz => "linear-ry-cz",
            AnsatzFamily::LinearAltRyCz => "linear-alt-ry-cz",
            AnsatzFamily::LinearAltPeriodicU3Cx => "linear-alt-periodic-u3-cx",
            AnsatzFamily::LinearAltPeriodicBidirRzCx => "linear-alt-periodic-bidir-rz-cx",
            AnsatzFamily::Qaoa => "qaoa",
            AnsatzFamily::QaoaPeriodic => "qaoa-periodic",
            AnsatzFamily::LinearRxCx => "linear-rx-cx",
            AnsatzFamily::LinearRzCx => "linear-rz-cx",
            AnsatzFamily::LinearU3Cx => "linear-u3-cx",
        }
    }

    /// Families whose states have real amplitudes for every real parameter vector.
    pub fn is_real(self) -> bool {
        matches!(self, AnsatzFamily::LinearRyCz | AnsatzFamily::LinearAltRyCz)
    }
}

impl fmt::Display for AnsatzFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AnsatzFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace(['_', '-'], "");
        AnsatzFamily::ALL
            .into_iter()
            .find(|f| f.name().replace('-', "") == key)
            .ok_or_else(|| Error::config("problem.family", format!("unknown ansatz family `{s}`")))
    }
}

pub fn param_count(family: AnsatzFamily, n: usize, layers: usize) -> Result<usize> {
    check(n)?;
    Ok(match family {
        AnsatzFamily::LinearRyCz | AnsatzFamily::LinearRxCx | AnsatzFamily::LinearRzCx => n * (layers + 1),
        AnsatzFamily::LinearU3Cx => 3 * n * (layers + 1),
        AnsatzFamily::LinearAltRyCz => n + layers * (2 * n - 2),
        AnsatzFamily::LinearAltPeriodicU3Cx => 3 * n + 6 * n * layers,
        AnsatzFamily::LinearAltPeriodicBidirRzCx => n + 4 * n * layers,
        AnsatzFamily::Qaoa | AnsatzFamily::QaoaPeriodic => 2 * layers,
    })
}

fn check(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::config("problem.n", format!("ansatz needs at least 2 qubits, got {n}")));
    }
    if n > crate::sim::MAX_QUBITS {
        return Err(Error::Size(format!("{n} qubits exceeds the simulator limit")));
    }
    Ok(())
}

/// Pairs `(i, i+1)` with `i` of the given parity.
fn pairs(n: usize, parity: usize) -> impl Iterator<Item = (usize, usize)> {
    (parity..n.saturating_sub(1)).step_by(2).map(|i| (i, i + 1))
}

fn chain(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n - 1).map(|i| (i, i + 1))
}

struct Builder {
    c: Circuit,
    next: usize,
}

impl Builder {
    fn param(&mut self) -> Angle {
        let a = Angle::param(self.next);
        self.next += 1;
        a
    }

    fn ry(&mut self, q: usize) {
        let a = self.param();
        self.c.add(Gate::ry(q, a));
    }

    fn rx(&mut self, q: usize) {
        let a = self.param();
        self.c.add(Gate::rx(q, a));
    }

    fn rz(&mut self, q: usize) {
        let a = self.param();
        self.c.add(Gate::rz(q, a));
    }

    fn triple(&mut self, q: usize) {
        self.rx(q);
        self.ry(q);
        self.rz(q);
    }
}

pub fn build_ansatz(family: AnsatzFamily, n: usize, layers: usize) -> Result<Circuit> {
    let p = param_count(family, n, layers)?;
    let mut b = Builder {
        c: Circuit::with_params(n, p),
        next: 0,
    };
    match family {
        AnsatzFamily::LinearRyCz | AnsatzFamily::LinearRxCx | AnsatzFamily::LinearRzCx | AnsatzFamily::LinearU3Cx => {
            let rot = |b: &mut Builder, q: usize| match family {
                AnsatzFamily::LinearRyCz => b.ry(q),
                AnsatzFamily::LinearRxCx => b.rx(q),
                AnsatzFamily::LinearRzCx => b.rz(q),
                _ => b.triple(q),
            };
            (0..n).for_each(|q| rot(&mut b, q));
            for _ in 0..layers {
                for (i, j) in chain(n) {
                    b.c.add(if family == AnsatzFamily::LinearRyCz {
                        Gate::cz(i, j)
                    } else {
                        Gate::cx(i, j)
                    });
                }
                (0..n).for_each(|q| rot(&mut b, q));
            }
        }
        AnsatzFamily::LinearAltRyCz => {
            (0..n).for_each(|q| b.ry(q));
            for _ in 0..layers {
                for parity in [0, 1] {
                    let ps: Vec<_> = pairs(n, parity).collect();
                    for &(i, j) in &ps {
                        b.c.add(Gate::cz(i, j));
                    }
                    for &(i, j) in &ps {
                        b.ry(i);
                        b.ry(j);
                    }
                }
            }
        }
        AnsatzFamily::LinearAltPeriodicU3Cx => {
            (0..n).for_each(|q| b.triple(q));
            for _ in 0..layers {
                alternating_block(&mut b, n, false, Builder::triple);
            }
        }
        AnsatzFamily::LinearAltPeriodicBidirRzCx => {
            (0..n).for_each(|q| b.rz(q));
            for _ in 0..layers {
                alternating_block(&mut b, n, false, Builder::rz);
            }
            for _ in 0..layers {
                alternating_block(&mut b, n, true, Builder::rz);
            }
        }
        AnsatzFamily::Qaoa | AnsatzFamily::QaoaPeriodic => {
            (0..n).for_each(|q| b.c.add(Gate::h(q)));
            for k in 0..layers {
                let zz = Angle::param(2 * k);
                let x = Angle::param(2 * k + 1);
                for (i, j) in chain(n) {
                    b.c.add(Gate::rzz(i, j, zz));
                }
                if family == AnsatzFamily::QaoaPeriodic {
                    let last = n - 1;
                    b.c.add(Gate::rx(0, Angle::Fixed(FRAC_PI_2)));
                    b.c.add(Gate::rx(last, Angle::Fixed(FRAC_PI_2)));
                    b.c.add(Gate::cx(0, last));
                    b.c.add(Gate::rz(last, zz));
                    b.c.add(Gate::cx(0, last));
                    b.c.add(Gate::rx(0, Angle::Fixed(-FRAC_PI_2)));
                    b.c.add(Gate::rx(last, Angle::Fixed(-FRAC_PI_2)));
                }
                (0..n).for_each(|q| b.c.add(Gate::rx(q, x)));
            }
            b.next = p;
        }
    }
    debug_assert_eq!(b.next, p);
    Ok(b.c)
}

/// CX on even pairs, rotations; CX on odd pairs, rotations; CX between the end
/// qubits, rotations on both. `reverse` swaps control and target.
fn alternating_block(b: &mut Builder, n: usize, reverse: bool, rot: fn(&mut Builder, usize)) {
    let cx = |i: usize, j: usize| if reverse { Gate::cx(j, i) } else { Gate::cx(i, j) };
    for parity in [0, 1] {
        let ps: Vec<_> = pairs(n, parity).collect();
        for &(i, j) in &ps {
            b.c.add(cx(i, j));
        }
        for &(i, j) in &ps {
            rot(b, i);
            rot(b, j);
        }
    }
    b.c.add(cx(0, n - 1));
    rot(b, 0);
    rot(b, n - 1);
}
