//! Gate-level circuit IR.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A gate of the circuit IR. Angles are in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateOp {
    /// Rz(γ)·Rx(θ)·Rz(φ).
    Uzxz { qubit: usize, gamma: f64, theta: f64, phi: f64 },
    Rx { qubit: usize, theta: f64 },
    Rz { qubit: usize, phi: f64 },
    X { qubit: usize },
    H { qubit: usize },
    Cx { control: usize, target: usize },
    /// Phase gate diag(1, e^{iλ}).
    P { qubit: usize, lambda: f64 },
}

impl GateOp {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            GateOp::Uzxz { qubit, .. }
            | GateOp::Rx { qubit, .. }
            | GateOp::Rz { qubit, .. }
            | GateOp::X { qubit }
            | GateOp::H { qubit }
            | GateOp::P { qubit, .. } => vec![qubit],
            GateOp::Cx { control, target } => vec![control, target],
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            GateOp::Uzxz { gamma, theta, phi, .. } => vec![gamma, theta, phi],
            GateOp::Rx { theta, .. } => vec![theta],
            GateOp::Rz { phi, .. } => vec![phi],
            GateOp::P { lambda, .. } => vec![lambda],
            GateOp::X { .. } | GateOp::H { .. } | GateOp::Cx { .. } => vec![],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GateOp::Uzxz { .. } => "UZXZ",
            GateOp::Rx { .. } => "RX",
            GateOp::Rz { .. } => "RZ",
            GateOp::X { .. } => "X",
            GateOp::H { .. } => "H",
            GateOp::Cx { .. } => "CX",
            GateOp::P { .. } => "P",
        }
    }

    /// The inverse gate.
    pub fn inverse(&self) -> GateOp {
        match *self {
            GateOp::Uzxz { qubit, gamma, theta, phi } => {
                GateOp::Uzxz { qubit, gamma: -phi, theta: -theta, phi: -gamma }
            }
            GateOp::Rx { qubit, theta } => GateOp::Rx { qubit, theta: -theta },
            GateOp::Rz { qubit, phi } => GateOp::Rz { qubit, phi: -phi },
            GateOp::P { qubit, lambda } => GateOp::P { qubit, lambda: -lambda },
            op @ (GateOp::X { .. } | GateOp::H { .. } | GateOp::Cx { .. }) => op,
        }
    }

    fn check(&self, n_qubits: usize) -> Result<()> {
        for q in self.qubits() {
            if q >= n_qubits {
                return Err(Error::Index { index: q, n_qubits });
            }
        }
        if let GateOp::Cx { control, target } = *self {
            if control == target {
                return Err(Error::Domain(format!("CX control and target are both qubit {control}")));
            }
        }
        if self.params().iter().any(|p| !p.is_finite()) {
            return Err(Error::Domain(format!("{} has a non-finite angle", self.name())));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct GateRepr {
    gate: String,
    qubits: Vec<usize>,
    #[serde(default)]
    params: Vec<f64>,
}

impl From<&GateOp> for GateRepr {
    fn from(op: &GateOp) -> Self {
        GateRepr { gate: op.name().to_string(), qubits: op.qubits(), params: op.params() }
    }
}

impl TryFrom<GateRepr> for GateOp {
    type Error = Error;

    fn try_from(r: GateRepr) -> Result<Self> {
        let arity = |q: usize, p: usize| -> Result<()> {
            if r.qubits.len() != q || r.params.len() != p {
                return Err(Error::Data(format!(
                    "gate {} expects {q} qubit(s) and {p} param(s), got {} and {}",
                    r.gate,
                    r.qubits.len(),
                    r.params.len()
                )));
            }
            Ok(())
        };
        let op = match r.gate.to_ascii_uppercase().as_str() {
            "UZXZ" => {
                arity(1, 3)?;
                GateOp::Uzxz { qubit: r.qubits[0], gamma: r.params[0], theta: r.params[1], phi: r.params[2] }
            }
            "RX" => {
                arity(1, 1)?;
                GateOp::Rx { qubit: r.qubits[0], theta: r.params[0] }
            }
            "RZ" => {
                arity(1, 1)?;
                GateOp::Rz { qubit: r.qubits[0], phi: r.params[0] }
            }
            "P" => {
                arity(1, 1)?;
                GateOp::P { qubit: r.qubits[0], lambda: r.params[0] }
            }
            "X" => {
                arity(1, 0)?;
                GateOp::X { qubit: r.qubits[0] }
            }
            "H" => {
                arity(1, 0)?;
                GateOp::H { qubit: r.qubits[0] }
            }
            "CX" => {
                arity(2, 0)?;
                GateOp::Cx { control: r.qubits[0], target: r.qubits[1] }
            }
            other => return Err(Error::Data(format!("unknown gate '{other}'"))),
        };
        Ok(op)
    }
}

/// An ordered list of gates on `n_qubits` qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CircuitRepr", into = "CircuitRepr")]
pub struct GateCircuit {
    n_qubits: usize,
    ops: Vec<GateOp>,
}

#[derive(Serialize, Deserialize)]
struct CircuitRepr {
    n_qubits: usize,
    ops: Vec<GateRepr>,
}

impl From<GateCircuit> for CircuitRepr {
    fn from(c: GateCircuit) -> Self {
        CircuitRepr { n_qubits: c.n_qubits, ops: c.ops.iter().map(GateRepr::from).collect() }
    }
}

impl TryFrom<CircuitRepr> for GateCircuit {
    type Error = Error;

    fn try_from(r: CircuitRepr) -> Result<Self> {
        let ops = r.ops.into_iter().map(GateOp::try_from).collect::<Result<Vec<_>>>()?;
        GateCircuit::from_ops(r.n_qubits, ops)
    }
}

impl GateCircuit {
    pub fn new(n_qubits: usize) -> Self {
        GateCircuit { n_qubits, ops: Vec::new() }
    }

    pub fn from_ops(n_qubits: usize, ops: Vec<GateOp>) -> Result<Self> {
        let mut circuit = GateCircuit::new(n_qubits);
        for op in ops {
            circuit.push(op)?;
        }
        Ok(circuit)
    }

    pub fn push(&mut self, op: GateOp) -> Result<()> {
        op.check(self.n_qubits)?;
        self.ops.push(op);
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Appends every gate of `other`.
    pub fn extend(&mut self, other: &GateCircuit) -> Result<()> {
        for op in &other.ops {
            self.push(*op)?;
        }
        Ok(())
    }

    /// The adjoint circuit: reversed order, each gate inverted.
    pub fn invert(&self) -> GateCircuit {
        GateCircuit { n_qubits: self.n_qubits, ops: self.ops.iter().rev().map(GateOp::inverse).collect() }
    }

    /// Relabels qubits: qubit `q` becomes `perm[q]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<GateCircuit> {
        if perm.len() != self.n_qubits {
            return Err(Error::Size(format!("permutation of length {} for {} qubits", perm.len(), self.n_qubits)));
        }
        let map = |q: usize| perm[q];
        let ops = self
            .ops
            .iter()
            .map(|op| match *op {
                GateOp::Uzxz { qubit, gamma, theta, phi } => GateOp::Uzxz { qubit: map(qubit), gamma, theta, phi },
                GateOp::Rx { qubit, theta } => GateOp::Rx { qubit: map(qubit), theta },
                GateOp::Rz { qubit, phi } => GateOp::Rz { qubit: map(qubit), phi },
                GateOp::X { qubit } => GateOp::X { qubit: map(qubit) },
                GateOp::H { qubit } => GateOp::H { qubit: map(qubit) },
                GateOp::Cx { control, target } => GateOp::Cx { control: map(control), target: map(target) },
                GateOp::P { qubit, lambda } => GateOp::P { qubit: map(qubit), lambda },
            })
            .collect();
        GateCircuit::from_ops(self.n_qubits, ops)
    }
}
