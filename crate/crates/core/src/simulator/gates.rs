//! Reference gate matrices and the ideal gate-level statevector backend.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

use super::state::QuantumState;
use crate::compiler::{GateCircuit, GateOp};
use crate::error::{Error, Result};

pub type Mat2 = Matrix2<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Rz(φ) = diag(e^{-iφ/2}, e^{iφ/2}).
pub fn mat_rz(phi: f64) -> Mat2 {
    Mat2::new(Complex64::from_polar(1.0, -phi / 2.0), c(0.0, 0.0), c(0.0, 0.0), Complex64::from_polar(1.0, phi / 2.0))
}

/// Rx(θ) = cos(θ/2)·I − i·sin(θ/2)·σx.
pub fn mat_rx(theta: f64) -> Mat2 {
    let (s, co) = (theta / 2.0).sin_cos();
    Mat2::new(c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0))
}

/// U(γ, θ, φ) = Rz(γ)·Rx(θ)·Rz(φ) written out element-wise.
pub fn mat_uzxz(gamma: f64, theta: f64, phi: f64) -> Mat2 {
    let (s, co) = (theta / 2.0).sin_cos();
    let minus_i = c(0.0, -1.0);
    Mat2::new(
        Complex64::from_polar(co, -(phi + gamma) / 2.0),
        minus_i * Complex64::from_polar(s, (phi - gamma) / 2.0),
        minus_i * Complex64::from_polar(s, (gamma - phi) / 2.0),
        Complex64::from_polar(co, (phi + gamma) / 2.0),
    )
}

/// Equatorial rotation by θ about (cos φ, −sin φ, 0): Rz(−φ)·Rx(θ)·Rz(φ).
pub fn mat_equatorial(theta: f64, phi: f64) -> Mat2 {
    let (s, co) = (theta / 2.0).sin_cos();
    let minus_i = c(0.0, -1.0);
    Mat2::new(
        c(co, 0.0),
        minus_i * Complex64::from_polar(s, phi),
        minus_i * Complex64::from_polar(s, -phi),
        c(co, 0.0),
    )
}

pub fn mat_h() -> Mat2 {
    let a = std::f64::consts::FRAC_1_SQRT_2;
    Mat2::new(c(a, 0.0), c(a, 0.0), c(a, 0.0), c(-a, 0.0))
}

pub fn mat_x() -> Mat2 {
    Mat2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0))
}

/// P(λ) = diag(1, e^{iλ}).
pub fn mat_p(lambda: f64) -> Mat2 {
    Mat2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), Complex64::from_polar(1.0, lambda))
}

/// Reference matrix of a gate: 2×2 for single-qubit gates, 4×4 for CX with
/// the control as the most significant qubit.
pub fn ideal_gate_unitary(op: &GateOp) -> DMatrix<Complex64> {
    let single = |m: Mat2| DMatrix::from_fn(2, 2, |i, j| m[(i, j)]);
    match *op {
        GateOp::Uzxz { gamma, theta, phi, .. } => single(mat_uzxz(gamma, theta, phi)),
        GateOp::Rx { theta, .. } => single(mat_rx(theta)),
        GateOp::Rz { phi, .. } => single(mat_rz(phi)),
        GateOp::X { .. } => single(mat_x()),
        GateOp::H { .. } => single(mat_h()),
        GateOp::P { lambda, .. } => single(mat_p(lambda)),
        GateOp::Cx { .. } => {
            let mut m = DMatrix::zeros(4, 4);
            m[(0, 0)] = c(1.0, 0.0);
            m[(1, 1)] = c(1.0, 0.0);
            m[(2, 3)] = c(1.0, 0.0);
            m[(3, 2)] = c(1.0, 0.0);
            m
        }
    }
}

/// Applies a 2×2 matrix to the two-level subspace (`lo`, `hi`) of `atom`.
pub(crate) fn apply_on_levels(state: &mut QuantumState, atom: usize, lo: usize, hi: usize, m: &Mat2) {
    let stride = state.stride(atom);
    let levels = state.levels();
    let block = stride * levels;
    let amps = state.amplitudes_mut();
    for base in (0..amps.len()).step_by(block) {
        for off in 0..stride {
            let i0 = base + lo * stride + off;
            let i1 = base + hi * stride + off;
            let (a0, a1) = (amps[i0], amps[i1]);
            amps[i0] = m[(0, 0)] * a0 + m[(0, 1)] * a1;
            amps[i1] = m[(1, 0)] * a0 + m[(1, 1)] * a1;
        }
    }
}

fn apply_cx(state: &mut QuantumState, control: usize, target: usize) {
    let (sc, st) = (state.stride(control), state.stride(target));
    let n_levels = state.levels();
    let amps = state.amplitudes_mut();
    for i in 0..amps.len() {
        // visit each swapped pair once, from its target-in-0 member
        if (i / sc) % n_levels == 1 && (i / st) % n_levels == 0 {
            amps.swap(i, i + st);
        }
    }
}

/// Applies one gate of the digital circuit to a state (2 or 3 levels; the
/// Rydberg level is left untouched).
pub fn apply_gate(state: &mut QuantumState, op: &GateOp) -> Result<()> {
    for q in op.qubits() {
        if q >= state.n_atoms() {
            return Err(Error::Index { index: q, n_qubits: state.n_atoms() });
        }
    }
    match *op {
        GateOp::Cx { control, target } => apply_cx(state, control, target),
        _ => {
            let u = ideal_gate_unitary(op);
            let m = Mat2::new(u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);
            apply_on_levels(state, op.qubits()[0], 0, 1, &m);
        }
    }
    Ok(())
}

/// Runs a circuit on the ideal gate-level backend.
pub fn run_ideal(circuit: &GateCircuit, initial: &QuantumState) -> Result<QuantumState> {
    if initial.levels() != 2 {
        return Err(Error::Domain("the ideal backend works on 2-level states".into()));
    }
    if circuit.n_qubits() != initial.n_atoms() {
        return Err(Error::Size(format!(
            "circuit has {} qubits, state has {} atoms",
            circuit.n_qubits(),
            initial.n_atoms()
        )));
    }
    let mut state = initial.clone();
    for op in circuit.ops() {
        apply_gate(&mut state, op)?;
    }
    Ok(state)
}
