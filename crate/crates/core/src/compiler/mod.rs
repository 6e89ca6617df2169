//! Lowering of gate circuits to timed pulse sequences.
//!
//! Single-qubit gates are expressed as Z-X-Z Euler rotations
//! U(γ, θ, φ) = Rz(γ)·Rx(θ)·Rz(φ). A resonant pulse of phase φ realizes the
//! equatorial rotation Rz(−φ)·Rx(θ)·Rz(φ), so after each rotation the Raman
//! phase reference of the qubit advances by γ + φ (a virtual Z). The logical
//! state is always `Rz(ref)` applied to the physical one, which leaves
//! Z-basis measurement statistics untouched.
//!
//! CX is built from the blockade π–2π–π sequence (a CZ with global phase −1)
//! conjugated by Hadamards on the target.

mod circuit;
mod sequence;

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

pub use circuit::{GateCircuit, GateOp};
pub use sequence::{Channel, EventItem, LintViolation, PulseSequence, TimelineEvent};

use crate::device::{
    blockade_radius, max_rabi_for_radius, validate_register, Device, Register, DEFAULT_TWO_PI_AMPLITUDE,
};
use crate::error::{Error, Result};
use crate::waveform::{wrap_angle, BlackmanWaveform, Pulse};

/// How the peak amplitude of the Rydberg 2π pulse is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoPiAmplitude {
    /// A fixed Rabi frequency [rad/µs].
    Fixed(f64),
    /// The largest Rabi frequency whose blockade radius equals this radius [µm].
    SafetyRadius(f64),
}

impl Default for TwoPiAmplitude {
    fn default() -> Self {
        TwoPiAmplitude::Fixed(DEFAULT_TWO_PI_AMPLITUDE)
    }
}

/// Peak amplitudes used by the lowering. `None` means the device maximum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CompileConfig {
    pub raman_amplitude: Option<f64>,
    pub rydberg_pi_amplitude: Option<f64>,
    pub two_pi: TwoPiAmplitude,
}

/// Resolved amplitudes for one CX.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CxAmplitudes {
    pub raman: f64,
    pub rydberg_pi: f64,
    pub rydberg_two_pi: f64,
}

impl CompileConfig {
    pub fn amplitudes(&self, device: &Device) -> Result<CxAmplitudes> {
        let two_pi = match self.two_pi {
            TwoPiAmplitude::Fixed(a) => a,
            TwoPiAmplitude::SafetyRadius(r) => max_rabi_for_radius(r, device)?.min(device.omega_max_local),
        };
        let amps = CxAmplitudes {
            raman: self.raman_amplitude.unwrap_or(device.omega_max_local),
            rydberg_pi: self.rydberg_pi_amplitude.unwrap_or(device.omega_max_local),
            rydberg_two_pi: two_pi,
        };
        for (name, a) in [("raman", amps.raman), ("rydberg_pi", amps.rydberg_pi), ("rydberg_two_pi", amps.rydberg_two_pi)] {
            if !(a.is_finite() && a > 0.0 && a <= device.omega_max_local) {
                return Err(Error::Compile(format!(
                    "{name} amplitude {a} outside (0, {}]",
                    device.omega_max_local
                )));
            }
        }
        Ok(amps)
    }
}

fn check_amplitude(seq: &PulseSequence, a_max: f64) -> Result<()> {
    let limit = seq.device().omega_max_local;
    if !(a_max > 0.0 && a_max <= limit) {
        return Err(Error::Compile(format!("amplitude {a_max} outside (0, {limit}]")));
    }
    Ok(())
}

/// Emits U(γ, θ, φ) on `qubit`: one pulse of area θ and phase φ whose
/// post-phase-shift is γ + φ, or only a phase shift of γ + φ when θ ≡ 0.
pub fn emit_uzxz(
    seq: &mut PulseSequence,
    gamma: f64,
    theta: f64,
    phi: f64,
    qubit: usize,
    channel: Channel,
    a_max: f64,
) -> Result<()> {
    check_amplitude(seq, a_max)?;
    if qubit >= seq.n_qubits() {
        return Err(Error::Index { index: qubit, n_qubits: seq.n_qubits() });
    }
    let gamma = wrap_angle(gamma);
    let theta = wrap_angle(theta);
    let phi = wrap_angle(phi);
    if theta != 0.0 {
        let waveform = BlackmanWaveform::for_area(theta, a_max, seq.device().clock_period_ns)?;
        seq.add_pulse(channel, qubit, Pulse::resonant(waveform, phi, gamma + phi))
    } else {
        seq.phase_shift(channel, qubit, gamma + phi)
    }
}

pub fn emit_rx(seq: &mut PulseSequence, theta: f64, qubit: usize, a_max: f64) -> Result<()> {
    emit_uzxz(seq, 0.0, theta, 0.0, qubit, Channel::RamanLocal, a_max)
}

/// Rz is a pure phase-reference update.
pub fn emit_rz(seq: &mut PulseSequence, phi: f64, qubit: usize) -> Result<()> {
    seq.phase_shift(Channel::RamanLocal, qubit, phi)
}

pub fn emit_x(seq: &mut PulseSequence, qubit: usize, a_max: f64) -> Result<()> {
    emit_rx(seq, PI, qubit, a_max)
}

pub fn emit_h(seq: &mut PulseSequence, qubit: usize, a_max: f64) -> Result<()> {
    emit_uzxz(seq, FRAC_PI_2, FRAC_PI_2, FRAC_PI_2, qubit, Channel::RamanLocal, a_max)
}

/// Emits CX as π(control) · H(target) · 2π(target) · H(target) · π(control).
///
/// The π and 2π pulses go on the Rydberg channel, the Hadamards on the Raman
/// channel. Fails when the pair is farther apart than the blockade radius of
/// the 2π pulse.
pub fn emit_cx(
    seq: &mut PulseSequence,
    register: &Register,
    control: usize,
    target: usize,
    amps: &CxAmplitudes,
) -> Result<()> {
    for q in [control, target] {
        if q >= seq.n_qubits() || q >= register.len() {
            return Err(Error::Index { index: q, n_qubits: seq.n_qubits().min(register.len()) });
        }
    }
    if control == target {
        return Err(Error::Compile(format!("CX control and target are both qubit {control}")));
    }
    check_amplitude(seq, amps.rydberg_pi)?;
    check_amplitude(seq, amps.rydberg_two_pi)?;
    let r_b = blockade_radius(amps.rydberg_two_pi, seq.device())?;
    let distance = register.distance(control, target);
    if distance >= r_b {
        return Err(Error::Compile(format!(
            "atoms {} and {} are {distance:.3} µm apart, outside the {r_b:.3} µm blockade radius of the 2π pulse",
            register.atoms()[control].name,
            register.atoms()[target].name
        )));
    }

    let clock = seq.device().clock_period_ns;
    let pi_pulse = Pulse::resonant(BlackmanWaveform::for_area(PI, amps.rydberg_pi, clock)?, 0.0, 0.0);
    let two_pi_pulse = Pulse::resonant(BlackmanWaveform::for_area(TAU, amps.rydberg_two_pi, clock)?, 0.0, 0.0);

    seq.add_pulse(Channel::RydbergLocal, control, pi_pulse)?;
    emit_h(seq, target, amps.raman)?;
    seq.add_pulse(Channel::RydbergLocal, target, two_pi_pulse)?;
    emit_h(seq, target, amps.raman)?;
    seq.add_pulse(Channel::RydbergLocal, control, pi_pulse)
}

/// Lowers a single gate.
pub fn emit_gate(seq: &mut PulseSequence, register: &Register, op: &GateOp, amps: &CxAmplitudes) -> Result<()> {
    match *op {
        GateOp::Uzxz { qubit, gamma, theta, phi } => {
            emit_uzxz(seq, gamma, theta, phi, qubit, Channel::RamanLocal, amps.raman)
        }
        GateOp::Rx { qubit, theta } => emit_rx(seq, theta, qubit, amps.raman),
        GateOp::Rz { qubit, phi } => emit_rz(seq, phi, qubit),
        // P(λ) = e^{iλ/2}·Rz(λ); the global phase is dropped.
        GateOp::P { qubit, lambda } => emit_rz(seq, lambda, qubit),
        GateOp::X { qubit } => emit_x(seq, qubit, amps.raman),
        GateOp::H { qubit } => emit_h(seq, qubit, amps.raman),
        GateOp::Cx { control, target } => emit_cx(seq, register, control, target, amps),
    }
}

/// Compiles a circuit for `register` on `device`. Qubit i is atom i.
pub fn compile(circuit: &GateCircuit, register: &Register, device: &Device, config: &CompileConfig) -> Result<PulseSequence> {
    device.check()?;
    let report = validate_register(register, device);
    if !report.is_valid() {
        return Err(Error::Compile(format!("register not placeable on {}: {report}", device.name)));
    }
    if circuit.n_qubits() > register.len() {
        return Err(Error::Compile(format!(
            "circuit uses {} qubits but the register has {} atoms",
            circuit.n_qubits(),
            register.len()
        )));
    }
    let amps = config.amplitudes(device)?;
    let mut seq = PulseSequence::new(circuit.n_qubits(), device);
    for op in circuit.ops() {
        emit_gate(&mut seq, register, op, &amps)?;
    }
    let lint = seq.lint(device);
    if let Some(v) = lint.first() {
        return Err(Error::Compile(format!("scheduler produced an invalid timeline: {v:?}")));
    }
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::gates::{mat_rx, mat_rz, mat_uzxz, Mat2};
    use crate::waveform::ideal_duration_us;
    use num_complex::Complex64;

    fn one_qubit_seq() -> PulseSequence {
        PulseSequence::new(1, &Device::chadoq2())
    }

    /// Logical 2×2 unitary of a single-qubit Raman timeline: every pulse is
    /// Rz(−p)Rx(θ)Rz(p) with p = phase + current reference, and the final
    /// frame Rz(ref) is applied at the end.
    fn logical_unitary(seq: &PulseSequence) -> Mat2 {
        let mut u = Mat2::identity();
        let mut reference = 0.0;
        for ev in seq.timeline() {
            match ev.item {
                EventItem::Pulse(p) => {
                    let ph = p.phase + reference;
                    u = mat_rz(-ph) * mat_rx(p.waveform.ideal_area()) * mat_rz(ph) * u;
                    reference += p.post_phase_shift;
                }
                EventItem::PhaseShift { angle } => reference += angle,
            }
        }
        mat_rz(reference) * u
    }

    fn phase_distance(a: &Mat2, b: &Mat2) -> f64 {
        // min over λ of ‖e^{iλ}a − b‖_F is attained at λ = arg tr(a†b).
        let overlap: Complex64 = (a.adjoint() * b).trace();
        let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { Complex64::new(1.0, 0.0) };
        (a * phase - b).norm()
    }

    #[test]
    fn hadamard_is_one_quarter_turn_pulse() {
        let mut seq = one_qubit_seq();
        emit_h(&mut seq, 0, 62.83).unwrap();
        assert_eq!(seq.timeline().len(), 1);
        let EventItem::Pulse(p) = seq.timeline()[0].item else { panic!() };
        assert!((p.waveform.ideal_area() - FRAC_PI_2).abs() < 1e-12);
        assert!((p.post_phase_shift - PI).abs() < 1e-12);
        assert!((p.phase - FRAC_PI_2).abs() < 1e-12);
        let h = Mat2::new(1.0.into(), 1.0.into(), 1.0.into(), (-1.0).into()) / Complex64::from(2f64.sqrt());
        assert!(phase_distance(&logical_unitary(&seq), &h) < 1e-9);
    }

    #[test]
    fn rz_emits_only_a_phase_shift() {
        let mut seq = one_qubit_seq();
        emit_uzxz(&mut seq, 0.35, 0.0, 0.35, 0, Channel::RamanLocal, 62.83).unwrap();
        assert_eq!(seq.pulse_count(), 0);
        assert_eq!(seq.timeline().len(), 1);
        assert!(matches!(seq.timeline()[0].item, EventItem::PhaseShift { angle } if (angle - 0.7).abs() < 1e-12));

        let mut seq = one_qubit_seq();
        emit_rz(&mut seq, PI, 0).unwrap();
        assert_eq!(seq.duration_ns(), 0);
        let z = Mat2::new(1.0.into(), 0.0.into(), 0.0.into(), (-1.0).into());
        assert!(phase_distance(&logical_unitary(&seq), &z) < 1e-9);
    }

    #[test]
    fn x_is_a_pi_pulse_without_post_shift() {
        let mut seq = one_qubit_seq();
        emit_x(&mut seq, 0, 62.83).unwrap();
        let EventItem::Pulse(p) = seq.timeline()[0].item else { panic!() };
        assert!((p.waveform.ideal_area() - PI).abs() < 1e-12);
        assert_eq!(p.post_phase_shift, 0.0);
    }

    #[test]
    fn full_turn_rx_is_dropped() {
        let mut seq = one_qubit_seq();
        emit_rx(&mut seq, TAU, 0, 62.83).unwrap();
        assert_eq!(seq.pulse_count(), 0);
        assert!(phase_distance(&logical_unitary(&seq), &mat_rx(TAU)) < 1e-9);
    }

    #[test]
    fn single_qubit_gates_match_reference_matrices() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let (g, t, p) = (rng.random_range(-7.0..7.0), rng.random_range(-7.0..7.0), rng.random_range(-7.0..7.0));
            let mut seq = one_qubit_seq();
            emit_uzxz(&mut seq, g, t, p, 0, Channel::RamanLocal, 62.83).unwrap();
            assert!(phase_distance(&logical_unitary(&seq), &mat_uzxz(g, t, p)) < 1e-9);

            let mut seq = one_qubit_seq();
            emit_rx(&mut seq, t, 0, 62.83).unwrap();
            assert!(phase_distance(&logical_unitary(&seq), &mat_rx(t)) < 1e-9);

            let mut seq = one_qubit_seq();
            emit_rz(&mut seq, p, 0).unwrap();
            assert!(phase_distance(&logical_unitary(&seq), &mat_rz(p)) < 1e-9);
        }
    }

    #[test]
    fn consecutive_rotations_compose_through_the_phase_reference() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let a: [f64; 6] = std::array::from_fn(|_| rng.random_range(0.0..TAU));
            let mut seq = one_qubit_seq();
            emit_uzxz(&mut seq, a[0], a[1], a[2], 0, Channel::RamanLocal, 62.83).unwrap();
            emit_uzxz(&mut seq, a[3], a[4], a[5], 0, Channel::RamanLocal, 62.83).unwrap();
            // the second pulse is played at φ₂ + (γ₁ + φ₁)
            if let [_, TimelineEvent { item: EventItem::Pulse(p2), .. }] = seq.timeline() {
                let first_shift = wrap_angle(a[0] + a[2]);
                assert!((wrap_angle(p2.phase + first_shift) - wrap_angle(a[5] + a[0] + a[2])).abs() < 1e-9);
            }
            let expected = mat_uzxz(a[3], a[4], a[5]) * mat_uzxz(a[0], a[1], a[2]);
            assert!(phase_distance(&logical_unitary(&seq), &expected) < 1e-9);
        }
    }

    #[test]
    fn cx_pulse_order_and_channels() {
        let dev = Device::chadoq2();
        let reg = Register::triangle();
        let amps = CompileConfig::default().amplitudes(&dev).unwrap();
        let mut seq = PulseSequence::new(3, &dev);
        emit_cx(&mut seq, &reg, 0, 2, &amps).unwrap();
        let layout: Vec<(Channel, usize)> = seq.timeline().iter().map(|e| (e.channel, e.target)).collect();
        use Channel::*;
        assert_eq!(layout, vec![(RydbergLocal, 0), (RamanLocal, 2), (RydbergLocal, 2), (RamanLocal, 2), (RydbergLocal, 0)]);
        assert!(seq.lint(&dev).is_empty());

        // 120 + 60 + 2761 + 60 + 120 ns of pulses plus the Rydberg retargets.
        let us = seq.duration_ns() as f64 * 1e-3;
        let bare = 2.0 * ideal_duration_us(PI, 62.83).unwrap()
            + 2.0 * ideal_duration_us(FRAC_PI_2, 62.83).unwrap()
            + ideal_duration_us(TAU, 5.42).unwrap();
        assert!(us > bare && us < bare + 0.44 + 0.01, "{us} vs {bare}");
        assert!((3.1..=3.6).contains(&us), "{us}");
    }

    #[test]
    fn cx_outside_blockade_is_rejected() {
        let dev = Device::chadoq2();
        let reg = Register::from_planar(&[[0.0, 0.0], [12.0, 0.0]]).unwrap();
        let circuit = GateCircuit::from_ops(2, vec![GateOp::Cx { control: 0, target: 1 }]).unwrap();
        let err = compile(&circuit, &reg, &dev, &CompileConfig::default()).unwrap_err();
        assert!(err.to_string().contains("q0") && err.to_string().contains("q1"), "{err}");
    }

    #[test]
    fn compile_rejects_unplaceable_registers() {
        let dev = Device::chadoq2();
        let reg = Register::from_planar(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        let circuit = GateCircuit::new(2);
        assert!(matches!(compile(&circuit, &reg, &dev, &CompileConfig::default()), Err(Error::Compile(_))));
    }

    #[test]
    fn empty_and_single_gate_circuits() {
        let dev = Device::chadoq2();
        let reg = Register::triangle();
        let cfg = CompileConfig::default();
        let seq = compile(&GateCircuit::new(3), &reg, &dev, &cfg).unwrap();
        assert!(seq.timeline().is_empty());
        assert_eq!(seq.duration_ns(), 0);

        let h = GateCircuit::from_ops(3, vec![GateOp::H { qubit: 0 }]).unwrap();
        let seq = compile(&h, &reg, &dev, &cfg).unwrap();
        assert_eq!(seq.pulse_count(), 1);
        let expected = crate::waveform::duration_for_angle(FRAC_PI_2, 62.83, 1).unwrap();
        assert_eq!(seq.duration_ns(), expected);
    }

    #[test]
    fn amplitude_config() {
        let dev = Device::chadoq2();
        let amps = CompileConfig { two_pi: TwoPiAmplitude::SafetyRadius(10.0), ..Default::default() }
            .amplitudes(&dev)
            .unwrap();
        assert!((amps.rydberg_two_pi - 5.008).abs() < 1e-9);
        let bad = CompileConfig { raman_amplitude: Some(100.0), ..Default::default() };
        assert!(bad.amplitudes(&dev).is_err());
    }
}
