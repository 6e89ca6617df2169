//! Pulse-level backends: time-dependent Schrödinger evolution of 3-level
//! atoms {g, h, r} driven by the compiled timeline.
//!
//! The Hamiltonian is piecewise constant over integrator steps, each step
//! using the exact average of the Blackman envelope over that step, so the
//! accumulated area of every pulse is exactly 0.42·A·T. Because pulses never
//! overlap, each step only drives one atom and the evolution splits into
//! independent 2×2 blocks (atom k in {g, x} with the other atoms frozen),
//! which are exponentiated in closed form. Blocks whose diagonal is constant
//! over the pulse commute with themselves at all times; their step product is
//! a single rotation by the total area and is applied as such.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::gates::{apply_on_levels, mat_equatorial, mat_rz, Mat2};
use super::state::{QuantumState, G, H, R};
use crate::compiler::{Channel, EventItem, PulseSequence};
use crate::device::{Device, Register, DEFAULT_SAFETY_RADIUS};
use crate::error::{Error, Result};
use crate::waveform::{wrap_angle, BlackmanWaveform, Pulse};

/// Execution backend.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendMode {
    /// Gate-level statevector simulation of the circuit.
    IdealGate,
    /// Pulse-level with the C6/R⁶ interaction between Rydberg atoms.
    PulseVdw { step_ns: f64 },
    /// Pulse-level where drive terms creating two Rydberg excitations within
    /// `blockade_radius` [µm] of each other are removed.
    PulseHardBlockade { step_ns: f64, blockade_radius: f64 },
}

impl BackendMode {
    pub fn vdw() -> Self {
        BackendMode::PulseVdw { step_ns: 1.0 }
    }

    pub fn hard_blockade() -> Self {
        BackendMode::PulseHardBlockade { step_ns: 1.0, blockade_radius: DEFAULT_SAFETY_RADIUS }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BackendMode::IdealGate => "ideal",
            BackendMode::PulseVdw { .. } => "vdw",
            BackendMode::PulseHardBlockade { .. } => "hard-blockade",
        }
    }

    pub fn is_pulse(&self) -> bool {
        !matches!(self, BackendMode::IdealGate)
    }
}

/// Integrator switches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Integration {
    /// Apply commuting blocks as one rotation instead of stepping them.
    pub fuse_commuting: bool,
}

impl Default for Integration {
    fn default() -> Self {
        Integration { fuse_commuting: true }
    }
}

const NORM_TOL: f64 = 1e-9;

/// Evolves `initial` (3 levels per atom) under the pulse timeline.
///
/// Returns the physical state; see [`to_logical_frame`] for the state in the
/// frame of the gate circuit.
pub fn evolve_pulse(
    seq: &PulseSequence,
    register: &Register,
    device: &Device,
    mode: BackendMode,
    initial: &QuantumState,
) -> Result<QuantumState> {
    evolve_pulse_with(seq, register, device, mode, initial, Integration::default())
}

pub fn evolve_pulse_with(
    seq: &PulseSequence,
    register: &Register,
    device: &Device,
    mode: BackendMode,
    initial: &QuantumState,
    integration: Integration,
) -> Result<QuantumState> {
    let engine = Engine::new(seq, register, device, mode, initial, integration)?;
    let mut state = initial.clone();
    let mut refs = vec![[0.0f64; 2]; seq.n_qubits()];
    let mut now_ns = 0u64;

    for ev in seq.timeline() {
        let ch = match ev.channel {
            Channel::RamanLocal => 0,
            Channel::RydbergLocal => 1,
        };
        match &ev.item {
            EventItem::PhaseShift { angle } => {
                refs[ev.target][ch] = wrap_angle(refs[ev.target][ch] + angle);
            }
            EventItem::Pulse(pulse) => {
                if ev.start_ns < now_ns {
                    return Err(Error::Precondition(format!("timeline is not ordered at {} ns", ev.start_ns)));
                }
                engine.idle(&mut state, (ev.start_ns - now_ns) as f64 * 1e-3);
                let phase = pulse.phase + refs[ev.target][ch];
                engine.pulse(&mut state, ev.target, ev.channel, pulse, phase)?;
                now_ns = ev.end_ns();
                refs[ev.target][ch] = wrap_angle(refs[ev.target][ch] + pulse.post_phase_shift);

                let drift = (state.norm_sqr() - 1.0).abs();
                if drift > NORM_TOL {
                    return Err(Error::Precondition(format!("norm drifted by {drift:e} during evolution")));
                }
            }
        }
    }
    Ok(state)
}

/// Applies the accumulated virtual-Z frame Rz(ref) of every qubit to the
/// {g, h} levels, turning the physical state into the logical one.
pub fn to_logical_frame(seq: &PulseSequence, state: &QuantumState) -> Result<QuantumState> {
    if seq.n_qubits() > state.n_atoms() {
        return Err(Error::Size("sequence addresses more qubits than the state holds".into()));
    }
    let mut out = state.clone();
    for q in 0..seq.n_qubits() {
        let reference = seq.phase_reference(q, Channel::RamanLocal);
        if reference != 0.0 {
            apply_on_levels(&mut out, q, G, H, &mat_rz(reference));
        }
    }
    Ok(out)
}

struct Engine {
    n_atoms: usize,
    device: Device,
    step_ns: f64,
    integration: Integration,
    hard_blockade: bool,
    /// Interaction energy of every basis state [rad/µs].
    energy: Vec<f64>,
    /// Bit mask of atoms in |r⟩ per basis state.
    rydberg_mask: Vec<u32>,
    /// Per atom, mask of the other atoms inside the blockade radius.
    blockade_neighbors: Vec<u32>,
    any_interaction: bool,
}

impl Engine {
    fn new(
        seq: &PulseSequence,
        register: &Register,
        device: &Device,
        mode: BackendMode,
        initial: &QuantumState,
        integration: Integration,
    ) -> Result<Self> {
        if initial.levels() != 3 {
            return Err(Error::Domain("pulse backends need 3-level states".into()));
        }
        let drift = (initial.norm_sqr() - 1.0).abs();
        if drift > NORM_TOL {
            return Err(Error::Domain(format!("initial state is not normalized (|‖ψ‖² − 1| = {drift:e})")));
        }
        let n = initial.n_atoms();
        if n > register.len() {
            return Err(Error::Size(format!("state has {n} atoms, register only {}", register.len())));
        }
        if seq.n_qubits() > n {
            return Err(Error::Size(format!("sequence addresses {} qubits, state has {n}", seq.n_qubits())));
        }
        if n > 31 {
            return Err(Error::Size("at most 31 atoms are supported".into()));
        }
        let (step_ns, hard_blockade, radius) = match mode {
            BackendMode::IdealGate => return Err(Error::Domain("the ideal backend cannot run pulse sequences".into())),
            BackendMode::PulseVdw { step_ns } => (step_ns, false, 0.0),
            BackendMode::PulseHardBlockade { step_ns, blockade_radius } => (step_ns, true, blockade_radius),
        };
        if !(step_ns.is_finite() && step_ns > 0.0) {
            return Err(Error::Domain(format!("integrator step must be positive, got {step_ns}")));
        }

        let rydberg_mask: Vec<u32> = (0..initial.dim())
            .map(|i| (0..n).filter(|&a| initial.level_of(i, a) == R).fold(0, |m, a| m | (1 << a)))
            .collect();
        let coupling: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { 0.0 } else { device.c6_over_hbar / register.distance(i, j).powi(6) })
                    .collect()
            })
            .collect();
        let energy: Vec<f64> = if hard_blockade {
            vec![0.0; initial.dim()]
        } else {
            rydberg_mask
                .iter()
                .map(|&m| {
                    let mut e = 0.0;
                    for i in 0..n {
                        for j in 0..i {
                            if m & (1 << i) != 0 && m & (1 << j) != 0 {
                                e += coupling[i][j];
                            }
                        }
                    }
                    e
                })
                .collect()
        };
        let blockade_neighbors = (0..n)
            .map(|k| {
                (0..n)
                    .filter(|&j| j != k && register.distance(k, j) <= radius)
                    .fold(0, |m, j| m | (1 << j))
            })
            .collect();
        let any_interaction = energy.iter().any(|&e| e != 0.0);

        Ok(Engine {
            n_atoms: n,
            device: device.clone(),
            step_ns,
            integration,
            hard_blockade,
            energy,
            rydberg_mask,
            blockade_neighbors,
            any_interaction,
        })
    }

    fn stride(&self, atom: usize) -> usize {
        3usize.pow((self.n_atoms - 1 - atom) as u32)
    }

    /// Free evolution under the interaction only.
    fn idle(&self, state: &mut QuantumState, dt_us: f64) {
        if !self.any_interaction || dt_us == 0.0 {
            return;
        }
        for (amp, &e) in state.amplitudes_mut().iter_mut().zip(&self.energy) {
            if e != 0.0 {
                *amp *= Complex64::from_polar(1.0, -e * dt_us);
            }
        }
    }

    /// Exact per-step averages of the envelope [rad/µs].
    fn step_amplitudes(&self, w: &BlackmanWaveform) -> Result<(Vec<f64>, f64)> {
        let total = w.duration_ns as f64;
        let n_steps = (total / self.step_ns).round();
        if n_steps < 1.0 || (n_steps * self.step_ns - total).abs() > 1e-9 * total.max(1.0) {
            return Err(Error::Domain(format!(
                "integrator step {} ns does not divide the {} ns pulse",
                self.step_ns, w.duration_ns
            )));
        }
        let n_steps = n_steps as usize;
        let dt = total / n_steps as f64;
        let primitive = |t: f64| {
            let x = 2.0 * PI * t / total;
            0.42 * t - 0.5 * total / (2.0 * PI) * x.sin() + 0.08 * total / (4.0 * PI) * (2.0 * x).sin()
        };
        let omegas = (0..n_steps)
            .map(|k| {
                let t0 = k as f64 * dt;
                w.amplitude * (primitive(t0 + dt) - primitive(t0)) / dt
            })
            .collect();
        Ok((omegas, dt * 1e-3))
    }

    fn pulse(&self, state: &mut QuantumState, atom: usize, channel: Channel, pulse: &Pulse, phase: f64) -> Result<()> {
        let w = &pulse.waveform;
        if w.amplitude > self.device.omega_max_local * (1.0 + 1e-12) {
            return Err(Error::Precondition(format!(
                "pulse amplitude {} exceeds the channel maximum {}",
                w.amplitude, self.device.omega_max_local
            )));
        }
        if pulse.detuning != 0.0 {
            return Err(Error::Precondition("only resonant pulses are supported".into()));
        }
        let (omegas, dt_us) = self.step_amplitudes(w)?;
        let duration_us = w.duration_us();
        let area: f64 = omegas.iter().sum::<f64>() * dt_us;
        let rotation = mat_equatorial(area, phase);
        let drive_phase = Complex64::from_polar(1.0, phase);

        let (excited, spectator) = match channel {
            Channel::RamanLocal => (H, R),
            Channel::RydbergLocal => (R, H),
        };
        let stride = self.stride(atom);
        let block = 3 * stride;
        let amps = state.amplitudes_mut();

        for base in (0..amps.len()).step_by(block) {
            for off in 0..stride {
                let ig = base + G * stride + off;
                let ix = base + excited * stride + off;
                let is = base + spectator * stride + off;

                let e_spec = self.energy[is];
                if e_spec != 0.0 {
                    amps[is] *= Complex64::from_polar(1.0, -e_spec * duration_us);
                }

                let (eg, ex) = (self.energy[ig], self.energy[ix]);
                let blocked = self.hard_blockade
                    && channel == Channel::RydbergLocal
                    && self.rydberg_mask[ig] & self.blockade_neighbors[atom] != 0;
                if blocked {
                    // no coupling: pure phases (zero on this backend)
                    continue;
                }
                let (a0, a1) = (amps[ig], amps[ix]);
                if a0 == Complex64::new(0.0, 0.0) && a1 == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let (b0, b1) = if eg == ex && self.integration.fuse_commuting {
                    let global = Complex64::from_polar(1.0, -eg * duration_us);
                    (
                        global * (rotation[(0, 0)] * a0 + rotation[(0, 1)] * a1),
                        global * (rotation[(1, 0)] * a0 + rotation[(1, 1)] * a1),
                    )
                } else {
                    step_block(a0, a1, eg, ex, drive_phase, &omegas, dt_us)
                };
                amps[ig] = b0;
                amps[ix] = b1;
            }
        }
        Ok(())
    }
}

/// Steps one 2×2 block H = [[e0, c], [c̄, e1]], c = (Ω/2)·e^{iφ}, through the
/// piecewise-constant envelope.
fn step_block(
    mut a0: Complex64,
    mut a1: Complex64,
    e0: f64,
    e1: f64,
    drive_phase: Complex64,
    omegas: &[f64],
    dt_us: f64,
) -> (Complex64, Complex64) {
    let mean = 0.5 * (e0 + e1);
    let delta = 0.5 * (e0 - e1);
    let global = Complex64::from_polar(1.0, -mean * dt_us);
    let minus_i = Complex64::new(0.0, -1.0);
    for &omega in omegas {
        let half = 0.5 * omega;
        let w = (delta * delta + half * half).sqrt();
        let (s, co) = (w * dt_us).sin_cos();
        let k = if w > 0.0 { s / w } else { dt_us };
        let coupling = drive_phase * half;
        let u00 = global * Complex64::new(co, -k * delta);
        let u11 = global * Complex64::new(co, k * delta);
        let u01 = global * minus_i * k * coupling;
        let u10 = global * minus_i * k * coupling.conj();
        let b0 = u00 * a0 + u01 * a1;
        let b1 = u10 * a0 + u11 * a1;
        a0 = b0;
        a1 = b1;
    }
    (a0, a1)
}

/// The 2×2 propagator of a single resonant pulse on a lone atom.
pub fn single_atom_propagator(pulse: &Pulse, phase: f64) -> Mat2 {
    mat_equatorial(pulse.waveform.ideal_area(), phase)
}
