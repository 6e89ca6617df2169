//! Timed, per-channel pulse sequences.

use serde::{Deserialize, Serialize};

use crate::device::Device;
use crate::error::{Error, Result};
use crate::waveform::{wrap_angle, Pulse};

/// Local addressing channels. Each channel also names the two-level basis it
/// drives: Raman couples g↔h, Rydberg couples g↔r.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    RamanLocal,
    RydbergLocal,
}

impl Channel {
    pub const ALL: [Channel; 2] = [Channel::RamanLocal, Channel::RydbergLocal];

    pub(crate) fn index(self) -> usize {
        match self {
            Channel::RamanLocal => 0,
            Channel::RydbergLocal => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventItem {
    Pulse(Pulse),
    /// Zero-duration shift of the channel's phase reference on the target.
    PhaseShift { angle: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimelineEvent {
    pub channel: Channel,
    pub target: usize,
    pub start_ns: u64,
    #[serde(flatten)]
    pub item: EventItem,
}

impl TimelineEvent {
    pub fn duration_ns(&self) -> u64 {
        match &self.item {
            EventItem::Pulse(p) => p.waveform.duration_ns,
            EventItem::PhaseShift { .. } => 0,
        }
    }

    pub fn end_ns(&self) -> u64 {
        self.start_ns + self.duration_ns()
    }
}

/// Problems found by [`PulseSequence::lint`].
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LintViolation {
    Overlap { channel: Channel, first: usize, second: usize },
    RetargetGap { channel: Channel, event: usize, gap_ns: u64, required_ns: u64 },
    Amplitude { event: usize, amplitude: f64, max: f64 },
    Detuning { event: usize, detuning: f64 },
    Unquantized { event: usize },
    OutOfOrder { event: usize },
    Target { event: usize, target: usize },
}

/// Pulse/phase-shift timeline under construction.
///
/// Events are scheduled strictly sequentially: each starts no earlier than
/// the previous one ends. A local channel that switches to a new target must
/// stay idle for the device's retarget time first.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseSequence {
    n_qubits: usize,
    device: Device,
    timeline: Vec<TimelineEvent>,
    /// Phase reference per qubit, indexed by channel.
    phase_refs: Vec<[f64; 2]>,
    cursor_ns: u64,
    /// Last (target, end time) per channel.
    last_on_channel: [Option<(usize, u64)>; 2],
}

#[derive(Serialize)]
struct SequenceRepr<'a> {
    n_qubits: usize,
    duration_ns: u64,
    timeline: &'a [TimelineEvent],
}

impl Serialize for PulseSequence {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SequenceRepr { n_qubits: self.n_qubits, duration_ns: self.duration_ns(), timeline: &self.timeline }
            .serialize(serializer)
    }
}

impl PulseSequence {
    pub fn new(n_qubits: usize, device: &Device) -> Self {
        PulseSequence {
            n_qubits,
            device: device.clone(),
            timeline: Vec::new(),
            phase_refs: vec![[0.0; 2]; n_qubits],
            cursor_ns: 0,
            last_on_channel: [None; 2],
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn device(&self) -> &Device {
        &self.device
    }

    pub fn timeline(&self) -> &[TimelineEvent] {
        &self.timeline
    }

    /// End time of the last event.
    pub fn duration_ns(&self) -> u64 {
        self.cursor_ns
    }

    pub fn pulse_count(&self) -> usize {
        self.timeline.iter().filter(|e| matches!(e.item, EventItem::Pulse(_))).count()
    }

    /// Current phase reference of `qubit` in the basis driven by `channel`.
    pub fn phase_reference(&self, qubit: usize, channel: Channel) -> f64 {
        self.phase_refs[qubit][channel.index()]
    }

    fn check_target(&self, target: usize) -> Result<()> {
        if target >= self.n_qubits {
            return Err(Error::Index { index: target, n_qubits: self.n_qubits });
        }
        Ok(())
    }

    /// Schedules a pulse on `channel` addressing `target`.
    pub fn add_pulse(&mut self, channel: Channel, target: usize, pulse: Pulse) -> Result<()> {
        self.check_target(target)?;
        let dev = &self.device;
        if pulse.waveform.amplitude > dev.omega_max_local * (1.0 + 1e-12) {
            return Err(Error::Compile(format!(
                "pulse amplitude {} exceeds the channel maximum {}",
                pulse.waveform.amplitude, dev.omega_max_local
            )));
        }
        if pulse.detuning.abs() > dev.detuning_max {
            return Err(Error::Compile(format!("detuning {} exceeds {}", pulse.detuning, dev.detuning_max)));
        }
        if pulse.waveform.duration_ns % dev.clock_period_ns != 0 {
            return Err(Error::Compile(format!(
                "pulse duration {} ns is not a multiple of the {} ns clock",
                pulse.waveform.duration_ns, dev.clock_period_ns
            )));
        }

        let mut start = self.cursor_ns;
        if let Some((last_target, last_end)) = self.last_on_channel[channel.index()] {
            if last_target != target {
                start = start.max(last_end + dev.retarget_min_ns);
            }
        }
        start = start.div_ceil(dev.clock_period_ns) * dev.clock_period_ns;

        let end = start + pulse.waveform.duration_ns;
        self.timeline.push(TimelineEvent { channel, target, start_ns: start, item: EventItem::Pulse(pulse) });
        self.cursor_ns = end;
        self.last_on_channel[channel.index()] = Some((target, end));
        let r = &mut self.phase_refs[target][channel.index()];
        *r = wrap_angle(*r + pulse.post_phase_shift);
        Ok(())
    }

    /// Shifts the phase reference of `target` on `channel` (zero duration).
    pub fn phase_shift(&mut self, channel: Channel, target: usize, angle: f64) -> Result<()> {
        self.check_target(target)?;
        if !angle.is_finite() {
            return Err(Error::Domain("phase shift must be finite".into()));
        }
        let angle = wrap_angle(angle);
        self.timeline.push(TimelineEvent {
            channel,
            target,
            start_ns: self.cursor_ns,
            item: EventItem::PhaseShift { angle },
        });
        let r = &mut self.phase_refs[target][channel.index()];
        *r = wrap_angle(*r + angle);
        Ok(())
    }

    /// Checks the scheduling invariants against `device`.
    pub fn lint(&self, device: &Device) -> Vec<LintViolation> {
        let mut out = Vec::new();
        let mut last: [Option<(usize, &TimelineEvent)>; 2] = [None, None];
        let mut prev_end = 0u64;
        for (i, ev) in self.timeline.iter().enumerate() {
            if ev.target >= self.n_qubits {
                out.push(LintViolation::Target { event: i, target: ev.target });
            }
            if ev.start_ns < prev_end {
                out.push(LintViolation::OutOfOrder { event: i });
            }
            let EventItem::Pulse(pulse) = &ev.item else {
                continue;
            };
            prev_end = ev.end_ns();
            if pulse.waveform.amplitude > device.omega_max_local * (1.0 + 1e-12) {
                out.push(LintViolation::Amplitude {
                    event: i,
                    amplitude: pulse.waveform.amplitude,
                    max: device.omega_max_local,
                });
            }
            if pulse.detuning != 0.0 {
                out.push(LintViolation::Detuning { event: i, detuning: pulse.detuning });
            }
            if ev.start_ns % device.clock_period_ns != 0 || pulse.waveform.duration_ns % device.clock_period_ns != 0 {
                out.push(LintViolation::Unquantized { event: i });
            }
            let ch = ev.channel.index();
            if let Some((j, prev)) = last[ch] {
                if ev.start_ns < prev.end_ns() {
                    out.push(LintViolation::Overlap { channel: ev.channel, first: j, second: i });
                } else if prev.target != ev.target && ev.start_ns - prev.end_ns() < device.retarget_min_ns {
                    out.push(LintViolation::RetargetGap {
                        channel: ev.channel,
                        event: i,
                        gap_ns: ev.start_ns - prev.end_ns(),
                        required_ns: device.retarget_min_ns,
                    });
                }
            }
            last[ch] = Some((i, ev));
        }
        out
    }
}
