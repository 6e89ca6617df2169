//! Blackman pulse envelopes and area/duration math.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean of the Blackman window over one period: θ = 0.42·A·T.
pub const BLACKMAN_AREA_FACTOR: f64 = 0.42;

/// Reduces an angle into [0, 2π).
pub fn wrap_angle(angle: f64) -> f64 {
    let r = angle.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs.
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Unquantized duration θ/(0.42·A) in µs.
pub fn ideal_duration_us(theta: f64, amplitude: f64) -> Result<f64> {
    if !(theta > 0.0 && theta <= TAU) {
        return Err(Error::Domain(format!("rotation angle must lie in (0, 2π], got {theta}")));
    }
    if !(amplitude.is_finite() && amplitude > 0.0) {
        return Err(Error::Domain(format!("amplitude must be positive, got {amplitude}")));
    }
    Ok(theta / (BLACKMAN_AREA_FACTOR * amplitude))
}

/// Pulse duration in ns for a rotation by `theta` at peak `amplitude`,
/// rounded up to a multiple of the clock period.
pub fn duration_for_angle(theta: f64, amplitude: f64, clock_period_ns: u64) -> Result<u64> {
    if clock_period_ns == 0 {
        return Err(Error::Domain("clock period must be positive".into()));
    }
    let ideal_ns = ideal_duration_us(theta, amplitude)? * 1e3;
    let clock = clock_period_ns as f64;
    // Absorb float noise so exact multiples are not bumped up a period.
    let periods = (ideal_ns / clock - 1e-9).ceil().max(1.0);
    Ok(periods as u64 * clock_period_ns)
}

/// Blackman envelope Ω(t) = A(0.42 − 0.5 cos(2πt/T) + 0.08 cos(4πt/T)).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename = "blackman")]
pub struct BlackmanWaveform {
    /// Peak amplitude [rad/µs].
    #[serde(rename = "A")]
    pub amplitude: f64,
    #[serde(rename = "T_ns")]
    pub duration_ns: u64,
}

impl BlackmanWaveform {
    pub fn new(amplitude: f64, duration_ns: u64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(Error::Domain(format!("amplitude must be positive, got {amplitude}")));
        }
        if duration_ns == 0 {
            return Err(Error::Domain("duration must be positive".into()));
        }
        Ok(BlackmanWaveform { amplitude, duration_ns })
    }

    /// Waveform of area `theta` whose peak never exceeds `max_amplitude`.
    ///
    /// The duration is rounded up to the clock and the peak is scaled down by
    /// ideal/rounded duration, so the area stays exactly `theta`.
    pub fn for_area(theta: f64, max_amplitude: f64, clock_period_ns: u64) -> Result<Self> {
        let duration_ns = duration_for_angle(theta, max_amplitude, clock_period_ns)?;
        let amplitude = theta / (BLACKMAN_AREA_FACTOR * duration_ns as f64 * 1e-3);
        Self::new(amplitude.min(max_amplitude), duration_ns)
    }

    pub fn duration_us(&self) -> f64 {
        self.duration_ns as f64 * 1e-3
    }

    /// Envelope value at `t_ns` (zero outside [0, T]).
    pub fn value_at(&self, t_ns: f64) -> f64 {
        let t_total = self.duration_ns as f64;
        if !(0.0..=t_total).contains(&t_ns) {
            return 0.0;
        }
        let x = 2.0 * PI * t_ns / t_total;
        self.amplitude * (0.42 - 0.5 * x.cos() + 0.08 * (2.0 * x).cos())
    }

    /// Continuous-time area 0.42·A·T [rad].
    pub fn ideal_area(&self) -> f64 {
        BLACKMAN_AREA_FACTOR * self.amplitude * self.duration_us()
    }
}

/// Samples the envelope at t = n·Δt for n = 0..=N, with T = N·Δt.
pub fn sample_envelope(waveform: &BlackmanWaveform, clock_period_ns: u64) -> Result<Vec<f64>> {
    if clock_period_ns == 0 || waveform.duration_ns % clock_period_ns != 0 {
        return Err(Error::Domain(format!(
            "duration {} ns is not a multiple of the clock period {clock_period_ns} ns",
            waveform.duration_ns
        )));
    }
    let n = waveform.duration_ns / clock_period_ns;
    if n < 2 {
        return Err(Error::Domain("waveform must span at least two clock periods".into()));
    }
    Ok((0..=n).map(|k| waveform.value_at((k * clock_period_ns) as f64)).collect())
}

/// Trapezoidal area of the sampled envelope [rad].
///
/// For N ≥ 3 samples per period the rule integrates both cosine terms of the
/// window exactly, so the result equals 0.42·A·T up to rounding.
pub fn area(waveform: &BlackmanWaveform, clock_period_ns: u64) -> Result<f64> {
    let samples = sample_envelope(waveform, clock_period_ns)?;
    let dt_us = clock_period_ns as f64 * 1e-3;
    let inner: f64 = samples[1..samples.len() - 1].iter().sum();
    Ok(dt_us * (inner + 0.5 * (samples[0] + samples[samples.len() - 1])))
}

/// A resonant pulse: envelope plus phase bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub waveform: BlackmanWaveform,
    /// Always 0 for compiler output.
    pub detuning: f64,
    /// Phase relative to the channel's current phase reference, in [0, 2π).
    pub phase: f64,
    /// Added to the phase reference once the pulse ends, in [0, 2π).
    pub post_phase_shift: f64,
}

impl Pulse {
    pub fn resonant(waveform: BlackmanWaveform, phase: f64, post_phase_shift: f64) -> Self {
        Pulse {
            waveform,
            detuning: 0.0,
            phase: wrap_angle(phase),
            post_phase_shift: wrap_angle(post_phase_shift),
        }
    }
}
