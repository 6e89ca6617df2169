//! Execution backends: ideal gate-level statevector, pulse-level with van der
//! Waals interaction, pulse-level with hard blockade, and measurement sampling.

pub mod gates;
pub mod pulse;
pub mod sampling;
pub mod state;

pub use gates::{apply_gate, ideal_gate_unitary, run_ideal};
pub use pulse::{evolve_pulse, evolve_pulse_with, to_logical_frame, BackendMode, Integration};
pub use sampling::{outcome_distribution, sample, sample_with, ShotResult};
pub use state::QuantumState;
