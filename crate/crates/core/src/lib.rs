//! Gate-to-pulse compilation and pulse-level simulation for neutral-atom
//! devices, with a quantum kernel estimation pipeline on top: synthetic
//! dataset generation, feature-map kernels, and SVM training.

pub mod compiler;
pub mod dataset;
pub mod device;
mod error;
pub mod qke;
pub mod simulator;
pub mod svm;
pub mod waveform;

pub use compiler::{compile, CompileConfig, GateCircuit, GateOp, PulseSequence};
pub use dataset::{Dataset, GenerationConfig, GroundTruth, Sample};
pub use device::{Device, Register};
pub use error::{Error, Result};
pub use qke::{Estimator, FeatureMapSpec, KernelMatrix, KernelSetup, Shots};
pub use simulator::{BackendMode, QuantumState, ShotResult};
pub use svm::{SvmModel, TrainConfig};
