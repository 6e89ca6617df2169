//! Quantum kernel estimation: ZZ-type feature maps, the overlap circuits
//! U_Φ(x1) followed by U_Φ(x2)†, and Gram matrices built from their all-zero
//! outcome frequencies.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::compiler::{compile, CompileConfig, GateCircuit, GateOp};
use crate::device::{Device, Register};
use crate::error::{Error, Result};
use crate::simulator::{evolve_pulse, run_ideal, sample, to_logical_frame, BackendMode, QuantumState};

/// Phase applied on the target between the two CX of an entangling pair.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairPhaseConvention {
    /// P(2·(π − xᵢ)·(π − xⱼ)), with P(2·xᵢ) as the single-qubit phase.
    #[default]
    QiskitZz,
}

impl PairPhaseConvention {
    fn single(self, xi: f64) -> f64 {
        match self {
            PairPhaseConvention::QiskitZz => 2.0 * xi,
        }
    }

    fn pair(self, xi: f64, xj: f64) -> f64 {
        match self {
            PairPhaseConvention::QiskitZz => 2.0 * (PI - xi) * (PI - xj),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureMapSpec {
    pub n_features: usize,
    pub repetitions: usize,
    pub pair_phase: PairPhaseConvention,
}

impl Default for FeatureMapSpec {
    fn default() -> Self {
        FeatureMapSpec { n_features: 3, repetitions: 2, pair_phase: PairPhaseConvention::QiskitZz }
    }
}

impl FeatureMapSpec {
    pub fn check(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::Domain("feature map needs at least one repetition".into()));
        }
        if self.n_features == 0 {
            return Err(Error::Domain("feature map needs at least one feature".into()));
        }
        Ok(())
    }
}

/// U_Φ(x): per repetition, H on every qubit, P(2xᵢ) on qubit i, then for every
/// pair i < j the block CX(i→j)·P(φᵢⱼ) on j·CX(i→j).
pub fn feature_map(x: &[f64], spec: &FeatureMapSpec) -> Result<GateCircuit> {
    spec.check()?;
    if x.len() != spec.n_features {
        return Err(Error::Size(format!("expected {} features, got {}", spec.n_features, x.len())));
    }
    if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("non-finite feature {bad}")));
    }
    let n = spec.n_features;
    let mut circuit = GateCircuit::new(n);
    for _ in 0..spec.repetitions {
        for q in 0..n {
            circuit.push(GateOp::H { qubit: q })?;
        }
        for (q, &xq) in x.iter().enumerate() {
            circuit.push(GateOp::P { qubit: q, lambda: spec.pair_phase.single(xq) })?;
        }
        for i in 0..n {
            for j in i + 1..n {
                circuit.push(GateOp::Cx { control: i, target: j })?;
                circuit.push(GateOp::P { qubit: j, lambda: spec.pair_phase.pair(x[i], x[j]) })?;
                circuit.push(GateOp::Cx { control: i, target: j })?;
            }
        }
    }
    Ok(circuit)
}

/// U_Φ(x1) followed by U_Φ(x2)†; its all-zero probability is the kernel value.
pub fn qke_circuit(x1: &[f64], x2: &[f64], spec: &FeatureMapSpec) -> Result<GateCircuit> {
    let mut circuit = feature_map(x1, spec)?;
    circuit.extend(&feature_map(x2, spec)?.invert())?;
    Ok(circuit)
}

/// Number of measurements per kernel entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shots {
    /// Exact outcome probabilities, no sampling.
    Exact,
    Count(u64),
}

impl fmt::Display for Shots {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shots::Exact => f.write_str("exact"),
            Shots::Count(n) => write!(f, "{n}"),
        }
    }
}

impl FromStr for Shots {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("exact") {
            return Ok(Shots::Exact);
        }
        match s.parse::<u64>() {
            Ok(n) if n >= 1 => Ok(Shots::Count(n)),
            _ => Err(Error::Domain(format!("shots must be a positive integer or \"exact\", got {s:?}"))),
        }
    }
}

impl Serialize for Shots {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Shots::Exact => serializer.serialize_str("exact"),
            Shots::Count(n) => serializer.serialize_u64(*n),
        }
    }
}

impl<'de> Deserialize<'de> for Shots {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Count(u64),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Count(n) if n >= 1 => Ok(Shots::Count(n)),
            Repr::Count(_) => Err(serde::de::Error::custom("shots must be at least 1")),
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// How the all-zero frequency is turned into a kernel value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// The frequency itself.
    #[default]
    Raw,
    /// The squared frequency.
    Squared,
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "raw" => Ok(Estimator::Raw),
            "squared" => Ok(Estimator::Squared),
            other => Err(Error::Domain(format!("unknown estimator {other:?} (raw | squared)"))),
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Estimator::Raw => "raw",
            Estimator::Squared => "squared",
        })
    }
}

/// Everything needed to turn a pair of samples into a kernel value.
#[derive(Clone, Debug)]
pub struct KernelSetup {
    pub spec: FeatureMapSpec,
    pub mode: BackendMode,
    pub device: Device,
    pub register: Register,
    pub compile: CompileConfig,
    pub estimator: Estimator,
}

impl KernelSetup {
    /// Chadoq2 with the 3-atom triangle register.
    pub fn new(mode: BackendMode) -> Self {
        KernelSetup {
            spec: FeatureMapSpec::default(),
            mode,
            device: Device::chadoq2(),
            register: Register::triangle(),
            compile: CompileConfig::default(),
            estimator: Estimator::Raw,
        }
    }

    pub fn ideal() -> Self {
        Self::new(BackendMode::IdealGate)
    }

    /// Final state of `circuit` started from all-ground: 2 levels on the ideal
    /// backend, 3 levels (physical frame) on the pulse backends.
    pub fn run(&self, circuit: &GateCircuit) -> Result<QuantumState> {
        let n = circuit.n_qubits();
        if self.mode.is_pulse() {
            let register = self.sub_register(n)?;
            let seq = compile(circuit, &register, &self.device, &self.compile)?;
            evolve_pulse(&seq, &register, &self.device, self.mode, &QuantumState::ground(n, 3)?)
        } else {
            run_ideal(circuit, &QuantumState::ground(n, 2)?)
        }
    }

    /// Logical 2-level state U_Φ(x)|0…0⟩ (leaked amplitude dropped).
    pub fn feature_state(&self, x: &[f64]) -> Result<QuantumState> {
        let circuit = feature_map(x, &self.spec)?;
        if self.mode.is_pulse() {
            let register = self.sub_register(circuit.n_qubits())?;
            let seq = compile(&circuit, &register, &self.device, &self.compile)?;
            let n = circuit.n_qubits();
            let out = evolve_pulse(&seq, &register, &self.device, self.mode, &QuantumState::ground(n, 3)?)?;
            Ok(to_logical_frame(&seq, &out)?.digital())
        } else {
            run_ideal(&circuit, &QuantumState::ground(circuit.n_qubits(), 2)?)
        }
    }

    fn sub_register(&self, n: usize) -> Result<Register> {
        if n > self.register.len() {
            return Err(Error::Size(format!("{n} qubits need at least {n} atoms, register has {}", self.register.len())));
        }
        Register::new(self.register.atoms()[..n].to_vec())
    }
}

/// Kernel value for one pair. `seed` only matters when sampling.
pub fn estimate_entry(x1: &[f64], x2: &[f64], shots: Shots, setup: &KernelSetup, seed: u64) -> Result<f64> {
    let circuit = qke_circuit(x1, x2, &setup.spec)?;
    let state = setup.run(&circuit)?;
    let frequency = match shots {
        Shots::Exact => state.zero_probability(),
        Shots::Count(n) => sample(&state, n, seed)?.zero_frequency(state.n_atoms()),
    };
    let value = match setup.estimator {
        Estimator::Raw => frequency,
        Estimator::Squared => frequency * frequency,
    };
    Ok(value.clamp(0.0, 1.0))
}

/// Seed of entry (i, j), independent of evaluation order.
pub fn entry_seed(seed: u64, i: usize, j: usize) -> u64 {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(((i as u64) << 32) | (j as u64 & 0xffff_ffff));
    rng.next_u64()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelMetadata {
    pub shots: Shots,
    pub backend: String,
    pub seed: u64,
    pub symmetric: bool,
    pub estimator: Estimator,
}

/// Estimated Gram matrix with sample identifiers.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelMatrix {
    pub values: DMatrix<f64>,
    pub row_ids: Vec<String>,
    pub col_ids: Vec<String>,
    pub metadata: KernelMetadata,
}

impl KernelMatrix {
    pub fn shape(&self) -> (usize, usize) {
        self.values.shape()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.values.row(i).iter().copied().collect()
    }

    pub fn max_asymmetry(&self) -> f64 {
        (&self.values - self.values.transpose()).amax()
    }

    /// Smallest eigenvalue of the symmetrized matrix (square matrices only).
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let (r, c) = self.shape();
        if r != c {
            return Err(Error::Size(format!("{r}×{c} matrix has no eigenvalues")));
        }
        let sym = (&self.values + self.values.transpose()) * 0.5;
        Ok(SymmetricEigen::new(sym).eigenvalues.min())
    }

    pub fn with_ids(mut self, row_ids: Vec<String>, col_ids: Vec<String>) -> Result<Self> {
        if row_ids.len() != self.values.nrows() || col_ids.len() != self.values.ncols() {
            return Err(Error::Size("identifier count does not match the matrix shape".into()));
        }
        self.row_ids = row_ids;
        self.col_ids = col_ids;
        Ok(self)
    }
}

/// Kernel matrix with entry (i, j) estimated from qke_circuit(cols[j], rows[i]).
///
/// With `symmetric` the rows must equal the columns; only the diagonal and
/// upper triangle are simulated and mirrored. Entries run in parallel.
pub fn estimate_matrix(
    rows: &[Vec<f64>],
    cols: &[Vec<f64>],
    shots: Shots,
    setup: &KernelSetup,
    seed: u64,
    symmetric: bool,
) -> Result<KernelMatrix> {
    if symmetric && rows != cols {
        return Err(Error::Domain("symmetric estimation needs identical row and column samples".into()));
    }
    let (m, n) = (rows.len(), cols.len());
    let tasks: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| !symmetric || i <= j)
        .collect();
    let results: Vec<f64> = tasks
        .par_iter()
        .map(|&(i, j)| estimate_entry(&cols[j], &rows[i], shots, setup, entry_seed(seed, i, j)))
        .collect::<Result<_>>()?;

    let mut values = DMatrix::zeros(m, n);
    for (&(i, j), v) in tasks.iter().zip(results) {
        values[(i, j)] = v;
        if symmetric {
            values[(j, i)] = v;
        }
    }
    Ok(KernelMatrix {
        values,
        row_ids: (0..m).map(|i| i.to_string()).collect(),
        col_ids: (0..n).map(|j| j.to_string()).collect(),
        metadata: KernelMetadata { shots, backend: setup.mode.name().into(), seed, symmetric, estimator: setup.estimator },
    })
}

/// ceil(c·δ⁻²·m⁴): executions sufficient for ‖K − K̂‖² ≤ δ, up to the
/// constant `c`.
pub fn executions_bound(delta: f64, m: usize, c: f64) -> Result<u64> {
    if !(delta > 0.0 && delta.is_finite()) || !(c > 0.0 && c.is_finite()) {
        return Err(Error::Domain(format!("need δ > 0 and c > 0, got δ = {delta}, c = {c}")));
    }
    let value = c * (m as f64).powi(4) / (delta * delta);
    // guard against 1e8·(1 + ε) rounding up
    let rounded = value.round();
    Ok(if (value - rounded).abs() <= 1e-9 * value { rounded } else { value.ceil() } as u64)
}
