//! Synthetic datasets labeled by a random observable on the feature-map
//! state, with a separation gap, and their ground-truth label regions.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qke::{FeatureMapSpec, KernelSetup};
use crate::simulator::QuantumState;

/// A labeled point; `y` is +1 or −1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: Vec<f64>,
    pub y: i8,
}

/// Haar-like random unitary of size `dim` with unit determinant: QR of a
/// complex Gaussian matrix, column phases fixed by the diagonal of R.
pub fn random_su(dim: usize, seed: u64) -> Result<DMatrix<Complex64>> {
    random_su_with(dim, &mut ChaCha20Rng::seed_from_u64(seed))
}

pub fn random_su_with<G: Rng + ?Sized>(dim: usize, rng: &mut G) -> Result<DMatrix<Complex64>> {
    if dim == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    let z = DMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = z.qr();
    let (mut q, r) = qr.unpack();
    for k in 0..dim {
        let d = r[(k, k)];
        if d.norm() == 0.0 {
            return Err(Error::Generation("singular Gaussian draw".into()));
        }
        let phase = d / d.norm();
        for v in q.column_mut(k).iter_mut() {
            *v *= phase;
        }
    }
    let det = q.determinant();
    let root = Complex64::from_polar(1.0, -det.arg() / dim as f64);
    Ok(q * root)
}

/// Parity (−1)^popcount(z): the diagonal of Z⊗…⊗Z.
pub fn parity(z: usize) -> f64 {
    if z.count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// The labeling rule: unitary V, parity observable, gap Δ.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    pub unitary: DMatrix<Complex64>,
    pub gap: f64,
}

impl GroundTruth {
    pub fn new(unitary: DMatrix<Complex64>, gap: f64) -> Result<Self> {
        if !unitary.is_square() || !unitary.nrows().is_power_of_two() {
            return Err(Error::Size("ground-truth unitary must be 2ⁿ×2ⁿ".into()));
        }
        if !(0.0..1.0).contains(&gap) {
            return Err(Error::Domain(format!("gap must lie in [0, 1), got {gap}")));
        }
        Ok(GroundTruth { unitary, gap })
    }

    pub fn random(n_qubits: usize, gap: f64, seed: u64) -> Result<Self> {
        Self::new(random_su(1 << n_qubits, seed)?, gap)
    }

    /// ⟨ψ|V† f V|ψ⟩ for a 2-level state ψ.
    pub fn expectation(&self, state: &QuantumState) -> Result<f64> {
        if state.levels() != 2 || state.dim() != self.unitary.nrows() {
            return Err(Error::Size("state does not match the ground-truth dimension".into()));
        }
        let psi = nalgebra::DVector::from_column_slice(state.amplitudes());
        let rotated = &self.unitary * psi;
        Ok(rotated.iter().enumerate().map(|(z, a)| parity(z) * a.norm_sqr()).sum())
    }

    /// +1, −1, or 0 inside the gap.
    pub fn label(&self, value: f64) -> i8 {
        if value >= self.gap {
            1
        } else if value <= -self.gap {
            -1
        } else {
            0
        }
    }
}

/// Ground-truth value of `x` on the ideal backend.
pub fn truth_value(x: &[f64], truth: &GroundTruth, spec: &FeatureMapSpec) -> Result<f64> {
    let setup = KernelSetup { spec: *spec, ..KernelSetup::ideal() };
    truth_value_with(x, truth, &setup)
}

/// Ground-truth value with the feature state prepared on `setup`'s backend.
pub fn truth_value_with(x: &[f64], truth: &GroundTruth, setup: &KernelSetup) -> Result<f64> {
    truth.expectation(&setup.feature_state(x)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    pub seed: u64,
    pub n_train_per_class: usize,
    pub n_test_per_class: usize,
    pub gap: f64,
    pub max_attempts: u64,
    pub spec: FeatureMapSpec,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            seed: 10_000,
            n_train_per_class: 20,
            n_test_per_class: 10,
            gap: 0.1,
            max_attempts: 1_000_000,
            spec: FeatureMapSpec::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetMetadata {
    pub seed: u64,
    pub gap: f64,
    pub spec: FeatureMapSpec,
    pub attempts: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub train: Vec<Sample>,
    pub test: Vec<Sample>,
    pub metadata: DatasetMetadata,
}

impl Dataset {
    pub fn train_points(&self) -> Vec<Vec<f64>> {
        self.train.iter().map(|s| s.x.clone()).collect()
    }

    pub fn test_points(&self) -> Vec<Vec<f64>> {
        self.test.iter().map(|s| s.x.clone()).collect()
    }

    pub fn train_labels(&self) -> Vec<i8> {
        self.train.iter().map(|s| s.y).collect()
    }

    pub fn test_labels(&self) -> Vec<i8> {
        self.test.iter().map(|s| s.y).collect()
    }
}

/// Uniform draw on (0, 2π].
fn draw_angle<G: Rng + ?Sized>(rng: &mut G) -> f64 {
    TAU * (1.0 - rng.random::<f64>())
}

/// The ground truth a config generates its labels from.
pub fn ground_truth(config: &GenerationConfig) -> Result<GroundTruth> {
    GroundTruth::random(config.spec.n_features, config.gap, config.seed)
}

/// Rejection-samples class-balanced train and test sets. The training quota
/// of a class is filled before its test quota.
pub fn generate(config: &GenerationConfig) -> Result<Dataset> {
    config.spec.check()?;
    if config.n_train_per_class == 0 {
        return Err(Error::Domain("training set needs at least one sample per class".into()));
    }
    let truth = ground_truth(config)?;
    let setup = KernelSetup { spec: config.spec, ..KernelSetup::ideal() };
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    rng.set_stream(1);

    let quota = config.n_train_per_class + config.n_test_per_class;
    let mut by_class: [Vec<Vec<f64>>; 2] = [Vec::new(), Vec::new()];
    let (mut attempts, mut accepted) = (0u64, [0u64; 2]);
    while by_class.iter().any(|c| c.len() < quota) {
        if attempts >= config.max_attempts {
            let rate = |k: u64| k as f64 / attempts.max(1) as f64;
            return Err(Error::Generation(format!(
                "quotas not filled after {attempts} draws: acceptance rate +1 = {:.3e}, −1 = {:.3e}",
                rate(accepted[0]),
                rate(accepted[1])
            )));
        }
        attempts += 1;
        let x: Vec<f64> = (0..config.spec.n_features).map(|_| draw_angle(&mut rng)).collect();
        let value = truth_value_with(&x, &truth, &setup)?;
        let class = match truth.label(value) {
            1 => 0,
            -1 => 1,
            _ => continue,
        };
        accepted[class] += 1;
        if by_class[class].len() < quota {
            by_class[class].push(x);
        }
    }

    let mut train = Vec::new();
    let mut test = Vec::new();
    for (class, points) in by_class.into_iter().enumerate() {
        let y = if class == 0 { 1 } else { -1 };
        let (tr, te) = points.split_at(config.n_train_per_class);
        train.extend(tr.iter().map(|x| Sample { x: x.clone(), y }));
        test.extend(te.iter().map(|x| Sample { x: x.clone(), y }));
    }
    Ok(Dataset {
        train,
        test,
        metadata: DatasetMetadata { seed: config.seed, gap: config.gap, spec: config.spec, attempts },
    })
}

/// One boundary face of the (0, 2π]³ cube: `axis` held at 0 (`high` false)
/// or 2π, the other two axes sampled at cell centers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionFace {
    pub axis: usize,
    pub high: bool,
    pub resolution: usize,
    /// Row-major labels {1, −1, 0 = gap}; rows follow the lower free axis.
    pub labels: Vec<i8>,
}

impl RegionFace {
    pub fn name(&self) -> String {
        format!("x{}_{}", self.axis, if self.high { "high" } else { "low" })
    }

    /// The point at cell (row, col).
    pub fn point(&self, row: usize, col: usize) -> [f64; 3] {
        face_point(self.axis, self.high, self.resolution, row, col)
    }

    pub fn get(&self, row: usize, col: usize) -> i8 {
        self.labels[row * self.resolution + col]
    }
}

fn face_point(axis: usize, high: bool, resolution: usize, row: usize, col: usize) -> [f64; 3] {
    let center = |k: usize| (k as f64 + 0.5) * TAU / resolution as f64;
    let free: Vec<usize> = (0..3).filter(|&a| a != axis).collect();
    let mut p = [0.0; 3];
    p[axis] = if high { TAU } else { 0.0 };
    p[free[0]] = center(row);
    p[free[1]] = center(col);
    p
}

/// Ground-truth labels on the 6 faces of the cube, `resolution`² cells each.
pub fn region_grid(truth: &GroundTruth, spec: &FeatureMapSpec, resolution: usize) -> Result<Vec<RegionFace>> {
    if spec.n_features != 3 {
        return Err(Error::Domain("region grids are defined for 3 features".into()));
    }
    if resolution == 0 {
        return Err(Error::Domain("resolution must be positive".into()));
    }
    let mut faces = Vec::with_capacity(6);
    for axis in 0..3 {
        for high in [false, true] {
            let labels = (0..resolution * resolution)
                .into_par_iter()
                .map(|cell| {
                    let p = face_point(axis, high, resolution, cell / resolution, cell % resolution);
                    Ok(truth.label(truth_value(&p, truth, spec)?))
                })
                .collect::<Result<Vec<i8>>>()?;
            faces.push(RegionFace { axis, high, resolution, labels });
        }
    }
    Ok(faces)
}
