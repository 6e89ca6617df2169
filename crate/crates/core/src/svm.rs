//! Soft-margin SVM on a precomputed kernel (C-form dual solved by sequential
//! minimal optimization) and the RBF baseline kernel.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Curvature floor for non-positive-definite pairs.
const TAU: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub c: f64,
    /// Stop when the maximal KKT violation drops below this.
    pub tol: f64,
    pub max_iter: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { c: 1.0, tol: 1e-3, max_iter: 10_000_000 }
    }
}

/// Trained classifier: f(x) = Σ αᵢyᵢ·K(xᵢ, x) + b.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub alpha_y: Vec<f64>,
    pub b: f64,
    pub support: Vec<usize>,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(skip)]
    pub labels: Vec<i8>,
}

impl SvmModel {
    /// αᵢ = |αᵢyᵢ|.
    pub fn alpha(&self) -> Vec<f64> {
        self.alpha_y.iter().map(|a| a.abs()).collect()
    }

    pub fn decision_value(&self, kernel_row: &[f64]) -> Result<f64> {
        if kernel_row.len() != self.alpha_y.len() {
            return Err(Error::Size(format!(
                "kernel row has {} entries, model has {} training samples",
                kernel_row.len(),
                self.alpha_y.len()
            )));
        }
        Ok(self.alpha_y.iter().zip(kernel_row).map(|(a, k)| a * k).sum::<f64>() + self.b)
    }
}

/// The regularized hinge objective λ·βᵀKβ + (1/m)·Σ hingeᵢ at the solution,
/// with β = α∘y and λ = 1/(2mC).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HingeObjectiveReport {
    pub lambda: f64,
    pub regularizer: f64,
    pub objective: f64,
    pub hinge_losses: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Training {
    pub model: SvmModel,
    pub report: HingeObjectiveReport,
    /// Value of the dual ½αᵀQα − Σα at the solution.
    pub dual_objective: f64,
    pub iterations: u64,
    /// Whether negative eigenvalues had to be clipped for convergence.
    pub spectral_clipped: bool,
}

fn check_inputs(kernel: &DMatrix<f64>, labels: &[i8], c: f64) -> Result<DMatrix<f64>> {
    let (r, cols) = kernel.shape();
    if r != cols {
        return Err(Error::Data(format!("training kernel must be square, got {r}×{cols}")));
    }
    if r != labels.len() {
        return Err(Error::Data(format!("{r} kernel rows but {} labels", labels.len())));
    }
    if kernel.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("kernel has non-finite entries".into()));
    }
    if let Some(bad) = labels.iter().find(|&&y| y != 1 && y != -1) {
        return Err(Error::Data(format!("labels must be ±1, got {bad}")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Domain(format!("C must be positive, got {c}")));
    }
    if !(labels.contains(&1) && labels.contains(&-1)) {
        return Err(Error::Training("training labels contain a single class".into()));
    }
    Ok((kernel + kernel.transpose()) * 0.5)
}

/// Trains on the (symmetrized) Gram matrix of the training samples.
pub fn train(kernel: &DMatrix<f64>, labels: &[i8], config: &TrainConfig) -> Result<Training> {
    let sym = check_inputs(kernel, labels, config.c)?;
    match solve(&sym, labels, config) {
        Some((alpha, iterations)) => Ok(finish(&sym, labels, config, alpha, iterations, false)),
        None => {
            let clipped = clip_spectrum(&sym);
            let (alpha, iterations) = solve(&clipped, labels, config).ok_or_else(|| {
                Error::Training(format!("solver did not converge within {} iterations", config.max_iter))
            })?;
            Ok(finish(&clipped, labels, config, alpha, iterations, true))
        }
    }
}

fn clip_spectrum(kernel: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(kernel.clone());
    let values = eig.eigenvalues.map(|v| v.max(0.0));
    let clipped = &eig.eigenvectors * DMatrix::from_diagonal(&values) * eig.eigenvectors.transpose();
    (&clipped + clipped.transpose()) * 0.5
}

/// Maximal-violating-pair SMO. Returns None when `max_iter` is exhausted.
fn solve(kernel: &DMatrix<f64>, labels: &[i8], config: &TrainConfig) -> Option<(Vec<f64>, u64)> {
    let n = labels.len();
    let c = config.c;
    let y: Vec<f64> = labels.iter().map(|&l| f64::from(l)).collect();
    let mut alpha = vec![0.0; n];
    // gradient of ½αᵀQα − eᵀα
    let mut grad = vec![-1.0; n];
    let mut iterations = 0u64;

    loop {
        let in_up = |t: usize, a: &[f64]| (y[t] > 0.0 && a[t] < c) || (y[t] < 0.0 && a[t] > 0.0);
        let in_low = |t: usize, a: &[f64]| (y[t] > 0.0 && a[t] > 0.0) || (y[t] < 0.0 && a[t] < c);
        let mut i = None;
        let mut j = None;
        let (mut up_max, mut low_min) = (f64::NEG_INFINITY, f64::INFINITY);
        for t in 0..n {
            let v = -y[t] * grad[t];
            if in_up(t, &alpha) && v > up_max {
                up_max = v;
                i = Some(t);
            }
            if in_low(t, &alpha) && v < low_min {
                low_min = v;
                j = Some(t);
            }
        }
        let (Some(i), Some(j)) = (i, j) else { break };
        if up_max - low_min < config.tol {
            break;
        }
        if iterations >= config.max_iter {
            return None;
        }
        iterations += 1;

        let eta = (kernel[(i, i)] + kernel[(j, j)] - 2.0 * kernel[(i, j)]).max(TAU);
        let mut step = (up_max - low_min) / eta;
        step = step.min(if y[i] > 0.0 { c - alpha[i] } else { alpha[i] });
        step = step.min(if y[j] > 0.0 { alpha[j] } else { c - alpha[j] });

        alpha[i] = snap(alpha[i] + y[i] * step, c);
        alpha[j] = snap(alpha[j] - y[j] * step, c);
        for k in 0..n {
            grad[k] += y[k] * step * (kernel[(k, i)] - kernel[(k, j)]);
        }
    }
    Some((alpha, iterations))
}

fn snap(a: f64, c: f64) -> f64 {
    let eps = 1e-12 * c;
    if a < eps {
        0.0
    } else if a > c - eps {
        c
    } else {
        a
    }
}

/// Bias from the free vectors, or the midpoint of the feasible interval.
fn bias(kernel: &DMatrix<f64>, y: &[f64], alpha: &[f64], c: f64) -> f64 {
    let n = y.len();
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free_sum, mut free_count) = (0.0, 0usize);
    for t in 0..n {
        let grad: f64 = (0..n).map(|k| y[t] * y[k] * kernel[(t, k)] * alpha[k]).sum::<f64>() - 1.0;
        let yg = y[t] * grad;
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free_sum += yg;
            free_count += 1;
        }
    }
    let rho = if free_count > 0 { free_sum / free_count as f64 } else { 0.5 * (ub + lb) };
    -rho
}

fn finish(
    kernel: &DMatrix<f64>,
    labels: &[i8],
    config: &TrainConfig,
    mut alpha: Vec<f64>,
    iterations: u64,
    spectral_clipped: bool,
) -> Training {
    let n = labels.len();
    let y: Vec<f64> = labels.iter().map(|&l| f64::from(l)).collect();

    // duplicates (same label, same kernel row) share their total weight
    let mut seen = vec![false; n];
    for i in 0..n {
        if seen[i] {
            continue;
        }
        let group: Vec<usize> =
            (i..n).filter(|&j| labels[j] == labels[i] && kernel.row(j) == kernel.row(i)).collect();
        let mean = group.iter().map(|&g| alpha[g]).sum::<f64>() / group.len() as f64;
        for &g in &group {
            alpha[g] = mean;
            seen[g] = true;
        }
    }

    let b = bias(kernel, &y, &alpha, config.c);
    let alpha_y: Vec<f64> = alpha.iter().zip(&y).map(|(a, y)| a * y).collect();
    let support = (0..n).filter(|&i| alpha[i] > 0.0).collect();

    let k_beta = kernel * nalgebra::DVector::from_column_slice(&alpha_y);
    let quad: f64 = alpha_y.iter().zip(k_beta.iter()).map(|(a, k)| a * k).sum();
    let lambda = 1.0 / (2.0 * n as f64 * config.c);
    let hinge_losses: Vec<f64> = (0..n).map(|i| (1.0 - y[i] * (k_beta[i] + b)).max(0.0)).collect();
    let regularizer = lambda * quad;
    let objective = regularizer + hinge_losses.iter().sum::<f64>() / n as f64;
    let dual_objective = 0.5 * quad - alpha.iter().sum::<f64>();

    Training {
        model: SvmModel { alpha_y, b, support, c: config.c, labels: labels.to_vec() },
        report: HingeObjectiveReport { lambda, regularizer, objective, hinge_losses },
        dual_objective,
        iterations,
        spectral_clipped,
    }
}

/// Labels for kernel rows K(test, train); a decision value of 0 maps to +1.
pub fn predict(model: &SvmModel, kernel_rows: &DMatrix<f64>) -> Result<Vec<i8>> {
    decision_values(model, kernel_rows).map(|d| d.into_iter().map(|v| if v >= 0.0 { 1 } else { -1 }).collect())
}

pub fn decision_values(model: &SvmModel, kernel_rows: &DMatrix<f64>) -> Result<Vec<f64>> {
    if kernel_rows.ncols() != model.alpha_y.len() {
        return Err(Error::Size(format!(
            "kernel has {} columns, model has {} training samples",
            kernel_rows.ncols(),
            model.alpha_y.len()
        )));
    }
    if kernel_rows.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("kernel has non-finite entries".into()));
    }
    let beta = nalgebra::DVector::from_column_slice(&model.alpha_y);
    Ok((kernel_rows * beta).iter().map(|v| v + model.b).collect())
}

/// Fraction of matching labels.
pub fn accuracy(predicted: &[i8], truth: &[i8]) -> Result<f64> {
    if predicted.len() != truth.len() || truth.is_empty() {
        return Err(Error::Size(format!("cannot compare {} predictions with {} labels", predicted.len(), truth.len())));
    }
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// RBF width choice.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gamma {
    /// 1 / (n_features · variance of the flattened training features).
    #[default]
    Scale,
    Value(f64),
}

impl Gamma {
    pub fn resolve(self, train: &[Vec<f64>]) -> Result<f64> {
        match self {
            Gamma::Value(g) if g >= 0.0 && g.is_finite() => Ok(g),
            Gamma::Value(g) => Err(Error::Domain(format!("gamma must be non-negative, got {g}"))),
            Gamma::Scale => {
                let flat: Vec<f64> = train.iter().flatten().copied().collect();
                let n_features = train.first().map_or(0, Vec::len);
                if flat.is_empty() || n_features == 0 {
                    return Err(Error::Data("cannot scale gamma on an empty training set".into()));
                }
                let mean = flat.iter().sum::<f64>() / flat.len() as f64;
                let var = flat.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / flat.len() as f64;
                Ok(if var > 0.0 { 1.0 / (n_features as f64 * var) } else { 1.0 })
            }
        }
    }
}

/// exp(−γ‖x₁ − x₂‖²) for every pair of rows.
pub fn rbf_kernel(rows: &[Vec<f64>], cols: &[Vec<f64>], gamma: f64) -> Result<DMatrix<f64>> {
    if let Some(d) = rows.iter().chain(cols).map(Vec::len).find(|&d| Some(d) != rows.first().map(Vec::len)) {
        return Err(Error::Size(format!("inconsistent feature dimension {d}")));
    }
    Ok(DMatrix::from_fn(rows.len(), cols.len(), |i, j| {
        let d2: f64 = rows[i].iter().zip(&cols[j]).map(|(a, b)| (a - b).powi(2)).sum();
        (-gamma * d2).exp()
    }))
}
