//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use qke_core::compiler::{Channel, EventItem, PulseSequence};
use qke_core::device::Register;

/// Dense propagation of a 3-level register: the full Hamiltonian is built at
/// the midpoint of every sub-step of `h_ns` and exponentiated with
/// nalgebra's matrix exponential.
pub fn dense_evolve(
    seq: &PulseSequence,
    register: &Register,
    c6: f64,
    initial: &[Complex64],
    h_ns: f64,
) -> Vec<Complex64> {
    let n = seq.n_qubits();
    let dim = 3usize.pow(n as u32);
    let digit = |idx: usize, atom: usize| (idx / 3usize.pow((n - 1 - atom) as u32)) % 3;
    let interaction: Vec<f64> = (0..dim)
        .map(|idx| {
            let mut e = 0.0;
            for i in 0..n {
                for j in 0..i {
                    if digit(idx, i) == 2 && digit(idx, j) == 2 {
                        e += c6 / register.distance(i, j).powi(6);
                    }
                }
            }
            e
        })
        .collect();

    let mut psi = DVector::from_column_slice(initial);
    let mut refs = vec![[0.0f64; 2]; n];
    let mut now = 0.0f64;
    let i_unit = Complex64::new(0.0, 1.0);
    let idle = |psi: &mut DVector<Complex64>, dt_us: f64| {
        for (a, e) in psi.iter_mut().zip(&interaction) {
            *a *= (-i_unit * e * dt_us).exp();
        }
    };

    for ev in seq.timeline() {
        let ch = if ev.channel == Channel::RamanLocal { 0 } else { 1 };
        match &ev.item {
            EventItem::PhaseShift { angle } => refs[ev.target][ch] += angle,
            EventItem::Pulse(p) => {
                idle(&mut psi, (ev.start_ns as f64 - now) * 1e-3);
                let level = if ch == 0 { 1 } else { 2 };
                let phase = p.phase + refs[ev.target][ch];
                let total = p.waveform.duration_ns as f64;
                let steps = (total / h_ns).round() as usize;
                let dt = total / steps as f64;
                for s in 0..steps {
                    let t = (s as f64 + 0.5) * dt;
                    let omega = p.waveform.value_at(t);
                    let mut ham = DMatrix::from_diagonal(&DVector::from_iterator(
                        dim,
                        interaction.iter().map(|&e| Complex64::new(e, 0.0)),
                    ));
                    let coupling = Complex64::from_polar(omega / 2.0, phase);
                    let stride = 3usize.pow((n - 1 - ev.target) as u32);
                    for idx in 0..dim {
                        if digit(idx, ev.target) == 0 {
                            let x = idx + level * stride;
                            ham[(idx, x)] += coupling;
                            ham[(x, idx)] += coupling.conj();
                        }
                    }
                    let u = (ham * Complex64::new(0.0, -dt * 1e-3)).exp();
                    psi = u * psi;
                }
                now = ev.end_ns() as f64;
                refs[ev.target][ch] += p.post_phase_shift;
            }
        }
    }
    psi.iter().copied().collect()
}

/// |⟨a|b⟩|².
pub fn overlap(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm_sqr()
}

/// Exact solution of the C-SVM dual by enumerating every assignment of the
/// variables to {0, C, free} and solving the KKT system on the free set.
pub struct QpSolution {
    pub alpha: Vec<f64>,
    pub b: f64,
    pub objective: f64,
}

pub fn brute_force_svm(kernel: &DMatrix<f64>, labels: &[i8], c: f64) -> QpSolution {
    let n = labels.len();
    let y: Vec<f64> = labels.iter().map(|&l| f64::from(l)).collect();
    let q = DMatrix::from_fn(n, n, |i, j| y[i] * y[j] * kernel[(i, j)]);
    let objective = |a: &[f64]| {
        let v = DVector::from_column_slice(a);
        0.5 * (v.transpose() * &q * &v)[(0, 0)] - a.iter().sum::<f64>()
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    for code in 0..3usize.pow(n as u32) {
        let status: Vec<usize> = (0..n).map(|i| (code / 3usize.pow(i as u32)) % 3).collect();
        let free: Vec<usize> = (0..n).filter(|&i| status[i] == 2).collect();
        let mut alpha: Vec<f64> = status.iter().map(|&s| if s == 1 { c } else { 0.0 }).collect();
        if !free.is_empty() {
            let f = free.len();
            let mut system = DMatrix::zeros(f + 1, f + 1);
            let mut rhs = DVector::zeros(f + 1);
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    system[(r, s)] = q[(i, j)];
                }
                system[(r, f)] = y[i];
                system[(f, r)] = y[i];
                rhs[r] = 1.0 - (0..n).filter(|k| status[*k] != 2).map(|k| q[(i, k)] * alpha[k]).sum::<f64>();
            }
            rhs[f] = -(0..n).filter(|k| status[*k] != 2).map(|k| y[k] * alpha[k]).sum::<f64>();
            let Ok(sol) = system.svd(true, true).solve(&rhs, 1e-12) else { continue };
            for (r, &i) in free.iter().enumerate() {
                alpha[i] = sol[r];
            }
        }
        let feasible = alpha.iter().all(|&a| (-1e-9..=c + 1e-9).contains(&a))
            && alpha.iter().zip(&y).map(|(a, y)| a * y).sum::<f64>().abs() < 1e-9;
        if !feasible {
            continue;
        }
        let value = objective(&alpha);
        if best.as_ref().is_none_or(|(v, _)| value < *v - 1e-12) {
            best = Some((value, alpha));
        }
    }
    let (objective, alpha) = best.expect("the zero vector is always feasible");

    // bias: free vectors, else midpoint of the feasible interval
    let f = |i: usize| (0..n).map(|k| alpha[k] * y[k] * kernel[(k, i)]).sum::<f64>();
    let tol = 1e-7 * c;
    let free: Vec<usize> = (0..n).filter(|&i| alpha[i] > tol && alpha[i] < c - tol).collect();
    let b = if !free.is_empty() {
        free.iter().map(|&i| y[i] - f(i)).sum::<f64>() / free.len() as f64
    } else {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..n {
            let target = y[i] - f(i);
            let at_upper = alpha[i] >= c - tol;
            // y·(f + b) ≥ 1 when α = 0, ≤ 1 when α = C
            if (y[i] > 0.0) != at_upper {
                lo = lo.max(target);
            } else {
                hi = hi.min(target);
            }
        }
        0.5 * (lo + hi)
    };
    QpSolution { alpha, b, objective }
}
