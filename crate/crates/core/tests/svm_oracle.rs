mod oracles;

use nalgebra::DMatrix;
use proptest::prelude::*;
use qke_core::svm::{predict, rbf_kernel, train, TrainConfig};

fn problem(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<i8>) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]).collect();
    let mut y: Vec<i8> = (0..n).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect();
    y[0] = 1;
    y[n - 1] = -1;
    (x, y)
}

fn check(x: &[Vec<f64>], y: &[i8], gamma: f64, c: f64) {
    let k = rbf_kernel(x, x, gamma).unwrap();
    let ours = train(&k, y, &TrainConfig { c, ..Default::default() }).unwrap();
    let oracle = oracles::brute_force_svm(&k, y, c);
    assert!(
        (ours.dual_objective - oracle.objective).abs() <= 1e-4,
        "dual {} vs oracle {}",
        ours.dual_objective,
        oracle.objective
    );

    // predictions on a probe grid, skipping points on the boundary
    let probes: Vec<Vec<f64>> =
        (0..15).flat_map(|i| (0..15).map(move |j| vec![-2.5 + i as f64 / 2.8, -2.5 + j as f64 / 2.8])).collect();
    let rows = rbf_kernel(&probes, x, gamma).unwrap();
    let ours_pred = predict(&ours.model, &rows).unwrap();
    for (p, pred) in ours_pred.iter().enumerate() {
        let f: f64 = (0..y.len()).map(|i| oracle.alpha[i] * f64::from(y[i]) * rows[(p, i)]).sum::<f64>() + oracle.b;
        if f.abs() > 1e-2 {
            assert_eq!(*pred, if f >= 0.0 { 1 } else { -1 }, "probe {p}: oracle decision {f}");
        }
    }
}

#[test]
fn two_and_three_sample_problems() {
    for seed in 0..10 {
        check(&problem(2, seed).0, &problem(2, seed).1, 0.8, 1.0);
        let (x, y) = problem(3, seed);
        check(&x, &y, 0.5, 1.0);
        check(&x, &y, 2.0, 0.3);
    }
}

#[test]
fn six_sample_problems() {
    for seed in 0..20 {
        let (x, y) = problem(6, 100 + seed);
        check(&x, &y, 0.7, 1.0);
        check(&x, &y, 0.2, 5.0);
    }
}

#[test]
fn objective_report_relation() {
    let (x, y) = problem(6, 3);
    let k = rbf_kernel(&x, &x, 0.5).unwrap();
    let t = train(&k, &y, &TrainConfig::default()).unwrap();
    assert!((t.report.lambda - 1.0 / 12.0).abs() < 1e-15);
    assert!(t.report.objective >= t.report.regularizer);
}

#[test]
fn positive_rescaling_keeps_signs() {
    let (x, y) = problem(6, 8);
    let k = rbf_kernel(&x, &x, 0.5).unwrap();
    let mut model = train(&k, &y, &TrainConfig::default()).unwrap().model;
    let before = predict(&model, &k).unwrap();
    for a in &mut model.alpha_y {
        *a *= 3.5;
    }
    model.b *= 3.5;
    assert_eq!(predict(&model, &k).unwrap(), before);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn random_small_kernels(
        n in 2usize..6,
        seed in 0u64..10_000,
        c in 0.1f64..10.0,
    ) {
        let (x, y) = problem(n, seed);
        let k = rbf_kernel(&x, &x, 0.6).unwrap();
        let ours = train(&k, &y, &TrainConfig { c, ..Default::default() }).unwrap();
        let oracle = oracles::brute_force_svm(&k, &y, c);
        prop_assert!((ours.dual_objective - oracle.objective).abs() <= 1e-4);
        prop_assert!(ours.model.alpha_y.iter().sum::<f64>().abs() <= 1e-8);
    }
}

#[test]
fn asymmetric_noisy_kernel_is_symmetrized() {
    let k = DMatrix::from_row_slice(3, 3, &[1.0, 0.30, 0.1, 0.32, 1.0, 0.2, 0.1, 0.2, 1.0]);
    let sym = (&k + k.transpose()) * 0.5;
    let a = train(&k, &[1, -1, 1], &TrainConfig::default()).unwrap();
    let b = train(&sym, &[1, -1, 1], &TrainConfig::default()).unwrap();
    assert_eq!(a.model, b.model);
}
