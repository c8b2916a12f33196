mod common;

use common::{augment, augmented, relative_error, rng};
use nalgebra::DMatrix;
use rand::Rng;
use twinsvm::estimators::{self, Algorithm, BinaryLabel, BinaryModel, BinaryProblem, HyperParams};
use twinsvm::kernels::{self, KernelSpec};

fn random_problem(seed: u64) -> (BinaryProblem, f64, f64) {
    let mut r = rng(seed);
    let d = 1 + seed as usize % 5;
    let n1 = 5 + seed as usize % 16;
    let n2 = 5 + (seed as usize * 3) % 16;
    let a = common::normal_matrix(&mut r, n1, d).add_scalar(1.0);
    let b = common::normal_matrix(&mut r, n2, d).add_scalar(-1.0);
    let c1 = 2f64.powf(r.random_range(-3.0..3.0));
    let c2 = 2f64.powf(r.random_range(-3.0..3.0));
    (BinaryProblem::new(a, b).unwrap(), c1, c2)
}

fn two_clusters(per_class: usize, d: usize, gap: f64, seed: u64) -> BinaryProblem {
    let mut r = rng(seed);
    let a = common::normal_matrix(&mut r, per_class, d).add_scalar(gap / 2.0);
    let b = common::normal_matrix(&mut r, per_class, d).add_scalar(-gap / 2.0);
    BinaryProblem::new(a, b).unwrap()
}

fn training_accuracy(m: &BinaryModel, p: &BinaryProblem) -> f64 {
    let pa = estimators::decide_batch(m, &p.a).unwrap();
    let pb = estimators::decide_batch(m, &p.b).unwrap();
    let hits = pa.iter().filter(|&&l| l == BinaryLabel::Positive).count()
        + pb.iter().filter(|&&l| l == BinaryLabel::Negative).count();
    100.0 * hits as f64 / (pa.len() + pb.len()) as f64
}

#[test]
fn lstsvm_matches_gradient_descent_minimizer() {
    for seed in 0..20 {
        let (p, c1, c2) = random_problem(seed);
        let hp = HyperParams::new(c1, c2, KernelSpec::linear());
        let m = estimators::lstsvm_fit(&p, &hp).unwrap();
        let (h, g) = (augment(&p.a), augment(&p.b));
        let z1 = common::lstsvm_plane1_oracle(&h, &g, c1, hp.epsilon);
        let z2 = common::lstsvm_plane2_oracle(&h, &g, c2, hp.epsilon);
        assert!(relative_error(&augmented(m.plane1()), &z1) <= 1e-6, "seed {seed} plane 1");
        assert!(relative_error(&augmented(m.plane2()), &z2) <= 1e-6, "seed {seed} plane 2");
    }
}

#[test]
fn two_point_plane_passes_through_own_point() {
    let p = BinaryProblem::new(
        DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
        DMatrix::from_row_slice(1, 2, &[-1.0, 0.0]),
    )
    .unwrap();
    let hp = HyperParams::default();
    let m = estimators::tsvm_fit(&p, &hp).unwrap();
    let d = estimators::decide(&m, &[1.0, 0.0]).unwrap();
    assert!(d.d1 <= 1e-3, "distance {}", d.d1);
    assert!(estimators::decide(&m, &[-1.0, 0.0]).unwrap().d2 <= 1e-3);

    let tight = HyperParams {
        tolerance: 1e-12,
        max_iterations: 100_000,
        ..hp
    };
    let m = estimators::tsvm_fit(&p, &tight).unwrap();
    let (z1, z2) = common::tsvm_oracle(&p.a, &p.b, hp.c1, hp.c2, hp.epsilon);
    assert!(relative_error(&augmented(m.plane1()), &z1) <= 1e-6);
    assert!(relative_error(&augmented(m.plane2()), &z2) <= 1e-6);
}

#[test]
fn tsvm_matches_active_set_oracle_on_small_problems() {
    for seed in 0..10 {
        let mut r = rng(100 + seed);
        let d = 1 + seed as usize % 3;
        let a = common::normal_matrix(&mut r, 3, d).add_scalar(1.0);
        let b = common::normal_matrix(&mut r, 3, d).add_scalar(-1.0);
        let p = BinaryProblem::new(a, b).unwrap();
        let hp = HyperParams {
            tolerance: 1e-12,
            max_iterations: 1_000_000,
            ..HyperParams::new(0.5, 2.0, KernelSpec::linear())
        };
        let m = estimators::tsvm_fit(&p, &hp).unwrap();
        let (z1, z2) = common::tsvm_oracle(&p.a, &p.b, hp.c1, hp.c2, hp.epsilon);
        assert!(relative_error(&augmented(m.plane1()), &z1) <= 1e-6, "seed {seed}");
        assert!(relative_error(&augmented(m.plane2()), &z2) <= 1e-6, "seed {seed}");
    }
}

#[test]
fn xor_needs_the_rbf_kernel() {
    let p = common::xor();
    let rbf = HyperParams::new(1.0, 1.0, KernelSpec::rbf(1.0));
    let m = estimators::tsvm_fit(&p, &rbf).unwrap();
    assert_eq!(training_accuracy(&m, &p), 100.0);
    // the linear duals are nearly singular and need far more coordinate steps
    let linear = HyperParams {
        max_iterations: 1_000_000,
        ..HyperParams::default()
    };
    assert!(estimators::tsvm_fit(&p, &HyperParams::default()).is_err());
    let linear = estimators::tsvm_fit(&p, &linear).unwrap();
    assert!(training_accuracy(&linear, &p) <= 75.0);

    let tight = HyperParams {
        tolerance: 1e-12,
        max_iterations: 100_000,
        ..rbf
    };
    let m = estimators::tsvm_fit(&p, &tight).unwrap();
    let reference = m.reference().unwrap();
    let fa = kernels::gram(&rbf.kernel, &p.a, reference).unwrap();
    let fb = kernels::gram(&rbf.kernel, &p.b, reference).unwrap();
    let (z1, z2) = common::tsvm_oracle(&fa, &fb, 1.0, 1.0, rbf.epsilon);
    assert!(relative_error(&augmented(m.plane1()), &z1) <= 1e-6);
    assert!(relative_error(&augmented(m.plane2()), &z2) <= 1e-6);
}

#[test]
fn separated_clusters_are_fit_exactly() {
    for algorithm in [Algorithm::Tsvm, Algorithm::Lstsvm] {
        for seed in 0..3 {
            let p = two_clusters(100, 4, 6.0 * 2.0, seed);
            let m = estimators::fit(algorithm, &p, &HyperParams::default()).unwrap();
            assert_eq!(training_accuracy(&m, &p), 100.0, "{} seed {seed}", algorithm.name());
        }
    }
}

#[test]
fn fitted_duals_are_feasible_and_stationary() {
    let p = two_clusters(60, 3, 2.0, 9);
    for kernel in [KernelSpec::linear(), KernelSpec::rbf(0.5)] {
        let hp = HyperParams::new(0.7, 1.6, kernel);
        let fit = estimators::tsvm_fit_with_duals(&p, &hp).unwrap();
        for (sol, c) in [(&fit.alpha, hp.c1), (&fit.gamma, hp.c2)] {
            assert!(sol.converged);
            assert!(sol.alpha.iter().all(|&a| (0.0..=c).contains(&a)));
            for (&a, &g) in sol.alpha.iter().zip(sol.gradient_cache.iter()) {
                let slope = g - 1.0;
                let violation = if a == 0.0 {
                    (-slope).max(0.0)
                } else if a == c {
                    slope.max(0.0)
                } else {
                    slope.abs()
                };
                assert!(violation <= 10.0 * hp.tolerance);
            }
        }
    }
}

fn swap_check(algorithm: Algorithm, kernel: KernelSpec, seed: u64) {
    let p = two_clusters(40, 3, 1.5, seed);
    let hp = HyperParams::new(0.5, 2.0, kernel);
    let swapped_hp = HyperParams { c1: hp.c2, c2: hp.c1, ..hp };
    let m = estimators::fit(algorithm, &p, &hp).unwrap();
    let s = estimators::fit(algorithm, &p.swapped(), &swapped_hp).unwrap();
    if kernel.is_linear() {
        for (mine, theirs) in [(s.plane1(), m.plane2()), (s.plane2(), m.plane1())] {
            let (x, y) = (augmented(mine), augmented(theirs));
            let err = (&x - &y).norm().min((&x + &y).norm()) / y.norm();
            assert!(err <= 1e-8, "{} coefficient mismatch {err}", algorithm.name());
        }
    }
    let x = common::normal_matrix(&mut rng(seed + 1000), 200, 3);
    for row in x.row_iter() {
        let row: Vec<f64> = row.iter().copied().collect();
        let a = estimators::decide(&m, &row).unwrap();
        let b = estimators::decide(&s, &row).unwrap();
        assert!((a.d1 - b.d2).abs() <= 1e-8 * a.d1.max(1.0));
        assert!((a.d2 - b.d1).abs() <= 1e-8 * a.d2.max(1.0));
        if (a.d1 - a.d2).abs() > 1e-6 {
            assert_ne!(a.label, b.label);
        }
    }
}

#[test]
fn label_swap_exchanges_planes() {
    for algorithm in [Algorithm::Tsvm, Algorithm::Lstsvm] {
        swap_check(algorithm, KernelSpec::linear(), 1);
        swap_check(algorithm, KernelSpec::rbf(0.3), 2);
    }
}

#[test]
fn full_rectangular_kernel_equals_explicit_feature_map() {
    let p = two_clusters(30, 2, 1.0, 4);
    let kernel = KernelSpec::rbf(0.8).with_rect_fraction(1.0);
    for algorithm in [Algorithm::Tsvm, Algorithm::Lstsvm] {
        let m = estimators::fit(algorithm, &p, &HyperParams::new(1.0, 1.0, kernel)).unwrap();
        let stacked = p.stacked();
        assert_eq!(m.reference().unwrap(), &stacked);
        let mapped = BinaryProblem::new(
            kernels::gram(&kernel, &p.a, &stacked).unwrap(),
            kernels::gram(&kernel, &p.b, &stacked).unwrap(),
        )
        .unwrap();
        let direct = estimators::fit(algorithm, &mapped, &HyperParams::default()).unwrap();
        for (x, y) in [(m.plane1(), direct.plane1()), (m.plane2(), direct.plane2())] {
            assert!(relative_error(&augmented(x), &augmented(y)) <= 1e-10);
        }
    }
}

#[test]
fn rectangular_kernel_keeps_requested_share() {
    let p = two_clusters(50, 2, 3.0, 5);
    let hp = HyperParams::new(1.0, 1.0, KernelSpec::rbf(0.5).with_rect_fraction(0.2));
    let m = estimators::lstsvm_fit(&p, &hp).unwrap();
    assert_eq!(m.reference().unwrap().nrows(), 20);
    assert_eq!(m.plane1().w.len(), 20);
    assert!(training_accuracy(&m, &p) >= 95.0);
}

#[test]
fn rbf_predictions_survive_rescaling() {
    let p = two_clusters(60, 3, 1.0, 6);
    let scaled = BinaryProblem::new(&p.a * 10.0, &p.b * 10.0).unwrap();
    let test = common::normal_matrix(&mut rng(66), 500, 3);
    for algorithm in [Algorithm::Tsvm, Algorithm::Lstsvm] {
        let m = estimators::fit(algorithm, &p, &HyperParams::new(1.0, 1.0, KernelSpec::rbf(0.5))).unwrap();
        let s = estimators::fit(algorithm, &scaled, &HyperParams::new(1.0, 1.0, KernelSpec::rbf(0.005))).unwrap();
        let a = estimators::decide_batch(&m, &test).unwrap();
        let b = estimators::decide_batch(&s, &(&test * 10.0)).unwrap();
        assert_eq!(a, b, "{}", algorithm.name());
    }
}

#[test]
fn batch_decisions_equal_scalar_loop() {
    let p = two_clusters(80, 5, 1.0, 7);
    let x = common::normal_matrix(&mut rng(77), 10_000, 5);
    for kernel in [KernelSpec::linear(), KernelSpec::rbf(0.2).with_rect_fraction(0.5)] {
        for algorithm in [Algorithm::Tsvm, Algorithm::Lstsvm] {
            let hp = HyperParams {
                max_iterations: 100_000,
                ..HyperParams::new(1.0, 1.0, kernel)
            };
            let m = estimators::fit(algorithm, &p, &hp).unwrap();
            let batch = estimators::decide_batch(&m, &x).unwrap();
            let (d1, d2) = m.distances_batch(&x).unwrap();
            for (i, row) in x.row_iter().enumerate() {
                let row: Vec<f64> = row.iter().copied().collect();
                let one = estimators::decide(&m, &row).unwrap();
                assert_eq!(one.label, batch[i], "row {i}");
                assert!((one.d1 - d1[i]).abs() <= 1e-12 * one.d1.max(1.0));
                assert!((one.d2 - d2[i]).abs() <= 1e-12 * one.d2.max(1.0));
            }
        }
    }
    let empty = DMatrix::zeros(0, 5);
    let m = estimators::lstsvm_fit(&p, &HyperParams::default()).unwrap();
    assert!(estimators::decide_batch(&m, &empty).unwrap().is_empty());
}

#[test]
fn wrong_width_inputs_are_rejected() {
    let p = two_clusters(10, 3, 2.0, 8);
    let m = estimators::lstsvm_fit(&p, &HyperParams::default()).unwrap();
    assert!(estimators::decide(&m, &[0.0, 1.0]).is_err());
    assert!(estimators::decide_batch(&m, &DMatrix::zeros(4, 2)).is_err());
}
