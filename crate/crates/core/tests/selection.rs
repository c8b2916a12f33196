mod common;

use std::time::Instant;

use twinsvm::dataset::kfold_split;
use twinsvm::estimators::{Algorithm, HyperParams};
use twinsvm::kernels::KernelSpec;
use twinsvm::model::{ModelConfig, Scheme};
use twinsvm::modelselect::{best_record, cross_validate, grid_search, GridSpec, SearchRecord};

fn linear_config(algorithm: Algorithm, c1: f64, c2: f64) -> ModelConfig {
    ModelConfig {
        algorithm,
        scheme: Scheme::Ovo,
        params: HyperParams::new(c1, c2, KernelSpec::linear()),
    }
}

#[test]
fn iris_cross_validation_reaches_reported_accuracy() {
    let start = Instant::now();
    let ds = common::normalized_iris();
    let plan = kfold_split(ds.sample_count(), 5, 0).unwrap();
    let tsvm = cross_validate(&ds, &linear_config(Algorithm::Tsvm, 2f64.powi(-5), 2f64.powi(-3)), &plan).unwrap();
    let lstsvm = cross_validate(&ds, &linear_config(Algorithm::Lstsvm, 2f64.powi(-1), 2f64.powi(-2)), &plan).unwrap();
    assert!(tsvm.mean >= 94.0, "TSVM {:.2}", tsvm.mean);
    assert!(lstsvm.mean >= 95.0, "LSTSVM {:.2}", lstsvm.mean);
    assert_eq!(tsvm.fold_accuracies.len(), 5);
    assert!(start.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn default_linear_grid_has_121_points() {
    let ds = common::normalized_iris();
    let spec = GridSpec::linear_default(Algorithm::Lstsvm, Scheme::Ovo);
    assert_eq!(spec.points().len(), 121);
    let report = grid_search(&ds, &spec).unwrap();
    assert_eq!(report.records.len() + report.failures.len(), 121);
    assert!(report.records.iter().all(|r| r.mean <= report.best.mean));
    let first_best = report.records.iter().find(|r| r.mean == report.best.mean).unwrap();
    assert_eq!(first_best, &report.best);
}

#[test]
fn iteration_order_is_c1_then_c2_then_gamma() {
    let spec = GridSpec {
        c1_values: vec![1.0, 2.0],
        c2_values: vec![3.0, 4.0],
        gamma_values: vec![5.0, 6.0],
        ..GridSpec::linear_default(Algorithm::Lstsvm, Scheme::Binary)
    };
    let order: Vec<(f64, f64, f64)> = spec
        .points()
        .iter()
        .map(|p| (p.c1, p.c2, p.gamma.unwrap()))
        .collect();
    assert_eq!(order[0], (1.0, 3.0, 5.0));
    assert_eq!(order[1], (1.0, 3.0, 6.0));
    assert_eq!(order[2], (1.0, 4.0, 5.0));
    assert_eq!(order[4], (2.0, 3.0, 5.0));
}

#[test]
fn equal_means_keep_the_first_combination() {
    let ds = common::clusters(2, 30, 2, 10.0, 3);
    let spec = GridSpec {
        c1_values: vec![0.5, 1.0, 2.0],
        c2_values: vec![1.0, 0.25],
        ..GridSpec::linear_default(Algorithm::Lstsvm, Scheme::Binary)
    };
    let report = grid_search(&ds, &spec).unwrap();
    assert!(report.records.iter().all(|r| r.mean == 100.0));
    assert_eq!((report.best.params.c1, report.best.params.c2), (0.5, 1.0));

    let tie = |c1: f64, mean: f64| SearchRecord {
        params: twinsvm::modelselect::GridPoint { c1, c2: 1.0, gamma: None },
        fold_accuracies: vec![mean],
        mean,
        std: 0.0,
    };
    let records = vec![tie(1.0, 90.0), tie(2.0, 95.0), tie(3.0, 95.0)];
    assert_eq!(best_record(&records).unwrap().params.c1, 2.0);
}

#[test]
fn single_point_grid_equals_its_cross_validation() {
    let ds = common::normalized_iris();
    let spec = GridSpec {
        c1_values: vec![0.5],
        c2_values: vec![0.25],
        seed: 9,
        ..GridSpec::linear_default(Algorithm::Lstsvm, Scheme::Ovo)
    };
    let report = grid_search(&ds, &spec).unwrap();
    assert_eq!(report.records.len(), 1);
    let plan = kfold_split(ds.sample_count(), 5, 9).unwrap();
    let cv = cross_validate(&ds, &linear_config(Algorithm::Lstsvm, 0.5, 0.25), &plan).unwrap();
    assert_eq!(report.best.fold_accuracies, cv.fold_accuracies);
    assert_eq!(report.best.mean, cv.mean);
}

#[test]
fn reports_are_reproducible_per_seed() {
    let ds = common::normalized_iris();
    let spec = GridSpec {
        c1_values: vec![0.25, 1.0, 4.0],
        c2_values: vec![0.25, 1.0, 4.0],
        gamma_values: vec![0.5, 2.0],
        seed: 42,
        ..GridSpec::linear_default(Algorithm::Tsvm, Scheme::Ovo)
    };
    let a = grid_search(&ds, &spec).unwrap();
    let b = grid_search(&ds, &spec).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    let other = grid_search(&ds, &GridSpec { seed: 43, ..spec }).unwrap();
    assert_ne!(a.to_json(), other.to_json());
}

#[test]
fn failing_points_are_recorded() {
    let ds = common::normalized_iris();
    let spec = GridSpec {
        c1_values: vec![2f64.powi(-5)],
        c2_values: vec![2f64.powi(-2)],
        gamma_values: vec![2f64.powi(-11), 2f64.powi(-3)],
        ..GridSpec::linear_default(Algorithm::Tsvm, Scheme::Ovo)
    };
    let report = grid_search(&ds, &spec).unwrap();
    assert_eq!(report.records.len(), 1);
    assert_eq!(report.failures.len(), 1);
    assert_eq!(report.failures[0].params.gamma, Some(2f64.powi(-11)));
    assert!(report.failures[0].reason.contains("did not converge"));

    let hopeless = GridSpec {
        gamma_values: vec![2f64.powi(-11)],
        ..spec
    };
    assert!(grid_search(&ds, &hopeless).is_err());
}
