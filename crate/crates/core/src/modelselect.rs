//! Grid search with k-fold cross-validation.
//!
//! Every grid point is scored on the same [`FoldPlan`], so means are
//! comparable across combinations. Combinations are enumerated with `c1`
//! outermost, then `c2`, then `gamma`, each list in the order given; the best
//! record is the first one reaching the maximal mean. Fold spread is the
//! population standard deviation (denominator `k`).

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{kfold_split, Dataset, FoldPlan};
use crate::error::{Result, TwinSvmError};
use crate::estimators::{Algorithm, HyperParams};
use crate::kernels::KernelSpec;
use crate::model::{fit_model, ModelConfig, Scheme};

/// `2^i` for each exponent.
pub fn powers_of_two(exponents: std::ops::RangeInclusive<i32>) -> Vec<f64> {
    exponents.map(|i| 2f64.powi(i)).collect()
}

/// Percentage of positions where the two vectors agree.
pub fn accuracy<T: PartialEq>(y_true: &[T], y_pred: &[T]) -> Result<f64> {
    if y_true.len() != y_pred.len() {
        return Err(TwinSvmError::validation(format!(
            "label vectors have lengths {} and {}",
            y_true.len(),
            y_pred.len()
        )));
    }
    if y_true.is_empty() {
        return Err(TwinSvmError::validation("accuracy of an empty label vector"));
    }
    let hits = y_true.iter().zip(y_pred).filter(|(a, b)| a == b).count();
    Ok(100.0 * hits as f64 / y_true.len() as f64)
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub mean: f64,
    pub std: f64,
    pub fold_accuracies: Vec<f64>,
}

/// Fits on every fold's complement and scores the fold.
pub fn cross_validate(ds: &Dataset, config: &ModelConfig, plan: &FoldPlan) -> Result<CvResult> {
    if plan.sample_count() != ds.sample_count() {
        return Err(TwinSvmError::validation(format!(
            "fold plan covers {} samples, dataset has {}",
            plan.sample_count(),
            ds.sample_count()
        )));
    }
    let mut fold_accuracies = Vec::with_capacity(plan.k);
    for fold in 0..plan.k {
        let train = ds.subset(&plan.train_indices(fold));
        let test = ds.subset(&plan.test_indices(fold));
        if let Some(c) = train.class_counts().iter().position(|&n| n == 0) {
            return Err(TwinSvmError::validation(format!(
                "class '{}' is absent from the training split of fold {fold}",
                ds.class_map()[c]
            )));
        }
        let model = fit_model(&train, config).map_err(|e| e.context(format!("fold {fold}")))?;
        let predicted = model.predict_batch(test.samples())?;
        fold_accuracies.push(accuracy(test.labels(), &predicted)?);
    }
    let (mean, std) = mean_std(&fold_accuracies);
    Ok(CvResult {
        mean,
        std,
        fold_accuracies,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub c1_values: Vec<f64>,
    pub c2_values: Vec<f64>,
    /// Empty for the linear kernel.
    pub gamma_values: Vec<f64>,
    pub rect_fraction: f64,
    pub algorithm: Algorithm,
    pub scheme: Scheme,
    pub k_folds: usize,
    pub seed: u64,
    /// Source of `epsilon`, solver settings and the rectangular-kernel seed.
    pub base: HyperParams,
}

impl GridSpec {
    /// `c1, c2 in {2^-5, ..., 2^5}`, linear kernel, 5 folds.
    pub fn linear_default(algorithm: Algorithm, scheme: Scheme) -> Self {
        GridSpec {
            c1_values: powers_of_two(-5..=5),
            c2_values: powers_of_two(-5..=5),
            gamma_values: Vec::new(),
            rect_fraction: 1.0,
            algorithm,
            scheme,
            k_folds: 5,
            seed: 0,
            base: HyperParams::default(),
        }
    }

    /// Adds the default RBF widths `{2^-15, ..., 2^2}`.
    pub fn rbf_default(algorithm: Algorithm, scheme: Scheme) -> Self {
        GridSpec {
            gamma_values: powers_of_two(-15..=2),
            ..GridSpec::linear_default(algorithm, scheme)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.c1_values.is_empty() || self.c2_values.is_empty() {
            return Err(TwinSvmError::validation("c1 and c2 grids must be non-empty"));
        }
        if self.k_folds < 2 {
            return Err(TwinSvmError::validation("grid search needs at least 2 folds"));
        }
        if let Some(v) = self
            .c1_values
            .iter()
            .chain(&self.c2_values)
            .chain(&self.gamma_values)
            .find(|v| !(**v > 0.0 && v.is_finite()))
        {
            return Err(TwinSvmError::validation(format!("grid values must be positive, got {v}")));
        }
        Ok(())
    }

    /// Grid points in search order.
    pub fn points(&self) -> Vec<GridPoint> {
        let gammas: Vec<Option<f64>> = if self.gamma_values.is_empty() {
            vec![None]
        } else {
            self.gamma_values.iter().copied().map(Some).collect()
        };
        let mut out = Vec::new();
        for &c1 in &self.c1_values {
            for &c2 in &self.c2_values {
                for &gamma in &gammas {
                    out.push(GridPoint { c1, c2, gamma });
                }
            }
        }
        out
    }

    pub fn config_for(&self, point: &GridPoint) -> ModelConfig {
        let kernel = match point.gamma {
            None => KernelSpec::linear(),
            Some(g) => KernelSpec::rbf(g).with_rect_fraction(self.rect_fraction),
        };
        ModelConfig {
            algorithm: self.algorithm,
            scheme: self.scheme,
            params: HyperParams {
                c1: point.c1,
                c2: point.c2,
                kernel,
                ..self.base
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub c1: f64,
    pub c2: f64,
    /// `None` means the linear kernel.
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRecord {
    pub params: GridPoint,
    pub fold_accuracies: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedPoint {
    pub params: GridPoint,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub algorithm: Algorithm,
    pub scheme: Scheme,
    pub k_folds: usize,
    pub seed: u64,
    pub records: Vec<SearchRecord>,
    pub failures: Vec<FailedPoint>,
    pub best: SearchRecord,
    /// Not serialized, so reports of identical runs are byte-identical.
    #[serde(skip)]
    pub wall_time_seconds: f64,
}

impl SearchReport {
    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }
}

/// Exhaustive search over `gs`. Failing combinations are recorded, not fatal;
/// the search errors only when every combination fails.
pub fn grid_search(ds: &Dataset, gs: &GridSpec) -> Result<SearchReport> {
    gs.validate()?;
    let start = Instant::now();
    let plan = kfold_split(ds.sample_count(), gs.k_folds, gs.seed)?;
    let outcomes: Vec<(GridPoint, Result<CvResult>)> = gs
        .points()
        .into_par_iter()
        .map(|point| {
            let result = cross_validate(ds, &gs.config_for(&point), &plan);
            (point, result)
        })
        .collect();

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (params, outcome) in outcomes {
        match outcome {
            Ok(cv) => records.push(SearchRecord {
                params,
                fold_accuracies: cv.fold_accuracies,
                mean: cv.mean,
                std: cv.std,
            }),
            Err(e) => failures.push(FailedPoint {
                params,
                reason: e.to_string(),
            }),
        }
    }
    let best = best_record(&records).cloned().ok_or_else(|| {
        let reason = failures.first().map_or_else(String::new, |f| f.reason.clone());
        TwinSvmError::validation(format!("every grid combination failed; first failure: {reason}"))
    })?;
    Ok(SearchReport {
        algorithm: gs.algorithm,
        scheme: gs.scheme,
        k_folds: gs.k_folds,
        seed: gs.seed,
        records,
        failures,
        best,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}

/// First record with the maximal mean.
pub fn best_record(records: &[SearchRecord]) -> Option<&SearchRecord> {
    records.iter().fold(None, |best: Option<&SearchRecord>, r| match best {
        Some(b) if b.mean >= r.mean => Some(b),
        _ => Some(r),
    })
}
