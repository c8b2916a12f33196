//! A fitted classifier of any shape, and the configuration that produces it.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Result, TwinSvmError};
use crate::estimators::{self, Algorithm, BinaryLabel, BinaryModel, BinaryProblem, HyperParams};
use crate::kernels::KernelSpec;
use crate::multiclass::{self, OvaModel, OvoModel};

/// How a dataset's classes are reduced to binary problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Exactly two classes, one model.
    Binary,
    Ovo,
    Ova,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Binary => "binary",
            Scheme::Ovo => "ovo",
            Scheme::Ova => "ova",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    pub algorithm: Algorithm,
    pub scheme: Scheme,
    pub params: HyperParams,
}

impl ModelConfig {
    /// `Binary` for two classes, `Ovo` otherwise.
    pub fn auto(algorithm: Algorithm, params: HyperParams, class_count: usize) -> Self {
        let scheme = if class_count == 2 { Scheme::Binary } else { Scheme::Ovo };
        ModelConfig {
            algorithm,
            scheme,
            params,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel {
    Binary {
        model: BinaryModel,
        class_map: Vec<String>,
    },
    Ovo(OvoModel),
    Ova(OvaModel),
}

/// Per-row decision with the two values exported for plotting.
///
/// Binary: distances to plane 1 and plane 2. OVA: the smallest and second
/// smallest own-plane distances. OVO: the largest and second largest vote
/// counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredPrediction {
    pub class: usize,
    pub first: f64,
    pub second: f64,
}

pub fn fit_model(ds: &Dataset, config: &ModelConfig) -> Result<FittedModel> {
    ds.check_trainable()?;
    match config.scheme {
        Scheme::Binary => {
            let problem = BinaryProblem::from_dataset(ds)?;
            let model = estimators::fit(config.algorithm, &problem, &config.params)?;
            Ok(FittedModel::Binary {
                model,
                class_map: ds.class_map().to_vec(),
            })
        }
        Scheme::Ovo => multiclass::ovo_fit(ds, &config.params, config.algorithm).map(FittedModel::Ovo),
        Scheme::Ova => multiclass::ova_fit(ds, &config.params, config.algorithm).map(FittedModel::Ova),
    }
}

fn binary_class(label: BinaryLabel) -> usize {
    match label {
        BinaryLabel::Positive => 0,
        BinaryLabel::Negative => 1,
    }
}

fn top_two(values: &[f64], largest: bool) -> (f64, f64) {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| if largest { b.total_cmp(a) } else { a.total_cmp(b) });
    (sorted[0], sorted.get(1).copied().unwrap_or(f64::NAN))
}

impl FittedModel {
    pub fn scheme(&self) -> Scheme {
        match self {
            FittedModel::Binary { .. } => Scheme::Binary,
            FittedModel::Ovo(_) => Scheme::Ovo,
            FittedModel::Ova(_) => Scheme::Ova,
        }
    }

    pub fn class_map(&self) -> &[String] {
        match self {
            FittedModel::Binary { class_map, .. } => class_map,
            FittedModel::Ovo(m) => m.class_map(),
            FittedModel::Ova(m) => m.class_map(),
        }
    }

    /// Every underlying binary model.
    pub fn binary_models(&self) -> Vec<&BinaryModel> {
        match self {
            FittedModel::Binary { model, .. } => vec![model],
            FittedModel::Ovo(m) => m.models().iter().map(|(_, b)| b).collect(),
            FittedModel::Ova(m) => m.models().iter().collect(),
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        self.binary_models()[0].algorithm()
    }

    pub fn kernel(&self) -> KernelSpec {
        *self.binary_models()[0].kernel()
    }

    pub fn feature_count(&self) -> usize {
        self.binary_models()[0].feature_count()
    }

    /// Class index per row.
    pub fn predict_batch(&self, x: &DMatrix<f64>) -> Result<Vec<usize>> {
        match self {
            FittedModel::Binary { model, .. } => Ok(estimators::decide_batch(model, x)?
                .into_iter()
                .map(binary_class)
                .collect()),
            FittedModel::Ovo(m) => m.predict_batch(x),
            FittedModel::Ova(m) => m.predict_batch(x),
        }
    }

    /// Class index of one sample through the scalar path.
    pub fn predict_one(&self, x: &[f64]) -> Result<usize> {
        match self {
            FittedModel::Binary { model, .. } => Ok(binary_class(estimators::decide(model, x)?.label)),
            FittedModel::Ovo(m) => multiclass::ovo_predict(m, x),
            FittedModel::Ova(m) => multiclass::ova_predict(m, x),
        }
    }

    pub fn predict_scored_batch(&self, x: &DMatrix<f64>) -> Result<Vec<ScoredPrediction>> {
        match self {
            FittedModel::Binary { model, .. } => {
                let (d1, d2) = model.distances_batch(x)?;
                Ok(d1
                    .iter()
                    .zip(d2.iter())
                    .map(|(&a, &b)| ScoredPrediction {
                        class: binary_class(estimators::nearest(a, b)),
                        first: a,
                        second: b,
                    })
                    .collect())
            }
            FittedModel::Ovo(m) => Ok(m
                .votes_batch(x)?
                .iter()
                .map(|v| {
                    let as_f: Vec<f64> = v.iter().map(|&c| f64::from(c)).collect();
                    let (first, second) = top_two(&as_f, true);
                    ScoredPrediction {
                        class: multiclass::vote_winner(v),
                        first,
                        second,
                    }
                })
                .collect()),
            FittedModel::Ova(m) => Ok(m
                .own_distances_batch(x)?
                .iter()
                .map(|d| {
                    let (first, second) = top_two(d, false);
                    ScoredPrediction {
                        class: multiclass::nearest_class(d),
                        first,
                        second,
                    }
                })
                .collect()),
        }
    }

    /// Original label text of a class index.
    pub fn label_of(&self, class: usize) -> Result<&str> {
        self.class_map()
            .get(class)
            .map(String::as_str)
            .ok_or_else(|| TwinSvmError::validation(format!("class index {class} out of range")))
    }
}
