//! One-vs-one and one-vs-all reductions over the binary estimators.
//!
//! OVO trains one model per unordered class pair `(i, j)`, `i < j`, on the
//! rows of those two classes with class `i` as +1. Each pairwise model votes;
//! the class with most votes wins and ties go to the smallest class index.
//!
//! OVA trains class `i` (+1) against all other classes (-1) and predicts the
//! class whose own plane (plane 1 of model `i`) is nearest, ties again to
//! the smallest index. Using distances rather than votes means every sample
//! gets a class even when no model claims it.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{Result, TwinSvmError};
use crate::estimators::{self, Algorithm, BinaryLabel, BinaryModel, BinaryProblem, HyperParams};

#[derive(Debug, Clone, PartialEq)]
pub struct OvoModel {
    k: usize,
    /// Pairs in lexicographic order.
    models: Vec<((usize, usize), BinaryModel)>,
    class_map: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OvaModel {
    models: Vec<BinaryModel>,
    class_map: Vec<String>,
}

fn check_classes(ds: &Dataset) -> Result<()> {
    ds.check_trainable()
}

fn check_width(models: &[&BinaryModel], d: usize) -> Result<()> {
    if let Some(m) = models.first() {
        if m.feature_count() != d {
            return Err(TwinSvmError::validation(format!(
                "model expects {} features, got {d}",
                m.feature_count()
            )));
        }
    }
    Ok(())
}

/// All pairs `(i, j)` with `i < j < k` in lexicographic order.
pub fn class_pairs(k: usize) -> Vec<(usize, usize)> {
    (0..k)
        .flat_map(|i| ((i + 1)..k).map(move |j| (i, j)))
        .collect()
}

pub fn ovo_fit(ds: &Dataset, hp: &HyperParams, algorithm: Algorithm) -> Result<OvoModel> {
    check_classes(ds)?;
    let class_map = ds.class_map().to_vec();
    let models = class_pairs(ds.class_count())
        .into_par_iter()
        .map(|(i, j)| {
            let problem = BinaryProblem::from_partition(ds, |c| {
                if c == i {
                    Some(true)
                } else if c == j {
                    Some(false)
                } else {
                    None
                }
            })?;
            estimators::fit(algorithm, &problem, hp)
                .map(|m| ((i, j), m))
                .map_err(|e| e.context(format!("pair ({}, {})", class_map[i], class_map[j])))
        })
        .collect::<Result<Vec<_>>>()?;
    OvoModel::from_parts(models, class_map)
}

impl OvoModel {
    /// Checks that `models` holds exactly the pairs of `class_map`, in order.
    pub fn from_parts(models: Vec<((usize, usize), BinaryModel)>, class_map: Vec<String>) -> Result<Self> {
        let k = class_map.len();
        let pairs: Vec<_> = models.iter().map(|(p, _)| *p).collect();
        if k < 2 || pairs != class_pairs(k) {
            return Err(TwinSvmError::validation(format!(
                "one-vs-one model over {k} classes needs {} pairwise models in order",
                k * k.saturating_sub(1) / 2
            )));
        }
        let d = models[0].1.feature_count();
        if models.iter().any(|(_, m)| m.feature_count() != d) {
            return Err(TwinSvmError::validation("pairwise models disagree on feature count"));
        }
        Ok(OvoModel { k, models, class_map })
    }

    pub fn class_count(&self) -> usize {
        self.k
    }

    pub fn models(&self) -> &[((usize, usize), BinaryModel)] {
        &self.models
    }

    pub fn class_map(&self) -> &[String] {
        &self.class_map
    }

    pub fn feature_count(&self) -> usize {
        self.models[0].1.feature_count()
    }

    /// Vote counts per class for every row.
    pub fn votes_batch(&self, x: &DMatrix<f64>) -> Result<Vec<Vec<u32>>> {
        check_width(&self.models.iter().map(|(_, m)| m).collect::<Vec<_>>(), x.ncols())?;
        let mut votes = vec![vec![0u32; self.k]; x.nrows()];
        for ((i, j), m) in &self.models {
            for (row, label) in estimators::decide_batch(m, x)?.into_iter().enumerate() {
                let winner = if label == BinaryLabel::Positive { *i } else { *j };
                votes[row][winner] += 1;
            }
        }
        Ok(votes)
    }

    pub fn predict_batch(&self, x: &DMatrix<f64>) -> Result<Vec<usize>> {
        Ok(self.votes_batch(x)?.iter().map(|v| vote_winner(v)).collect())
    }
}

/// Most votes wins; ties go to the smallest index.
pub fn vote_winner(votes: &[u32]) -> usize {
    let mut best = 0;
    for (c, &v) in votes.iter().enumerate() {
        if v > votes[best] {
            best = c;
        }
    }
    best
}

pub fn ovo_predict(m: &OvoModel, x: &[f64]) -> Result<usize> {
    check_width(&[&m.models[0].1], x.len())?;
    let mut votes = vec![0u32; m.k];
    for ((i, j), model) in &m.models {
        let winner = match estimators::decide(model, x)?.label {
            BinaryLabel::Positive => *i,
            BinaryLabel::Negative => *j,
        };
        votes[winner] += 1;
    }
    Ok(vote_winner(&votes))
}

pub fn ova_fit(ds: &Dataset, hp: &HyperParams, algorithm: Algorithm) -> Result<OvaModel> {
    check_classes(ds)?;
    let class_map = ds.class_map().to_vec();
    let models = (0..ds.class_count())
        .into_par_iter()
        .map(|i| {
            let problem = BinaryProblem::from_partition(ds, |c| Some(c == i))?;
            estimators::fit(algorithm, &problem, hp)
                .map_err(|e| e.context(format!("class '{}' vs rest", class_map[i])))
        })
        .collect::<Result<Vec<_>>>()?;
    OvaModel::from_parts(models, class_map)
}

impl OvaModel {
    pub fn from_parts(models: Vec<BinaryModel>, class_map: Vec<String>) -> Result<Self> {
        if class_map.len() < 2 || models.len() != class_map.len() {
            return Err(TwinSvmError::validation(format!(
                "one-vs-all model needs one binary model per class, got {} for {} classes",
                models.len(),
                class_map.len()
            )));
        }
        let d = models[0].feature_count();
        if models.iter().any(|m| m.feature_count() != d) {
            return Err(TwinSvmError::validation("per-class models disagree on feature count"));
        }
        Ok(OvaModel { models, class_map })
    }

    pub fn class_count(&self) -> usize {
        self.models.len()
    }

    pub fn models(&self) -> &[BinaryModel] {
        &self.models
    }

    pub fn class_map(&self) -> &[String] {
        &self.class_map
    }

    pub fn feature_count(&self) -> usize {
        self.models[0].feature_count()
    }

    /// Distance of every row to each class's own plane; `out[row][class]`.
    pub fn own_distances_batch(&self, x: &DMatrix<f64>) -> Result<Vec<Vec<f64>>> {
        check_width(&self.models.iter().collect::<Vec<_>>(), x.ncols())?;
        let mut out = vec![vec![0.0; self.models.len()]; x.nrows()];
        for (c, m) in self.models.iter().enumerate() {
            let (d1, _) = m.distances_batch(x)?;
            for (row, d) in d1.iter().enumerate() {
                out[row][c] = *d;
            }
        }
        Ok(out)
    }

    pub fn predict_batch(&self, x: &DMatrix<f64>) -> Result<Vec<usize>> {
        Ok(self
            .own_distances_batch(x)?
            .iter()
            .map(|d| nearest_class(d))
            .collect())
    }
}

/// Smallest distance wins; ties go to the smallest index.
pub fn nearest_class(distances: &[f64]) -> usize {
    let mut best = 0;
    for (c, &d) in distances.iter().enumerate() {
        if d < distances[best] {
            best = c;
        }
    }
    best
}

pub fn ova_predict(m: &OvaModel, x: &[f64]) -> Result<usize> {
    check_width(&[&m.models[0]], x.len())?;
    let distances = m
        .models
        .iter()
        .map(|model| estimators::decide(model, x).map(|d| d.d1))
        .collect::<Result<Vec<_>>>()?;
    Ok(nearest_class(&distances))
}
