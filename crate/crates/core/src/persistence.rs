//! Versioned JSON model files.
//!
//! The layout is documented in `docs/model-format.md`. Floats are written in
//! shortest round-trip form and parsed back exactly, so a reloaded model
//! predicts bit-identically. Loading only parses numbers and rebuilds plain
//! data; nothing in the file selects code to run beyond the fixed enums.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dataset::ScalerParams;
use crate::error::{Result, TwinSvmError};
use crate::estimators::{Algorithm, BinaryModel, Plane};
use crate::kernels::KernelSpec;
use crate::model::{FittedModel, Scheme, ScoredPrediction};
use crate::multiclass::{class_pairs, OvaModel, OvoModel};

pub const MAGIC: &str = "TWSVM";
pub const FORMAT_VERSION: u64 = 1;

/// A fitted model plus the preprocessing it was trained behind.
#[derive(Debug, Clone, PartialEq)]
pub struct SavedModel {
    pub model: FittedModel,
    pub scaler: Option<ScalerParams>,
}

impl SavedModel {
    pub fn new(model: FittedModel, scaler: Option<ScalerParams>) -> Self {
        SavedModel { model, scaler }
    }

    /// Applies the bundled scaler, if any, then predicts class indices.
    pub fn predict_batch(&self, x: &DMatrix<f64>) -> Result<Vec<usize>> {
        match &self.scaler {
            Some(s) => self.model.predict_batch(&s.transform(x)?),
            None => self.model.predict_batch(x),
        }
    }

    /// [`FittedModel::predict_scored_batch`] behind the bundled scaler.
    pub fn predict_scored_batch(&self, x: &DMatrix<f64>) -> Result<Vec<ScoredPrediction>> {
        match &self.scaler {
            Some(s) => self.model.predict_scored_batch(&s.transform(x)?),
            None => self.model.predict_scored_batch(x),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PlaneRecord {
    w: Vec<f64>,
    b: f64,
}

#[derive(Serialize, Deserialize)]
struct BinaryRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pair: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    class: Option<usize>,
    plane1: PlaneRecord,
    plane2: PlaneRecord,
    /// Kernel reference rows, absent for linear models.
    #[serde(default)]
    reference: Option<Vec<Vec<f64>>>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    magic: String,
    format_version: u64,
    scheme: Scheme,
    algorithm: Algorithm,
    kernel: KernelSpec,
    feature_count: usize,
    class_map: Vec<String>,
    models: Vec<BinaryRecord>,
    #[serde(default)]
    scaler: Option<ScalerParams>,
}

fn plane_record(p: &Plane) -> PlaneRecord {
    PlaneRecord {
        w: p.w.iter().copied().collect(),
        b: p.b,
    }
}

fn binary_record(m: &BinaryModel, pair: Option<[usize; 2]>, class: Option<usize>) -> BinaryRecord {
    BinaryRecord {
        pair,
        class,
        plane1: plane_record(m.plane1()),
        plane2: plane_record(m.plane2()),
        reference: m
            .reference()
            .map(|r| r.row_iter().map(|row| row.iter().copied().collect()).collect()),
    }
}

pub fn to_json(saved: &SavedModel) -> String {
    let model = &saved.model;
    let models = match model {
        FittedModel::Binary { model, .. } => vec![binary_record(model, None, None)],
        FittedModel::Ovo(m) => m
            .models()
            .iter()
            .map(|((i, j), b)| binary_record(b, Some([*i, *j]), None))
            .collect(),
        FittedModel::Ova(m) => m
            .models()
            .iter()
            .enumerate()
            .map(|(c, b)| binary_record(b, None, Some(c)))
            .collect(),
    };
    let file = ModelFile {
        magic: MAGIC.to_string(),
        format_version: FORMAT_VERSION,
        scheme: model.scheme(),
        algorithm: model.algorithm(),
        kernel: model.kernel(),
        feature_count: model.feature_count(),
        class_map: model.class_map().to_vec(),
        models,
        scaler: saved.scaler.clone(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("model file serializes");
    text.push('\n');
    text
}

fn corrupt(e: impl std::fmt::Display) -> TwinSvmError {
    TwinSvmError::Corrupt(e.to_string())
}

pub fn from_json(text: &str) -> Result<SavedModel> {
    if !text.trim_start().starts_with('{') {
        return Err(TwinSvmError::Format("not a JSON model document".into()));
    }
    let value: Value = serde_json::from_str(text).map_err(corrupt)?;
    match value.get("magic").and_then(Value::as_str) {
        Some(MAGIC) => {}
        Some(other) => return Err(TwinSvmError::Format(format!("bad magic '{other}'"))),
        None => return Err(TwinSvmError::Format("missing magic".into())),
    }
    match value.get("format_version").and_then(Value::as_u64) {
        Some(FORMAT_VERSION) => {}
        Some(v) => return Err(TwinSvmError::UnsupportedVersion(v)),
        None => return Err(TwinSvmError::Format("missing or non-integer format_version".into())),
    }
    let file: ModelFile = serde_json::from_value(value).map_err(corrupt)?;
    rebuild(file).map_err(|e| match e {
        TwinSvmError::Validation(msg) | TwinSvmError::Numerical(msg) => TwinSvmError::Corrupt(msg),
        other => other,
    })
}

fn rebuild_binary(file: &ModelFile, rec: BinaryRecord) -> Result<BinaryModel> {
    let reference = match rec.reference {
        None => None,
        Some(rows) => {
            if rows.iter().any(|r| r.len() != file.feature_count) {
                return Err(corrupt("reference row length differs from feature_count"));
            }
            let flat: Vec<f64> = rows.iter().flatten().copied().collect();
            Some(DMatrix::from_row_slice(rows.len(), file.feature_count, &flat))
        }
    };
    let plane = |p: PlaneRecord| Plane {
        w: DVector::from_vec(p.w),
        b: p.b,
    };
    BinaryModel::from_parts(
        file.algorithm,
        plane(rec.plane1),
        plane(rec.plane2),
        file.kernel,
        reference,
        file.feature_count,
    )
}

fn rebuild(mut file: ModelFile) -> Result<SavedModel> {
    let k = file.class_map.len();
    if k < 2 {
        return Err(corrupt("class_map needs at least 2 entries"));
    }
    if let Some(s) = &file.scaler {
        if s.min.len() != file.feature_count || s.max.len() != file.feature_count {
            return Err(corrupt("scaler length differs from feature_count"));
        }
        if s.min.iter().zip(&s.max).any(|(lo, hi)| lo.is_nan() || hi.is_nan() || lo > hi) {
            return Err(corrupt("scaler has min > max"));
        }
    }
    let records = std::mem::take(&mut file.models);
    let model = match file.scheme {
        Scheme::Binary => {
            if k != 2 || records.len() != 1 {
                return Err(corrupt("binary model needs 2 classes and exactly one plane pair"));
            }
            let rec = records.into_iter().next().expect("one record");
            FittedModel::Binary {
                model: rebuild_binary(&file, rec)?,
                class_map: file.class_map.clone(),
            }
        }
        Scheme::Ovo => {
            let expected = class_pairs(k);
            if records.len() != expected.len() {
                return Err(corrupt(format!(
                    "one-vs-one model over {k} classes needs {} records, found {}",
                    expected.len(),
                    records.len()
                )));
            }
            let mut models = Vec::with_capacity(records.len());
            for (rec, (i, j)) in records.into_iter().zip(expected) {
                if rec.pair != Some([i, j]) {
                    return Err(corrupt(format!("expected pair [{i}, {j}], found {:?}", rec.pair)));
                }
                models.push(((i, j), rebuild_binary(&file, rec)?));
            }
            FittedModel::Ovo(OvoModel::from_parts(models, file.class_map.clone())?)
        }
        Scheme::Ova => {
            if records.len() != k {
                return Err(corrupt(format!("one-vs-all model needs {k} records, found {}", records.len())));
            }
            let mut models = Vec::with_capacity(k);
            for (c, rec) in records.into_iter().enumerate() {
                if rec.class != Some(c) {
                    return Err(corrupt(format!("expected class {c}, found {:?}", rec.class)));
                }
                models.push(rebuild_binary(&file, rec)?);
            }
            FittedModel::Ova(OvaModel::from_parts(models, file.class_map.clone())?)
        }
    };
    Ok(SavedModel {
        model,
        scaler: file.scaler,
    })
}

pub fn save_model(saved: &SavedModel, path: &Path) -> Result<()> {
    std::fs::write(path, to_json(saved))?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<SavedModel> {
    from_json(&std::fs::read_to_string(path)?)
}
