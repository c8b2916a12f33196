//! Labeled sample matrices: parsing, writing, [0,1] scaling and splitting.
//!
//! Two text formats are read:
//!
//! ```text
//! # CSV, label in a configurable column (default 0), optional header line
//! 1,0.5,2.0
//! -1,1.5,0.0
//!
//! # LIBSVM, 1-based strictly increasing sparse indices
//! 1 1:0.5 3:2.0
//! -1 2:1.5
//! ```
//!
//! Labels are kept as their original text and mapped to class indices in
//! order of first appearance, so a file whose first row is `+1` keeps `+1` as
//! class 0 (the positive class of a binary twin SVM).

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TwinSvmError};

/// Input file formats understood by [`load`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Libsvm,
}

/// Feature matrix plus the raw label text of each row, before class mapping.
#[derive(Debug, Clone)]
pub struct RawTable {
    pub samples: DMatrix<f64>,
    /// `None` when the table was read without a label column.
    pub labels: Option<Vec<String>>,
}

/// A labeled sample matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: DMatrix<f64>,
    labels: Vec<usize>,
    class_map: Vec<String>,
}

impl Dataset {
    /// Checks that every row has a label and every label indexes `class_map`.
    pub fn new(samples: DMatrix<f64>, labels: Vec<usize>, class_map: Vec<String>) -> Result<Self> {
        if samples.nrows() != labels.len() {
            return Err(TwinSvmError::validation(format!(
                "{} sample rows but {} labels",
                samples.nrows(),
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_map.len()) {
            return Err(TwinSvmError::validation(format!(
                "label index {bad} outside class map of size {}",
                class_map.len()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(TwinSvmError::validation("samples contain non-finite values"));
        }
        Ok(Dataset {
            samples,
            labels,
            class_map,
        })
    }

    /// Builds the class map from distinct labels in order of first appearance.
    pub fn from_table(table: RawTable) -> Result<Self> {
        let raw = table
            .labels
            .ok_or_else(|| TwinSvmError::validation("table has no label column"))?;
        let mut class_map: Vec<String> = Vec::new();
        let labels = raw
            .into_iter()
            .map(|l| match class_map.iter().position(|c| *c == l) {
                Some(i) => i,
                None => {
                    class_map.push(l);
                    class_map.len() - 1
                }
            })
            .collect::<Vec<_>>();
        if class_map.len() < 2 {
            return Err(TwinSvmError::validation(format!(
                "need at least 2 classes, found {}",
                class_map.len()
            )));
        }
        Dataset::new(table.samples, labels, class_map)
    }

    pub fn samples(&self) -> &DMatrix<f64> {
        &self.samples
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_map(&self) -> &[String] {
        &self.class_map
    }

    pub fn sample_count(&self) -> usize {
        self.samples.nrows()
    }

    pub fn feature_count(&self) -> usize {
        self.samples.ncols()
    }

    pub fn class_count(&self) -> usize {
        self.class_map.len()
    }

    /// Number of samples per class index.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_map.len()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Enforces `d >= 1`, `n >= 2`, `k >= 2` and at least one sample per class.
    pub fn check_trainable(&self) -> Result<()> {
        if self.feature_count() == 0 {
            return Err(TwinSvmError::validation("dataset has no features"));
        }
        if self.sample_count() < 2 {
            return Err(TwinSvmError::validation("dataset needs at least 2 samples"));
        }
        if self.class_count() < 2 {
            return Err(TwinSvmError::validation("dataset needs at least 2 classes"));
        }
        if let Some(c) = self.class_counts().iter().position(|&n| n == 0) {
            return Err(TwinSvmError::validation(format!(
                "class '{}' has no samples",
                self.class_map[c]
            )));
        }
        Ok(())
    }

    /// Rows at `indices`, in that order. The class map is kept whole.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            samples: self.samples.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_map: self.class_map.clone(),
        }
    }

    /// Matrix of the rows labeled `class`, in original order.
    pub fn rows_of_class(&self, class: usize) -> DMatrix<f64> {
        let idx: Vec<usize> = (0..self.labels.len())
            .filter(|&i| self.labels[i] == class)
            .collect();
        self.samples.select_rows(&idx)
    }

    /// Same labels, replaced samples.
    pub fn with_samples(&self, samples: DMatrix<f64>) -> Result<Dataset> {
        Dataset::new(samples, self.labels.clone(), self.class_map.clone())
    }

    /// Label-first CSV without a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (i, &label) in self.labels.iter().enumerate() {
            out.push_str(&self.class_map[label]);
            for j in 0..self.feature_count() {
                write!(out, ",{}", self.samples[(i, j)]).unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// LIBSVM text. Zero entries are omitted except the last column, which
    /// is always written so the feature count survives a reparse.
    pub fn to_libsvm(&self) -> String {
        let d = self.feature_count();
        let mut out = String::new();
        for (i, &label) in self.labels.iter().enumerate() {
            out.push_str(&self.class_map[label]);
            for j in 0..d {
                let v = self.samples[(i, j)];
                if v != 0.0 || j + 1 == d {
                    write!(out, " {}:{}", j + 1, v).unwrap();
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Parses label-column CSV into a [`Dataset`].
pub fn parse_csv(text: &str, label_column: usize, has_header: bool) -> Result<Dataset> {
    Dataset::from_table(read_csv_table(text, Some(label_column), has_header)?)
}

/// Parses LIBSVM sparse text into a dense [`Dataset`].
pub fn parse_libsvm(text: &str) -> Result<Dataset> {
    Dataset::from_table(read_libsvm_table(text)?)
}

/// Reads CSV into a table. With `label_column = None` every field is a feature.
pub fn read_csv_table(text: &str, label_column: Option<usize>, has_header: bool) -> Result<RawTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut width: Option<usize> = None;
    let mut rows = 0usize;

    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            TwinSvmError::Parse {
                line,
                message: match e.kind() {
                    csv::ErrorKind::UnequalLengths {
                        expected_len, len, ..
                    } => format!("expected {expected_len} fields, found {len}"),
                    _ => e.to_string(),
                },
            }
        })?;
        let line = record.position().map_or(rows + 1, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let n_fields = record.len();
        if let Some(col) = label_column {
            if col >= n_fields {
                return Err(TwinSvmError::Parse {
                    line,
                    message: format!("label column {col} out of range for {n_fields} fields"),
                });
            }
        }
        let n_features = n_fields - usize::from(label_column.is_some());
        match width {
            None => width = Some(n_features),
            Some(w) if w != n_features => {
                return Err(TwinSvmError::Parse {
                    line,
                    message: format!("expected {} fields, found {n_fields}", w + usize::from(label_column.is_some())),
                })
            }
            _ => {}
        }
        for (j, field) in record.iter().enumerate() {
            if Some(j) == label_column {
                if field.is_empty() {
                    return Err(TwinSvmError::Parse {
                        line,
                        message: "empty label".into(),
                    });
                }
                labels.push(field.to_string());
            } else {
                values.push(parse_real(field, line)?);
            }
        }
        rows += 1;
    }

    let width = match width {
        Some(w) if rows > 0 => w,
        _ => {
            return Err(TwinSvmError::Parse {
                line: 1,
                message: "no data rows".into(),
            })
        }
    };
    Ok(RawTable {
        samples: DMatrix::from_row_slice(rows, width, &values),
        labels: label_column.map(|_| labels),
    })
}

/// Field count of the first data record and whether the first line looks
/// like a header, i.e. has a non-numeric field outside `label_column`.
pub fn sniff_csv(text: &str, label_column: Option<usize>) -> Result<(usize, bool)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = reader.records().filter(|r| !matches!(r, Ok(rec) if rec.len() == 1 && rec[0].is_empty()));
    let no_rows = || TwinSvmError::Parse {
        line: 1,
        message: "no data rows".into(),
    };
    let bad = |e: csv::Error| TwinSvmError::Parse {
        line: e.position().map_or(0, |p| p.line() as usize),
        message: e.to_string(),
    };
    let first = records.next().ok_or_else(no_rows)?.map_err(bad)?;
    let header = first
        .iter()
        .enumerate()
        .any(|(j, f)| Some(j) != label_column && f.parse::<f64>().is_err());
    if !header {
        return Ok((first.len(), false));
    }
    let data = records.next().ok_or_else(no_rows)?.map_err(bad)?;
    Ok((data.len(), true))
}

/// Reads LIBSVM text into a table; width is the largest index seen.
pub fn read_libsvm_table(text: &str) -> Result<RawTable> {
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut labels = Vec::new();
    let mut width = 0usize;

    for (lineno, raw_line) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label = tokens.next().expect("non-empty line has a token");
        let mut entries = Vec::new();
        let mut last = 0usize;
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| TwinSvmError::Parse {
                line,
                message: format!("expected index:value, found '{tok}'"),
            })?;
            let idx: usize = idx.parse().map_err(|_| TwinSvmError::Parse {
                line,
                message: format!("bad feature index '{idx}'"),
            })?;
            if idx < 1 {
                return Err(TwinSvmError::Parse {
                    line,
                    message: "feature indices are 1-based".into(),
                });
            }
            if idx <= last {
                return Err(TwinSvmError::Parse {
                    line,
                    message: format!("non-increasing feature index {idx} after {last}"),
                });
            }
            last = idx;
            entries.push((idx, parse_real(val, line)?));
        }
        width = width.max(last);
        labels.push(label.to_string());
        rows.push(entries);
    }

    if rows.is_empty() {
        return Err(TwinSvmError::Parse {
            line: 1,
            message: "no data rows".into(),
        });
    }
    let mut samples = DMatrix::zeros(rows.len(), width);
    for (i, entries) in rows.iter().enumerate() {
        for &(idx, v) in entries {
            samples[(i, idx - 1)] = v;
        }
    }
    Ok(RawTable {
        samples,
        labels: Some(labels),
    })
}

fn parse_real(field: &str, line: usize) -> Result<f64> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(TwinSvmError::Parse {
            line,
            message: format!("'{field}' is not a finite number"),
        }),
    }
}

/// Reads a labeled dataset from disk.
pub fn load(path: &Path, format: Format, label_column: usize, has_header: bool) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    match format {
        Format::Csv => parse_csv(&text, label_column, has_header),
        Format::Libsvm => parse_libsvm(&text),
    }
}

/// Per-feature range of a training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl ScalerParams {
    pub fn feature_count(&self) -> usize {
        self.min.len()
    }

    /// Maps every column to [0,1]; constant columns go to 0, values outside
    /// the fitted range are clamped.
    pub fn transform(&self, samples: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if samples.ncols() != self.min.len() {
            return Err(TwinSvmError::validation(format!(
                "scaler fitted on {} features, data has {}",
                self.min.len(),
                samples.ncols()
            )));
        }
        let mut out = samples.clone();
        for (j, mut col) in out.column_iter_mut().enumerate() {
            let (lo, hi) = (self.min[j], self.max[j]);
            let span = hi - lo;
            for v in col.iter_mut() {
                *v = if span > 0.0 {
                    ((*v - lo) / span).clamp(0.0, 1.0)
                } else {
                    0.0
                };
            }
        }
        Ok(out)
    }
}

pub fn fit_scaler(ds: &Dataset) -> ScalerParams {
    let s = ds.samples();
    let (min, max) = s
        .column_iter()
        .map(|c| (c.min(), c.max()))
        .unzip();
    ScalerParams { min, max }
}

pub fn apply_scaler(ds: &Dataset, sp: &ScalerParams) -> Result<Dataset> {
    ds.with_samples(sp.transform(ds.samples())?)
}

/// Assignment of every sample to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub seed: u64,
}

impl FoldPlan {
    pub fn sample_count(&self) -> usize {
        self.assignments.len()
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Random permutation of `0..n` cut into `k` contiguous chunks whose sizes
/// differ by at most one.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 || k > n {
        return Err(TwinSvmError::validation(format!(
            "fold count must satisfy 2 <= k <= n, got k={k}, n={n}"
        )));
    }
    let perm = permutation(n, seed);
    let mut assignments = vec![0; n];
    let (base, extra) = (n / k, n % k);
    let mut pos = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        for &i in &perm[pos..pos + size] {
            assignments[i] = fold;
        }
        pos += size;
    }
    Ok(FoldPlan {
        k,
        assignments,
        seed,
    })
}

/// Row indices of a seeded train/test partition, each sorted ascending.
pub fn train_test_indices(n: usize, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(TwinSvmError::validation(format!(
            "test fraction must lie in (0,1), got {test_fraction}"
        )));
    }
    let n_test = (n as f64 * test_fraction).round() as usize;
    if n_test == 0 || n_test >= n {
        return Err(TwinSvmError::validation(format!(
            "test fraction {test_fraction} of {n} samples leaves an empty part"
        )));
    }
    let perm = permutation(n, seed);
    let mut test = perm[..n_test].to_vec();
    let mut train = perm[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((train, test))
}

/// Returns `(train, test)`.
pub fn train_test_split(ds: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train, test) = train_test_indices(ds.sample_count(), test_fraction, seed)?;
    Ok((ds.subset(&train), ds.subset(&test)))
}

fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    perm
}
