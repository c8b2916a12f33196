//! Train/test timing ladder on generated NDC data.
//!
//! For every size the data is generated, split, and each algorithm is fitted
//! with default hyperparameters and a linear kernel. Only the fit call and
//! the batch predict call are timed. A TSVM cell is skipped when its larger
//! dual Hessian would not fit the memory budget.

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use crate::dataset::train_test_split;
use crate::error::Result;
use crate::estimators::{self, Algorithm, BinaryProblem, HyperParams};
use crate::modelselect::accuracy;
use crate::ndcgen::{self, NdcConfig};

pub const DEFAULT_SIZES: [usize; 5] = [5_000, 10_000, 25_000, 50_000, 100_000];

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub features: usize,
    pub test_fraction: f64,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub params: HyperParams,
    /// Upper limit for one dense dual Hessian, in bytes.
    pub memory_budget: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            sizes: DEFAULT_SIZES.to_vec(),
            features: 32,
            test_fraction: 0.3,
            seed: 0,
            algorithms: vec![Algorithm::Tsvm, Algorithm::Lstsvm],
            params: HyperParams::default(),
            memory_budget: 2 << 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Cell {
    Done {
        accuracy: f64,
        train_seconds: f64,
        test_seconds: f64,
    },
    Skipped {
        reason: String,
    },
    Failed {
        reason: String,
    },
}

impl Cell {
    pub fn accuracy(&self) -> Option<f64> {
        match self {
            Cell::Done { accuracy, .. } => Some(*accuracy),
            _ => None,
        }
    }

    pub fn train_seconds(&self) -> Option<f64> {
        match self {
            Cell::Done { train_seconds, .. } => Some(*train_seconds),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub samples: usize,
    pub cells: Vec<(Algorithm, Cell)>,
}

impl BenchRow {
    pub fn cell(&self, algorithm: Algorithm) -> Option<&Cell> {
        self.cells.iter().find(|(a, _)| *a == algorithm).map(|(_, c)| c)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub features: usize,
    pub rows: Vec<BenchRow>,
}

/// Bytes of the larger dense dual Hessian a TSVM fit would allocate.
pub fn tsvm_hessian_bytes(n_pos: usize, n_neg: usize) -> usize {
    let n = n_pos.max(n_neg);
    n.saturating_mul(n).saturating_mul(std::mem::size_of::<f64>())
}

fn run_cell(algorithm: Algorithm, train: &BinaryProblem, test_x: &nalgebra::DMatrix<f64>, test_y: &[usize], cfg: &BenchConfig) -> Cell {
    if algorithm == Algorithm::Tsvm {
        let bytes = tsvm_hessian_bytes(train.a.nrows(), train.b.nrows());
        if bytes > cfg.memory_budget {
            return Cell::Skipped {
                reason: format!(
                    "dual Hessian needs {} MiB, budget is {} MiB",
                    bytes >> 20,
                    cfg.memory_budget >> 20
                ),
            };
        }
    }
    let start = Instant::now();
    let model = match estimators::fit(algorithm, train, &cfg.params) {
        Ok(m) => m,
        Err(e) => return Cell::Failed { reason: e.to_string() },
    };
    let train_seconds = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let predicted = match estimators::decide_batch(&model, test_x) {
        Ok(p) => p,
        Err(e) => return Cell::Failed { reason: e.to_string() },
    };
    let test_seconds = start.elapsed().as_secs_f64();
    let predicted: Vec<usize> = predicted
        .into_iter()
        .map(|l| usize::from(l == estimators::BinaryLabel::Negative))
        .collect();
    match accuracy(test_y, &predicted) {
        Ok(accuracy) => Cell::Done {
            accuracy,
            train_seconds,
            test_seconds,
        },
        Err(e) => Cell::Failed { reason: e.to_string() },
    }
}

pub fn run(cfg: &BenchConfig) -> Result<BenchReport> {
    let mut rows = Vec::with_capacity(cfg.sizes.len());
    for &n in &cfg.sizes {
        let ds = ndcgen::generate(&NdcConfig::new(n, cfg.features, cfg.seed))?;
        let (train, test) = train_test_split(&ds, cfg.test_fraction, cfg.seed)?;
        let problem = BinaryProblem::from_dataset(&train)?;
        drop(train);
        let cells = cfg
            .algorithms
            .iter()
            .map(|&a| (a, run_cell(a, &problem, test.samples(), test.labels(), cfg)))
            .collect();
        rows.push(BenchRow { samples: n, cells });
    }
    Ok(BenchReport {
        features: cfg.features,
        rows,
    })
}

impl BenchReport {
    /// Fixed-width table, one row per size and three columns per algorithm.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let algorithms: Vec<Algorithm> = self
            .rows
            .first()
            .map(|r| r.cells.iter().map(|(a, _)| *a).collect())
            .unwrap_or_default();
        write!(out, "{:>10}", "samples").unwrap();
        for a in &algorithms {
            let name = a.name().to_uppercase();
            write!(out, " | {:>10} {:>10} {:>10}", format!("{name} acc"), "train s", "test s").unwrap();
        }
        out.push('\n');
        for row in &self.rows {
            write!(out, "{:>10}", row.samples).unwrap();
            for (_, cell) in &row.cells {
                match cell {
                    Cell::Done {
                        accuracy,
                        train_seconds,
                        test_seconds,
                    } => write!(out, " | {accuracy:>10.2} {train_seconds:>10.4} {test_seconds:>10.5}").unwrap(),
                    Cell::Skipped { .. } => write!(out, " | {:>32}", "skipped (memory)").unwrap(),
                    Cell::Failed { .. } => write!(out, " | {:>32}", "failed").unwrap(),
                }
            }
            out.push('\n');
        }
        for row in &self.rows {
            for (a, cell) in &row.cells {
                if let Cell::Skipped { reason } | Cell::Failed { reason } = cell {
                    writeln!(out, "{} at {}: {reason}", a.name(), row.samples).unwrap();
                }
            }
        }
        out
    }
}
