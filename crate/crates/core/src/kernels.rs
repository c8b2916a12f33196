//! Kernel functions and Gram matrices.
//!
//! RBF is parameterized as `exp(-gamma * ||x - y||^2)`. A kernel model maps a
//! sample `x` to the row `K(x, C)` against a reference set `C`, which is
//! either every training row or a seeded random fraction of them (the
//! rectangular kernel).

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TwinSvmError};

/// Default RBF width when none is given.
pub const DEFAULT_GAMMA: f64 = 1.0 / 128.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    Rbf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    /// Only read for RBF.
    pub gamma: f64,
    /// Fraction of training rows kept as the kernel reference set, in (0,1].
    pub rect_fraction: f64,
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec::linear()
    }
}

impl KernelSpec {
    pub fn linear() -> Self {
        KernelSpec {
            kind: KernelKind::Linear,
            gamma: DEFAULT_GAMMA,
            rect_fraction: 1.0,
        }
    }

    pub fn rbf(gamma: f64) -> Self {
        KernelSpec {
            kind: KernelKind::Rbf,
            gamma,
            rect_fraction: 1.0,
        }
    }

    pub fn with_rect_fraction(mut self, fraction: f64) -> Self {
        self.rect_fraction = fraction;
        self
    }

    pub fn is_linear(&self) -> bool {
        self.kind == KernelKind::Linear
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == KernelKind::Rbf && !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(TwinSvmError::validation(format!(
                "RBF gamma must be positive, got {}",
                self.gamma
            )));
        }
        if !(self.rect_fraction > 0.0 && self.rect_fraction <= 1.0) {
            return Err(TwinSvmError::validation(format!(
                "rectangular kernel fraction must lie in (0,1], got {}",
                self.rect_fraction
            )));
        }
        Ok(())
    }
}

#[inline]
fn eval_unchecked(spec: &KernelSpec, x: &[f64], y: &[f64]) -> f64 {
    match spec.kind {
        KernelKind::Linear => x.iter().zip(y).map(|(a, b)| a * b).sum(),
        KernelKind::Rbf => {
            let dist2: f64 = x
                .iter()
                .zip(y)
                .map(|(a, b)| {
                    let d = a - b;
                    d * d
                })
                .sum();
            (-spec.gamma * dist2).exp()
        }
    }
}

pub fn eval_kernel(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(TwinSvmError::validation(format!(
            "kernel arguments have lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    Ok(eval_unchecked(spec, x, y))
}

/// `out[(i, j)] = K(rows[i], reference[j])`.
pub fn gram(spec: &KernelSpec, rows: &DMatrix<f64>, reference: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if rows.ncols() != reference.ncols() {
        return Err(TwinSvmError::validation(format!(
            "gram inputs have {} and {} features",
            rows.ncols(),
            reference.ncols()
        )));
    }
    let (m, p) = (rows.nrows(), reference.nrows());
    if spec.is_linear() {
        return Ok(rows * reference.transpose());
    }
    // Row-major copies so both operands of every evaluation are contiguous.
    let x_rows = row_major(rows);
    let r_rows = row_major(reference);
    let d = rows.ncols().max(1);
    let mut out = DMatrix::zeros(m, p);
    if m == 0 || p == 0 {
        return Ok(out);
    }
    // Column-major storage: one chunk per reference row.
    out.as_mut_slice()
        .par_chunks_mut(m)
        .zip(r_rows.par_chunks(d))
        .for_each(|(col, r)| {
            for (i, v) in col.iter_mut().enumerate() {
                *v = eval_unchecked(spec, &x_rows[i * d..(i + 1) * d], r);
            }
        });
    Ok(out)
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

/// Picks `max(1, round(fraction * n))` rows without replacement, in
/// ascending row order. `fraction == 1` returns every row unchanged.
pub fn select_reference(rows: &DMatrix<f64>, fraction: f64, seed: u64) -> Result<DMatrix<f64>> {
    let n = rows.nrows();
    if n == 0 {
        return Err(TwinSvmError::validation("cannot select a reference set from no rows"));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(TwinSvmError::validation(format!(
            "rectangular kernel fraction must lie in (0,1], got {fraction}"
        )));
    }
    if fraction == 1.0 {
        return Ok(rows.clone());
    }
    let p = ((fraction * n as f64).round() as usize).clamp(1, n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, n, p).into_vec();
    idx.sort_unstable();
    Ok(rows.select_rows(&idx))
}
