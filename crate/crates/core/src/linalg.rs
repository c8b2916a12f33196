//! Dense helpers shared by the estimators.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Result, TwinSvmError};

/// `[m | 1]`.
pub(crate) fn append_ones(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.clone().insert_column(m.ncols(), 1.0)
}

/// `m' m`, through an explicit transpose so the product goes to the blocked GEMM.
pub(crate) fn tr_self(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mt = m.transpose();
    let mut out = &mt * m;
    mirror_lower(&mut out);
    out
}

/// Copies the lower triangle onto the upper one.
pub(crate) fn mirror_lower(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            m[(j, i)] = m[(i, j)];
        }
    }
}

pub(crate) fn add_diagonal(m: &mut DMatrix<f64>, eps: f64) {
    for i in 0..m.nrows() {
        m[(i, i)] += eps;
    }
}

pub(crate) fn cholesky(m: DMatrix<f64>, what: &str) -> Result<Cholesky<f64, Dyn>> {
    m.cholesky()
        .ok_or_else(|| TwinSvmError::numerical(format!("{what} is not positive definite")))
}

/// Column sums, i.e. `m' e`.
pub(crate) fn column_sums(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(m.ncols(), m.column_iter().map(|c| c.sum()))
}
