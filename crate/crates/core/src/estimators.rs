//! Binary TSVM and LSTSVM.
//!
//! With `A` the positive rows and `B` the negative rows, let `H = [Φ(A) | 1]`
//! and `G = [Φ(B) | 1]`, where `Φ` is the identity for the linear kernel and
//! `Φ(X) = K(X, C)` against the reference set `C` otherwise. Each plane is
//! the vector `z = [w; b]`.
//!
//! TSVM solves two box-constrained duals with [`crate::clipdcd`]:
//!
//! ```text
//! Q1 = G (H'H + εI)^-1 G',  0 <= α <= c1,  z1 = -(H'H + εI)^-1 G'α
//! Q2 = H (G'G + εI)^-1 H',  0 <= γ <= c2,  z2 =  (G'G + εI)^-1 H'γ
//! ```
//!
//! Each inverse is a Cholesky factor `L L'`. The factor is applied once as
//! `Y = L^-1 G'`, which gives both `Q1 = Y'Y` and `z1 = -L'^-1 (Y α)`, so no
//! explicit inverse or second product with `G` is ever formed. The two duals
//! run one after the other and the first Hessian is dropped before the second
//! is built.
//!
//! LSTSVM replaces both QPs with the normal equations of its least-squares
//! primal:
//!
//! ```text
//! z1 = -(G'G + H'H / c1 + εI)^-1 G'e2
//! z2 =  (H'H + G'G / c2 + εI)^-1 H'e1
//! ```

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::clipdcd::{self, DualProblem, DualSolution};
use crate::dataset::Dataset;
use crate::error::{Result, TwinSvmError};
use crate::kernels::{self, KernelSpec};
use crate::linalg;

/// Rows per block when mapping a batch through a kernel.
const BATCH_BLOCK: usize = 4096;

const NORM_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Tsvm,
    Lstsvm,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Tsvm => "tsvm",
            Algorithm::Lstsvm => "lstsvm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryLabel {
    Positive,
    Negative,
}

impl BinaryLabel {
    pub fn sign(self) -> i8 {
        match self {
            BinaryLabel::Positive => 1,
            BinaryLabel::Negative => -1,
        }
    }
}

/// The two classes of a binary problem; `a` is +1, `b` is -1.
#[derive(Debug, Clone)]
pub struct BinaryProblem {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

impl BinaryProblem {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        if a.nrows() == 0 || b.nrows() == 0 {
            return Err(TwinSvmError::validation(format!(
                "both classes need samples, got {} positive and {} negative",
                a.nrows(),
                b.nrows()
            )));
        }
        if a.ncols() != b.ncols() || a.ncols() == 0 {
            return Err(TwinSvmError::validation(format!(
                "class matrices have {} and {} features",
                a.ncols(),
                b.ncols()
            )));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(TwinSvmError::validation("samples contain non-finite values"));
        }
        Ok(BinaryProblem { a, b })
    }

    /// Class 0 of a two-class dataset is positive, class 1 negative.
    pub fn from_dataset(ds: &Dataset) -> Result<Self> {
        if ds.class_count() != 2 {
            return Err(TwinSvmError::validation(format!(
                "binary estimators need exactly 2 classes, got {}",
                ds.class_count()
            )));
        }
        BinaryProblem::new(ds.rows_of_class(0), ds.rows_of_class(1))
    }

    /// Rows whose class maps to `Some(true)` are positive, `Some(false)`
    /// negative, `None` dropped.
    pub fn from_partition<F>(ds: &Dataset, side: F) -> Result<Self>
    where
        F: Fn(usize) -> Option<bool>,
    {
        let (mut pos, mut neg) = (Vec::new(), Vec::new());
        for (i, &label) in ds.labels().iter().enumerate() {
            match side(label) {
                Some(true) => pos.push(i),
                Some(false) => neg.push(i),
                None => {}
            }
        }
        BinaryProblem::new(ds.samples().select_rows(&pos), ds.samples().select_rows(&neg))
    }

    pub fn feature_count(&self) -> usize {
        self.a.ncols()
    }

    /// `[A; B]`, the candidate kernel reference rows.
    pub fn stacked(&self) -> DMatrix<f64> {
        let (n1, n2, d) = (self.a.nrows(), self.b.nrows(), self.a.ncols());
        let mut out = DMatrix::zeros(n1 + n2, d);
        out.rows_mut(0, n1).copy_from(&self.a);
        out.rows_mut(n1, n2).copy_from(&self.b);
        out
    }

    /// The same problem with the classes exchanged.
    pub fn swapped(&self) -> BinaryProblem {
        BinaryProblem {
            a: self.b.clone(),
            b: self.a.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperParams {
    pub c1: f64,
    pub c2: f64,
    pub kernel: KernelSpec,
    /// Added to the diagonal of every matrix that gets factored.
    pub epsilon: f64,
    /// clipDCD stopping tolerance (TSVM only).
    pub tolerance: f64,
    /// clipDCD iteration cap per dual (TSVM only).
    pub max_iterations: usize,
    /// Seeds the rectangular-kernel row selection.
    pub seed: u64,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            c1: 1.0,
            c2: 1.0,
            kernel: KernelSpec::linear(),
            epsilon: 1e-5,
            tolerance: clipdcd::DEFAULT_TOLERANCE,
            max_iterations: clipdcd::DEFAULT_MAX_ITERATIONS,
            seed: 0,
        }
    }
}

impl HyperParams {
    pub fn new(c1: f64, c2: f64, kernel: KernelSpec) -> Self {
        HyperParams {
            c1,
            c2,
            kernel,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c1", self.c1),
            ("c2", self.c2),
            ("epsilon", self.epsilon),
            ("tolerance", self.tolerance),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(TwinSvmError::validation(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_iterations == 0 {
            return Err(TwinSvmError::validation("max_iterations must be at least 1"));
        }
        self.kernel.validate()
    }
}

/// One fitted surface `Φ(x)'w + b = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub w: DVector<f64>,
    pub b: f64,
}

impl Plane {
    fn from_augmented(z: &DVector<f64>) -> Plane {
        let m = z.len() - 1;
        Plane {
            w: z.rows(0, m).into_owned(),
            b: z[m],
        }
    }
}

/// Result of a binary decision with the perpendicular distance to each plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub label: BinaryLabel,
    pub d1: f64,
    pub d2: f64,
}

/// A fitted pair of planes.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryModel {
    algorithm: Algorithm,
    plane1: Plane,
    plane2: Plane,
    kernel: KernelSpec,
    reference: Option<DMatrix<f64>>,
    feature_count: usize,
    norm1: f64,
    norm2: f64,
}

impl BinaryModel {
    /// Assembles a model and checks that plane lengths match the kernel
    /// layout: `d` for linear with no reference, `p` for a `p`-row reference.
    pub fn from_parts(
        algorithm: Algorithm,
        plane1: Plane,
        plane2: Plane,
        kernel: KernelSpec,
        reference: Option<DMatrix<f64>>,
        feature_count: usize,
    ) -> Result<Self> {
        kernel.validate()?;
        let expected = match (&reference, kernel.is_linear()) {
            (None, true) => feature_count,
            (Some(r), false) => {
                if r.ncols() != feature_count || r.nrows() == 0 {
                    return Err(TwinSvmError::validation(format!(
                        "reference set is {}x{}, expected {} features",
                        r.nrows(),
                        r.ncols(),
                        feature_count
                    )));
                }
                r.nrows()
            }
            (None, false) => return Err(TwinSvmError::validation("kernel model without a reference set")),
            (Some(_), true) => return Err(TwinSvmError::validation("linear model with a reference set")),
        };
        for (name, p) in [("plane 1", &plane1), ("plane 2", &plane2)] {
            if p.w.len() != expected {
                return Err(TwinSvmError::validation(format!(
                    "{name} has {} coefficients, expected {expected}",
                    p.w.len()
                )));
            }
            if !p.b.is_finite() || p.w.iter().any(|v| !v.is_finite()) {
                return Err(TwinSvmError::numerical(format!("{name} has non-finite coefficients")));
            }
        }
        let norm1 = plane1.w.norm().max(NORM_FLOOR);
        let norm2 = plane2.w.norm().max(NORM_FLOOR);
        Ok(BinaryModel {
            algorithm,
            plane1,
            plane2,
            kernel,
            reference,
            feature_count,
            norm1,
            norm2,
        })
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn plane1(&self) -> &Plane {
        &self.plane1
    }

    pub fn plane2(&self) -> &Plane {
        &self.plane2
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn reference(&self) -> Option<&DMatrix<f64>> {
        self.reference.as_ref()
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn norms(&self) -> (f64, f64) {
        (self.norm1, self.norm2)
    }

    fn check_width(&self, d: usize) -> Result<()> {
        if d != self.feature_count {
            return Err(TwinSvmError::validation(format!(
                "model expects {} features, got {d}",
                self.feature_count
            )));
        }
        Ok(())
    }

    /// Perpendicular distances of every row of `x` to both planes.
    pub fn distances_batch(&self, x: &DMatrix<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
        self.check_width(x.ncols())?;
        let n = x.nrows();
        let m = self.plane1.w.len();
        let mut w = DMatrix::zeros(m, 2);
        w.column_mut(0).copy_from(&self.plane1.w);
        w.column_mut(1).copy_from(&self.plane2.w);

        let mut d1 = DVector::zeros(n);
        let mut d2 = DVector::zeros(n);
        let mut start = 0;
        while start < n {
            let len = BATCH_BLOCK.min(n - start);
            let block = x.rows(start, len).into_owned();
            let scores = match &self.reference {
                None => &block * &w,
                Some(r) => kernels::gram(&self.kernel, &block, r)? * &w,
            };
            for i in 0..len {
                d1[start + i] = (scores[(i, 0)] + self.plane1.b).abs() / self.norm1;
                d2[start + i] = (scores[(i, 1)] + self.plane2.b).abs() / self.norm2;
            }
            start += len;
        }
        Ok((d1, d2))
    }
}

/// Nearest plane wins; equal distances go to the positive class.
#[inline]
pub fn nearest(d1: f64, d2: f64) -> BinaryLabel {
    if d1 <= d2 {
        BinaryLabel::Positive
    } else {
        BinaryLabel::Negative
    }
}

/// Classifies one sample.
pub fn decide(m: &BinaryModel, x: &[f64]) -> Result<Decision> {
    m.check_width(x.len())?;
    let features: Vec<f64> = match &m.reference {
        None => x.to_vec(),
        Some(r) => r
            .row_iter()
            .map(|row| {
                let row: Vec<f64> = row.iter().copied().collect();
                kernels::eval_kernel(&m.kernel, x, &row)
            })
            .collect::<Result<_>>()?,
    };
    let score = |p: &Plane| features.iter().zip(p.w.iter()).map(|(a, b)| a * b).sum::<f64>() + p.b;
    let d1 = score(&m.plane1).abs() / m.norm1;
    let d2 = score(&m.plane2).abs() / m.norm2;
    Ok(Decision {
        label: nearest(d1, d2),
        d1,
        d2,
    })
}

/// Classifies every row of `x` with whole-matrix products.
pub fn decide_batch(m: &BinaryModel, x: &DMatrix<f64>) -> Result<Vec<BinaryLabel>> {
    let (d1, d2) = m.distances_batch(x)?;
    Ok(d1.iter().zip(d2.iter()).map(|(&a, &b)| nearest(a, b)).collect())
}

/// Reference set and mapped class matrices `(C, Φ(A), Φ(B))` for a fit.
type FeatureMaps = (Option<DMatrix<f64>>, DMatrix<f64>, DMatrix<f64>);

fn feature_map(p: &BinaryProblem, hp: &HyperParams) -> Result<FeatureMaps> {
    if hp.kernel.is_linear() {
        return Ok((None, p.a.clone(), p.b.clone()));
    }
    let reference = kernels::select_reference(&p.stacked(), hp.kernel.rect_fraction, hp.seed)?;
    let fa = kernels::gram(&hp.kernel, &p.a, &reference)?;
    let fb = kernels::gram(&hp.kernel, &p.b, &reference)?;
    Ok((Some(reference), fa, fb))
}

/// A fitted TSVM together with its two dual solutions.
#[derive(Debug, Clone)]
pub struct TsvmFit {
    pub model: BinaryModel,
    pub alpha: DualSolution,
    pub gamma: DualSolution,
}

pub fn tsvm_fit(p: &BinaryProblem, hp: &HyperParams) -> Result<BinaryModel> {
    tsvm_fit_with_duals(p, hp).map(|f| f.model)
}

pub fn tsvm_fit_with_duals(p: &BinaryProblem, hp: &HyperParams) -> Result<TsvmFit> {
    hp.validate()?;
    let (reference, fa, fb) = feature_map(p, hp)?;
    let h = linalg::append_ones(&fa);
    let g = linalg::append_ones(&fb);
    drop((fa, fb));

    let (u1, alpha) = twin_dual(&h, &g, hp.c1, hp, "dual 1")?;
    let (u2, gamma) = twin_dual(&g, &h, hp.c2, hp, "dual 2")?;
    let model = BinaryModel::from_parts(
        Algorithm::Tsvm,
        Plane::from_augmented(&(-u1)),
        Plane::from_augmented(&u2),
        hp.kernel,
        reference,
        p.feature_count(),
    )?;
    Ok(TsvmFit { model, alpha, gamma })
}

/// Solves the dual whose objective is built from `own` and constraints from
/// `other`; returns `(own'own + εI)^-1 other' α` and the dual solution.
fn twin_dual(
    own: &DMatrix<f64>,
    other: &DMatrix<f64>,
    c: f64,
    hp: &HyperParams,
    what: &str,
) -> Result<(DVector<f64>, DualSolution)> {
    let mut gram = linalg::tr_self(own);
    linalg::add_diagonal(&mut gram, hp.epsilon);
    let chol = linalg::cholesky(gram, "regularized class Gram matrix")?;
    let l = chol.l();
    let y = l
        .solve_lower_triangular(&other.transpose())
        .ok_or_else(|| TwinSvmError::numerical("singular Cholesky factor"))?;
    let q = linalg::tr_self(&y);

    let dual = DualProblem::new(q, c)
        .with_tolerance(hp.tolerance)
        .with_max_iterations(hp.max_iterations);
    let sol = clipdcd::solve(&dual)?;
    drop(dual);
    if !sol.converged {
        return Err(TwinSvmError::NotConverged {
            problem: what.to_string(),
            iterations: sol.iterations,
            residual: sol.residual,
        });
    }
    let u = l
        .tr_solve_lower_triangular(&(&y * &sol.alpha))
        .ok_or_else(|| TwinSvmError::numerical("singular Cholesky factor"))?;
    Ok((u, sol))
}

pub fn lstsvm_fit(p: &BinaryProblem, hp: &HyperParams) -> Result<BinaryModel> {
    hp.validate()?;
    let (reference, fa, fb) = feature_map(p, hp)?;
    let h = linalg::append_ones(&fa);
    let g = linalg::append_ones(&fb);
    drop((fa, fb));
    let hth = linalg::tr_self(&h);
    let gtg = linalg::tr_self(&g);

    let u1 = least_squares_plane(&hth, &gtg, &linalg::column_sums(&g), hp.c1, hp.epsilon)?;
    let u2 = least_squares_plane(&gtg, &hth, &linalg::column_sums(&h), hp.c2, hp.epsilon)?;
    BinaryModel::from_parts(
        Algorithm::Lstsvm,
        Plane::from_augmented(&(-u1)),
        Plane::from_augmented(&u2),
        hp.kernel,
        reference,
        p.feature_count(),
    )
}

/// `(other'other + own'own / c + εI)^-1 other'e`.
fn least_squares_plane(
    own_gram: &DMatrix<f64>,
    other_gram: &DMatrix<f64>,
    other_sums: &DVector<f64>,
    c: f64,
    eps: f64,
) -> Result<DVector<f64>> {
    let mut system = other_gram + own_gram / c;
    linalg::add_diagonal(&mut system, eps);
    let chol = linalg::cholesky(system, "least-squares system")?;
    Ok(chol.solve(other_sums))
}

/// Fits with the chosen algorithm.
pub fn fit(algorithm: Algorithm, p: &BinaryProblem, hp: &HyperParams) -> Result<BinaryModel> {
    match algorithm {
        Algorithm::Tsvm => tsvm_fit(p, hp),
        Algorithm::Lstsvm => lstsvm_fit(p, hp),
    }
}
