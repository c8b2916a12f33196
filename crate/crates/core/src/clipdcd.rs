//! Clipped dual coordinate descent for box-constrained convex QPs
//!
//! ```text
//! min  1/2 a'Qa - e'a    s.t.  0 <= a <= c
//! ```
//!
//! Starting from `a = 0`, each iteration moves the single coordinate whose
//! clipped Newton step gives the largest decrease of the objective. The
//! gradient term `g = Qa` is kept in an O(n) cache and updated with one
//! column of `Q` per step; it is never recomputed from scratch.
//!
//! For coordinate `i` the unclipped step is `(1 - g_i) / Q_ii`. After
//! clipping it to `delta` so that `a_i + delta` stays in `[0, c]`, the
//! objective drops by exactly
//!
//! ```text
//! delta * (1 - g_i) - 1/2 * delta^2 * Q_ii
//! ```
//!
//! Coordinates parked at a bound with the step pointing outward get a zero
//! decrease and are never picked. The solver stops once the best decrease is
//! below `tolerance^2 / (2 max_i Q_ii)`. For an unclipped coordinate that
//! bound is equivalent to `|1 - g_i| < tolerance`, so the stopping rule still
//! reads "decrease below threshold" while leaving every free coordinate
//! within `tolerance` of stationarity.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, TwinSvmError};

pub const DEFAULT_TOLERANCE: f64 = 1e-5;
pub const DEFAULT_MAX_ITERATIONS: usize = 5000;

/// A box-constrained dual QP.
#[derive(Debug, Clone)]
pub struct DualProblem {
    /// Symmetric positive semidefinite Hessian.
    pub q: DMatrix<f64>,
    /// Box upper bound `c`; the lower bound is 0.
    pub upper_bound: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl DualProblem {
    pub fn new(q: DMatrix<f64>, upper_bound: f64) -> Self {
        DualProblem {
            q,
            upper_bound,
            tolerance: DEFAULT_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    /// `1/2 a'Qa - e'a` computed directly from `Q`.
    pub fn objective(&self, alpha: &DVector<f64>) -> f64 {
        0.5 * alpha.dot(&(&self.q * alpha)) - alpha.sum()
    }

    fn validate(&self) -> Result<()> {
        let q = &self.q;
        let n = q.nrows();
        if n == 0 || q.ncols() != n {
            return Err(TwinSvmError::validation(format!(
                "dual Hessian must be square and non-empty, got {}x{}",
                q.nrows(),
                q.ncols()
            )));
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(TwinSvmError::validation("dual Hessian has non-finite entries"));
        }
        for j in 0..n {
            for i in (j + 1)..n {
                let (a, b) = (q[(i, j)], q[(j, i)]);
                if (a - b).abs() > 1e-9 * a.abs().max(b.abs()).max(1.0) {
                    return Err(TwinSvmError::validation(format!(
                        "dual Hessian is not symmetric at ({i}, {j}): {a} vs {b}"
                    )));
                }
            }
        }
        if let Some(i) = (0..n).find(|&i| q[(i, i)] <= 0.0) {
            return Err(TwinSvmError::Solver(format!(
                "non-positive diagonal entry Q[{i},{i}] = {}; the Hessian needs regularization",
                q[(i, i)]
            )));
        }
        if !(self.upper_bound > 0.0 && self.upper_bound.is_finite()) {
            return Err(TwinSvmError::validation(format!(
                "upper bound must be positive, got {}",
                self.upper_bound
            )));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(TwinSvmError::validation(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(TwinSvmError::validation("max_iterations must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alpha: DVector<f64>,
    pub objective: f64,
    /// Coordinate updates performed.
    pub iterations: usize,
    pub converged: bool,
    /// Objective decrease of the best step still available at exit.
    pub residual: f64,
    /// The cached `Qa` at exit.
    pub gradient_cache: DVector<f64>,
}

/// State after one coordinate update, passed to [`solve_observed`].
pub struct Step<'a> {
    pub iteration: usize,
    pub index: usize,
    pub alpha: &'a DVector<f64>,
    pub decrease: f64,
}

pub fn solve(p: &DualProblem) -> Result<DualSolution> {
    solve_observed(p, |_| {})
}

/// [`solve`], calling `observe` after every coordinate update.
pub fn solve_observed<F>(p: &DualProblem, mut observe: F) -> Result<DualSolution>
where
    F: FnMut(&Step<'_>),
{
    p.validate()?;
    let q = &p.q;
    let n = q.nrows();
    let c = p.upper_bound;
    let diag: Vec<f64> = (0..n).map(|i| q[(i, i)]).collect();
    let max_diag = diag.iter().copied().fold(0.0, f64::max);
    let threshold = 0.5 * p.tolerance * p.tolerance / max_diag;

    let mut alpha = DVector::zeros(n);
    let mut g = DVector::zeros(n);
    let mut iterations = 0;
    let mut converged = false;
    let mut residual;

    loop {
        let (best, step, decrease) = best_coordinate(alpha.as_slice(), g.as_slice(), &diag, c);
        residual = decrease;
        if decrease < threshold {
            converged = true;
            break;
        }
        if iterations == p.max_iterations {
            break;
        }
        let updated = (alpha[best] + step).clamp(0.0, c);
        let delta = updated - alpha[best];
        alpha[best] = updated;
        g.axpy(delta, &q.column(best), 1.0);
        iterations += 1;
        observe(&Step {
            iteration: iterations,
            index: best,
            alpha: &alpha,
            decrease,
        });
    }

    let objective = 0.5 * alpha.dot(&g) - alpha.sum();
    Ok(DualSolution {
        alpha,
        objective,
        iterations,
        converged,
        residual,
        gradient_cache: g,
    })
}

/// Index, clipped step and objective decrease of the best single-coordinate move.
#[inline]
fn best_coordinate(alpha: &[f64], g: &[f64], diag: &[f64], c: f64) -> (usize, f64, f64) {
    let mut best = (0, 0.0, f64::NEG_INFINITY);
    for i in 0..alpha.len() {
        let slope = 1.0 - g[i];
        let target = (alpha[i] + slope / diag[i]).clamp(0.0, c);
        let delta = target - alpha[i];
        let decrease = delta * slope - 0.5 * delta * delta * diag[i];
        if decrease > best.2 {
            best = (i, delta, decrease);
        }
    }
    best
}
