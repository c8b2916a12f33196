//! Fixtures and independent reference solvers shared by the integration tests.
//!
//! The oracles below only use dense LU solves, eigenvalues and plain loops,
//! never the library's Cholesky path or coordinate solver.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use twinsvm::dataset::{self, Dataset};
use twinsvm::estimators::BinaryProblem;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// `M'M + 0.1 I` with `M` of shape `rank x n`.
pub fn psd(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> DMatrix<f64> {
    let m = normal_matrix(rng, rank, n);
    let mut q = m.transpose() * m;
    for i in 0..n {
        q[(i, i)] += 0.1;
    }
    // exact symmetry
    for i in 0..n {
        for j in 0..i {
            q[(j, i)] = q[(i, j)];
        }
    }
    q
}

/// A box QP for seed `seed`: size 2..=30, full or half rank, bound in [0.1, 10].
pub fn random_dual(seed: u64) -> (DMatrix<f64>, f64) {
    let mut r = rng(seed);
    let n = 2 + (seed as usize * 7) % 29;
    let rank = if seed.is_multiple_of(2) { n } else { n / 2 + 1 };
    let q = psd(&mut r, n, rank);
    let c = 0.1 + 9.9 * r.random::<f64>();
    (q, c)
}

pub fn dual_objective(q: &DMatrix<f64>, alpha: &DVector<f64>) -> f64 {
    0.5 * alpha.dot(&(q * alpha)) - alpha.sum()
}

fn clip(v: &DVector<f64>, c: f64) -> DVector<f64> {
    v.map(|x| x.clamp(0.0, c))
}

/// Accelerated projected gradient with step `1/L` and gradient restarts, run
/// until `|a - clip(a - grad)|_inf <= 1e-10`.
pub fn projected_gradient(q: &DMatrix<f64>, c: f64) -> (DVector<f64>, f64) {
    let n = q.nrows();
    let lipschitz = q.clone().symmetric_eigenvalues().max();
    let step = 1.0 / lipschitz;
    let grad = |a: &DVector<f64>| q * a - DVector::from_element(n, 1.0);
    let mut x = DVector::zeros(n);
    let mut y = x.clone();
    let mut t = 1.0f64;
    for _ in 0..2_000_000 {
        let next = clip(&(&y - grad(&y) * step), c);
        if (&y - &next).dot(&(&next - &x)) > 0.0 {
            y = x.clone();
            t = 1.0;
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        y = &next + (&next - &x) * ((t - 1.0) / t_next);
        x = next;
        t = t_next;
        let stationarity = (&x - clip(&(&x - grad(&x)), c)).amax();
        if stationarity <= 1e-10 {
            let f = dual_objective(q, &x);
            return (x, f);
        }
    }
    panic!("projected-gradient oracle did not reach stationarity");
}

/// Gradient descent on the strictly convex quadratic `1/2 z'Pz - r'z`, run
/// until the gradient is below `1e-13` relative to `|r|`.
pub fn quadratic_minimizer(p: &DMatrix<f64>, r: &DVector<f64>) -> DVector<f64> {
    let eig = p.clone().symmetric_eigenvalues();
    let step = 1.0 / eig.max();
    let mut z = DVector::zeros(r.len());
    let scale = r.norm().max(1.0);
    for _ in 0..50_000_000 {
        let g = p * &z - r;
        if g.norm() <= 1e-13 * scale {
            return z;
        }
        z -= g * step;
    }
    panic!("gradient descent did not reach stationarity");
}

/// `[X | 1]`.
pub fn augment(x: &DMatrix<f64>) -> DMatrix<f64> {
    x.clone().insert_column(x.ncols(), 1.0)
}

/// Minimizer of the first least-squares twin objective
/// `1/2 |Hz|^2 + c/2 |Gz + e|^2 + c eps/2 |z|^2`, found by gradient descent.
pub fn lstsvm_plane1_oracle(h: &DMatrix<f64>, g: &DMatrix<f64>, c: f64, eps: f64) -> DVector<f64> {
    let m = h.ncols();
    let p = h.transpose() * h + g.transpose() * g * c + DMatrix::identity(m, m) * (c * eps);
    let r = -(g.transpose() * DVector::from_element(g.nrows(), 1.0)) * c;
    quadratic_minimizer(&p, &r)
}

/// Second objective `1/2 |Gz|^2 + c/2 |e - Hz|^2 + c eps/2 |z|^2`.
pub fn lstsvm_plane2_oracle(h: &DMatrix<f64>, g: &DMatrix<f64>, c: f64, eps: f64) -> DVector<f64> {
    let m = h.ncols();
    let p = g.transpose() * g + h.transpose() * h * c + DMatrix::identity(m, m) * (c * eps);
    let r = h.transpose() * DVector::from_element(h.nrows(), 1.0) * c;
    quadratic_minimizer(&p, &r)
}

/// Solves `min 1/2 z'(P)z + c sum(xi)` subject to `s_i (M z)_i + xi_i >= 1`,
/// `xi >= 0`, by enumerating every assignment of each constraint to
/// inactive, active with free multiplier, or multiplier at `c`.
pub fn hinge_qp_active_set(p: &DMatrix<f64>, m: &DMatrix<f64>, s: f64, c: f64) -> DVector<f64> {
    let (rows, dim) = m.shape();
    assert!(rows <= 6, "enumeration is exponential in the constraint count");
    let sm = m * s;
    let mut best: Option<(f64, DVector<f64>)> = None;
    let tol = 1e-9;
    for code in 0..3usize.pow(rows as u32) {
        let states: Vec<usize> = (0..rows).map(|i| (code / 3usize.pow(i as u32)) % 3).collect();
        let free: Vec<usize> = (0..rows).filter(|&i| states[i] == 1).collect();
        let capped: Vec<usize> = (0..rows).filter(|&i| states[i] == 2).collect();
        let k = free.len();
        let mut kkt = DMatrix::zeros(dim + k, dim + k);
        let mut rhs = DVector::zeros(dim + k);
        kkt.view_mut((0, 0), (dim, dim)).copy_from(p);
        for (col, &i) in free.iter().enumerate() {
            for j in 0..dim {
                kkt[(j, dim + col)] = -sm[(i, j)];
                kkt[(dim + col, j)] = sm[(i, j)];
            }
            rhs[dim + col] = 1.0;
        }
        for &i in &capped {
            for j in 0..dim {
                rhs[j] += c * sm[(i, j)];
            }
        }
        let Some(sol) = kkt.lu().solve(&rhs) else { continue };
        let z = sol.rows(0, dim).into_owned();
        let margins = &sm * &z;
        let feasible = (0..rows).all(|i| match states[i] {
            0 => margins[i] >= 1.0 - tol,
            1 => (-tol..=c + tol).contains(&sol[dim + free.iter().position(|&f| f == i).unwrap()]),
            _ => margins[i] <= 1.0 + tol,
        });
        if !feasible {
            continue;
        }
        let slack: f64 = margins.iter().map(|&v| (1.0 - v).max(0.0)).sum();
        let objective = 0.5 * z.dot(&(p * &z)) + c * slack;
        if best.as_ref().is_none_or(|(f, _)| objective < *f - 1e-12) {
            best = Some((objective, z));
        }
    }
    best.expect("some active set is optimal").1
}

/// Reference planes of a TSVM with regularizer `eps` built from the feature
/// matrices of each class.
pub fn tsvm_oracle(fa: &DMatrix<f64>, fb: &DMatrix<f64>, c1: f64, c2: f64, eps: f64) -> (DVector<f64>, DVector<f64>) {
    let h = augment(fa);
    let g = augment(fb);
    let m = h.ncols();
    let p1 = h.transpose() * &h + DMatrix::identity(m, m) * eps;
    let p2 = g.transpose() * &g + DMatrix::identity(m, m) * eps;
    (hinge_qp_active_set(&p1, &g, -1.0, c1), hinge_qp_active_set(&p2, &h, 1.0, c2))
}

/// Augmented coefficients `[w; b]` of a plane.
pub fn augmented(plane: &twinsvm::estimators::Plane) -> DVector<f64> {
    let mut z = plane.w.clone().insert_row(plane.w.len(), 0.0);
    let last = z.len() - 1;
    z[last] = plane.b;
    z
}

pub fn relative_error(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

pub fn xor() -> BinaryProblem {
    BinaryProblem::new(
        DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 1.0]),
        DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
    )
    .unwrap()
}

/// `k` spherical unit-variance clusters with centers on a circle of radius
/// `radius` in the first two coordinates, `per_class` rows each.
pub fn clusters(k: usize, per_class: usize, d: usize, radius: f64, seed: u64) -> Dataset {
    let mut r = rng(seed);
    let mut samples = DMatrix::zeros(k * per_class, d);
    let mut labels = Vec::with_capacity(k * per_class);
    for class in 0..k {
        let angle = 2.0 * std::f64::consts::PI * class as f64 / k as f64;
        for i in 0..per_class {
            let row = class * per_class + i;
            for j in 0..d {
                let center = match j {
                    0 => radius * angle.cos(),
                    1 => radius * angle.sin(),
                    _ => 0.0,
                };
                samples[(row, j)] = center + r.sample::<f64, _>(StandardNormal);
            }
            labels.push(class);
        }
    }
    let class_map = (0..k).map(|c| format!("class{c}")).collect();
    Dataset::new(samples, labels, class_map).unwrap()
}

pub fn iris() -> Dataset {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/iris.csv");
    dataset::load(&path, dataset::Format::Csv, 0, true).unwrap()
}

pub fn normalized_iris() -> Dataset {
    let ds = iris();
    dataset::apply_scaler(&ds, &dataset::fit_scaler(&ds)).unwrap()
}
