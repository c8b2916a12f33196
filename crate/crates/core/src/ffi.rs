//! C-compatible entry points for foreign-language bindings.
//!
//! Handles are opaque `Estimator` pointers created by
//! [`twsvm_estimator_new`], [`twsvm_meta_new`] or [`twsvm_load`] and released
//! with [`twsvm_free`]. Functions returning `c_int` use the status codes
//! below; on failure [`twsvm_last_error`] describes the problem. Sample
//! matrices are row-major `rows * cols` buffers of `f64`. Labels go in as
//! NUL-terminated UTF-8 strings and come out as class indices, which
//! [`twsvm_class_label`] maps back to text.
//!
//! Files written by [`twsvm_save`] are the same documents the CLI writes, so
//! the two interoperate in both directions.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::path::Path;
use std::ptr;

use nalgebra::DMatrix;

use crate::clipdcd::{self, DualProblem};
use crate::dataset::{Dataset, RawTable};
use crate::error::TwinSvmError;
use crate::estimators::{Algorithm, HyperParams};
use crate::kernels::{KernelSpec, DEFAULT_GAMMA};
use crate::model::{fit_model, ModelConfig, Scheme};
use crate::persistence::{self, SavedModel};

pub const TWSVM_OK: c_int = 0;
pub const TWSVM_ERR_ARGUMENT: c_int = 1;
pub const TWSVM_ERR_STATE: c_int = 2;
pub const TWSVM_ERR_DATA: c_int = 3;
pub const TWSVM_ERR_NUMERICAL: c_int = 4;
pub const TWSVM_ERR_IO: c_int = 5;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("NULs replaced"));
}

fn fail(status: c_int, msg: impl Into<String>) -> c_int {
    set_error(msg);
    status
}

fn status_of(e: &TwinSvmError) -> c_int {
    match e {
        _ if e.is_numerical() => TWSVM_ERR_NUMERICAL,
        TwinSvmError::Io(_)
        | TwinSvmError::Format(_)
        | TwinSvmError::UnsupportedVersion(_)
        | TwinSvmError::Corrupt(_) => TWSVM_ERR_IO,
        _ => TWSVM_ERR_DATA,
    }
}

fn fail_with(e: TwinSvmError) -> c_int {
    fail(status_of(&e), e.to_string())
}

/// Opaque estimator handle.
pub struct Estimator {
    config: ModelConfig,
    fitted: Option<SavedModel>,
    labels: Vec<CString>,
}

impl Estimator {
    fn set_fitted(&mut self, saved: SavedModel) {
        self.labels = saved
            .model
            .class_map()
            .iter()
            .map(|l| CString::new(l.replace('\0', " ")).expect("NULs replaced"))
            .collect();
        self.fitted = Some(saved);
    }
}

/// Message of the last failed call on this thread. Valid until the next
/// failing call.
#[no_mangle]
pub extern "C" fn twsvm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates an unfitted binary estimator.
///
/// `algorithm`: 0 TSVM, 1 LSTSVM. `kernel`: 0 linear, 1 RBF. A non-positive
/// or NaN `gamma` selects the default width 2^-7. Returns NULL on invalid
/// arguments.
#[no_mangle]
pub extern "C" fn twsvm_estimator_new(
    algorithm: c_int,
    kernel: c_int,
    c1: f64,
    c2: f64,
    gamma: f64,
    rect: f64,
    epsilon: f64,
) -> *mut Estimator {
    let algorithm = match algorithm {
        0 => Algorithm::Tsvm,
        1 => Algorithm::Lstsvm,
        other => {
            set_error(format!("unknown algorithm code {other}"));
            return ptr::null_mut();
        }
    };
    let gamma = if gamma > 0.0 { gamma } else { DEFAULT_GAMMA };
    let kernel = match kernel {
        0 => KernelSpec::linear(),
        1 => KernelSpec::rbf(gamma).with_rect_fraction(rect),
        other => {
            set_error(format!("unknown kernel code {other}"));
            return ptr::null_mut();
        }
    };
    let params = HyperParams {
        c1,
        c2,
        kernel,
        epsilon,
        ..Default::default()
    };
    if let Err(e) = params.validate() {
        set_error(e.to_string());
        return ptr::null_mut();
    }
    Box::into_raw(Box::new(Estimator {
        config: ModelConfig {
            algorithm,
            scheme: Scheme::Binary,
            params,
        },
        fitted: None,
        labels: Vec::new(),
    }))
}

/// Wraps a copy of `base`'s configuration in a multiclass scheme
/// (1 one-vs-one, 2 one-vs-all). `base` is not consumed.
///
/// # Safety
/// `base` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn twsvm_meta_new(base: *const Estimator, scheme: c_int) -> *mut Estimator {
    let Some(base) = base.as_ref() else {
        set_error("null base estimator");
        return ptr::null_mut();
    };
    let scheme = match scheme {
        1 => Scheme::Ovo,
        2 => Scheme::Ova,
        other => {
            set_error(format!("unknown multiclass scheme code {other}"));
            return ptr::null_mut();
        }
    };
    Box::into_raw(Box::new(Estimator {
        config: ModelConfig {
            scheme,
            ..base.config
        },
        fitted: None,
        labels: Vec::new(),
    }))
}

/// # Safety
/// `h` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn twsvm_free(h: *mut Estimator) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

unsafe fn matrix_from(x: *const f64, rows: usize, cols: usize) -> Result<DMatrix<f64>, c_int> {
    if x.is_null() && rows * cols > 0 {
        return Err(fail(TWSVM_ERR_ARGUMENT, "null sample buffer"));
    }
    let data = if rows * cols == 0 {
        &[][..]
    } else {
        std::slice::from_raw_parts(x, rows * cols)
    };
    Ok(DMatrix::from_row_slice(rows, cols, data))
}

/// Fits the estimator on `rows * cols` samples with `rows` string labels.
///
/// # Safety
/// `h` must be a live handle, `x` must point to `rows * cols` doubles and
/// `labels` to `rows` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn twsvm_fit(
    h: *mut Estimator,
    x: *const f64,
    rows: usize,
    cols: usize,
    labels: *const *const c_char,
) -> c_int {
    let Some(est) = h.as_mut() else {
        return fail(TWSVM_ERR_ARGUMENT, "null estimator");
    };
    let samples = match matrix_from(x, rows, cols) {
        Ok(m) => m,
        Err(status) => return status,
    };
    if labels.is_null() {
        return fail(TWSVM_ERR_ARGUMENT, "null label buffer");
    }
    let mut text = Vec::with_capacity(rows);
    for i in 0..rows {
        let p = *labels.add(i);
        if p.is_null() {
            return fail(TWSVM_ERR_ARGUMENT, format!("null label at row {i}"));
        }
        match CStr::from_ptr(p).to_str() {
            Ok(s) => text.push(s.to_string()),
            Err(_) => return fail(TWSVM_ERR_ARGUMENT, format!("label at row {i} is not UTF-8")),
        }
    }
    let ds = match Dataset::from_table(RawTable {
        samples,
        labels: Some(text),
    }) {
        Ok(ds) => ds,
        Err(e) => return fail_with(e),
    };
    if est.config.scheme == Scheme::Binary && ds.class_count() != 2 {
        return fail(
            TWSVM_ERR_ARGUMENT,
            format!("binary estimator got {} classes; wrap it in a multiclass scheme", ds.class_count()),
        );
    }
    match fit_model(&ds, &est.config) {
        Ok(model) => {
            est.set_fitted(SavedModel::new(model, None));
            TWSVM_OK
        }
        Err(e) => fail_with(e),
    }
}

/// Writes one class index per row into `out`.
///
/// # Safety
/// `h` must be a live handle, `x` must point to `rows * cols` doubles and
/// `out` to room for `rows` values.
#[no_mangle]
pub unsafe extern "C" fn twsvm_predict(
    h: *const Estimator,
    x: *const f64,
    rows: usize,
    cols: usize,
    out: *mut i64,
) -> c_int {
    let Some(est) = h.as_ref() else {
        return fail(TWSVM_ERR_ARGUMENT, "null estimator");
    };
    let Some(saved) = &est.fitted else {
        return fail(TWSVM_ERR_STATE, "estimator is not fitted");
    };
    if cols != saved.model.feature_count() {
        return fail(
            TWSVM_ERR_ARGUMENT,
            format!("model expects {} features, got {cols}", saved.model.feature_count()),
        );
    }
    if out.is_null() && rows > 0 {
        return fail(TWSVM_ERR_ARGUMENT, "null output buffer");
    }
    let samples = match matrix_from(x, rows, cols) {
        Ok(m) => m,
        Err(status) => return status,
    };
    match saved.predict_batch(&samples) {
        Ok(pred) => {
            for (i, c) in pred.into_iter().enumerate() {
                *out.add(i) = c as i64;
            }
            TWSVM_OK
        }
        Err(e) => fail_with(e),
    }
}

/// 1 if fitted, 0 if not, -1 for NULL.
///
/// # Safety
/// `h` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn twsvm_is_fitted(h: *const Estimator) -> c_int {
    match h.as_ref() {
        Some(est) => c_int::from(est.fitted.is_some()),
        None => -1,
    }
}

/// Number of classes of a fitted estimator, or -1.
///
/// # Safety
/// `h` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn twsvm_class_count(h: *const Estimator) -> i64 {
    match h.as_ref() {
        Some(est) if est.fitted.is_some() => est.labels.len() as i64,
        _ => -1,
    }
}

/// Label text of class `index`, or NULL. Valid until the handle is refitted
/// or freed.
///
/// # Safety
/// `h` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn twsvm_class_label(h: *const Estimator, index: usize) -> *const c_char {
    match h.as_ref().and_then(|est| est.labels.get(index)) {
        Some(label) => label.as_ptr(),
        None => {
            set_error(format!("no class label at index {index}"));
            ptr::null()
        }
    }
}

unsafe fn path_from<'a>(path: *const c_char) -> Result<&'a Path, c_int> {
    if path.is_null() {
        return Err(fail(TWSVM_ERR_ARGUMENT, "null path"));
    }
    CStr::from_ptr(path)
        .to_str()
        .map(Path::new)
        .map_err(|_| fail(TWSVM_ERR_ARGUMENT, "path is not UTF-8"))
}

/// # Safety
/// `h` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn twsvm_save(h: *const Estimator, path: *const c_char) -> c_int {
    let Some(est) = h.as_ref() else {
        return fail(TWSVM_ERR_ARGUMENT, "null estimator");
    };
    let Some(saved) = &est.fitted else {
        return fail(TWSVM_ERR_STATE, "estimator is not fitted");
    };
    let path = match path_from(path) {
        Ok(p) => p,
        Err(status) => return status,
    };
    match persistence::save_model(saved, path) {
        Ok(()) => TWSVM_OK,
        Err(e) => fail_with(e),
    }
}

/// Loads a model file into a new fitted handle, or NULL.
///
/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn twsvm_load(path: *const c_char) -> *mut Estimator {
    let Ok(path) = path_from(path) else {
        return ptr::null_mut();
    };
    match persistence::load_model(path) {
        Ok(saved) => {
            let config = ModelConfig {
                algorithm: saved.model.algorithm(),
                scheme: saved.model.scheme(),
                params: HyperParams {
                    kernel: saved.model.kernel(),
                    ..Default::default()
                },
            };
            let mut est = Estimator {
                config,
                fitted: None,
                labels: Vec::new(),
            };
            est.set_fitted(saved);
            Box::into_raw(Box::new(est))
        }
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// Solves `min 1/2 a'Qa - e'a, 0 <= a <= c` for a row-major `n * n` matrix
/// `q`, writing `n` multipliers to `alpha`. A non-positive `tol` selects the
/// default 1e-5.
///
/// # Safety
/// `q` must point to `n * n` doubles and `alpha` to room for `n`.
#[no_mangle]
pub unsafe extern "C" fn twsvm_clipdcd_optimize(
    q: *const f64,
    n: usize,
    c: f64,
    tol: f64,
    alpha: *mut f64,
) -> c_int {
    if q.is_null() || alpha.is_null() {
        return fail(TWSVM_ERR_ARGUMENT, "null buffer");
    }
    let q = match matrix_from(q, n, n) {
        Ok(m) => m,
        Err(status) => return status,
    };
    let tol = if tol > 0.0 { tol } else { clipdcd::DEFAULT_TOLERANCE };
    match clipdcd::solve(&DualProblem::new(q, c).with_tolerance(tol)) {
        Ok(sol) => {
            for (i, v) in sol.alpha.iter().enumerate() {
                *alpha.add(i) = *v;
            }
            TWSVM_OK
        }
        Err(e) => fail_with(e),
    }
}
