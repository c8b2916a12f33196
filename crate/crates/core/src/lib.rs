//! # twinsvm
//!
//! Twin support vector machines for binary and multiclass classification.
//!
//! A twin SVM fits two non-parallel hyperplanes, each close to the samples of
//! one class and at least unit distance from the samples of the other, and
//! classifies a point by whichever plane is nearer. Two estimators are
//! provided:
//!
//! - [`estimators::tsvm_fit`] solves two box-constrained dual QPs with the
//!   clipped dual coordinate descent solver in [`clipdcd`].
//! - [`estimators::lstsvm_fit`] solves two symmetric positive-definite linear
//!   systems (least-squares twin SVM).
//!
//! Both support a linear kernel and an RBF kernel, optionally with a
//! rectangular (reduced) kernel reference set. [`multiclass`] wraps either
//! estimator in one-vs-one or one-vs-all schemes, [`modelselect`] runs grid
//! search with k-fold cross-validation, and [`persistence`] saves fitted
//! models as versioned JSON.

pub mod benchmark;
pub mod clipdcd;
pub mod dataset;
pub mod error;
pub mod estimators;
pub mod ffi;
pub mod kernels;
mod linalg;
pub mod model;
pub mod modelselect;
pub mod multiclass;
pub mod ndcgen;
pub mod persistence;
pub mod surface;

pub use dataset::{Dataset, FoldPlan, ScalerParams};
pub use error::{Result, TwinSvmError};
pub use estimators::{Algorithm, BinaryLabel, BinaryModel, BinaryProblem, HyperParams};
pub use kernels::{KernelKind, KernelSpec};
pub use model::{FittedModel, ModelConfig, Scheme};
