//! Fair principal component analysis.
//!
//! Projections that keep as much variance as possible while making the
//! projected group-conditional means (and optionally covariances) of one or
//! more demographic attributes coincide, a kernelized variant, and metrics to
//! judge the fairness and utility of the resulting representations.

pub mod data;
pub mod error;
pub mod eval;
pub mod fair;
pub mod kernel;
pub mod linalg;
pub mod par;
pub mod persist;

pub use data::{Attribute, Dataset};
pub use error::{Error, Result};
pub use eval::{evaluate, EvalOptions, EvalReport};
pub use fair::{
    fit_fair_pca, fit_fair_pca_s, fit_standard_pca, FitOptions, Method, ProjectionModel,
    TradeoffModel,
};
pub use kernel::{fit_fair_kernel_pca, KernelFitOptions, KernelModel, KernelSpec};
pub use linalg::{Matrix, Vector};
pub use par::Parallelism;
