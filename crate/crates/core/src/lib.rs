//! Time-aware dual cross-visit imputation for irregularly sampled
//! multivariate series grouped into visits.
//!
//! The pipeline normalizes a [`Dataset`], imputes it with chained equations
//! over a feature view and a temporal view, fills gaps within each visit with
//! a Gaussian process, and fuses the two by their relative uncertainty. The
//! [`eval`] module masks known cells and scores the reconstruction.

// `!(x > 0.0)` is used on purpose so NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod data;
pub mod dualcv;
pub mod error;
pub mod eval;
pub mod exec;
pub mod gp;
pub mod impute;
pub mod io;
pub mod linalg;
pub mod mice;
pub mod normalize;
pub mod seed;
pub mod synth;

pub use config::{Config, EcfWindows, Truncation};
pub use data::{
    CellGrid, CellIndex, Dataset, Event, FeatureKind, FeatureSpec, MaskSet, MaskStrategy, Visit,
    Violation,
};
pub use error::{Error, Result};
pub use eval::{nrmse, run_experiment, EvalReport, MaskSpec};
pub use exec::Execution;
pub use impute::{impute, ImputationOutput, MethodVariant};
