// Negated comparisons like `!(x > 0.0)` are used throughout validation so
// NaN arguments fail closed; index loops in the numeric kernels mirror the
// matrix algebra they implement.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

//! Classification of observations whose features are fuzzy numbers or
//! intervals.
//!
//! The pipeline defuzzifies each feature into a representative real value and
//! hands the resulting crisp vectors to a conventional classifier:
//!
//! - [`fuzzy`] — fuzzy number shapes, membership functions, alpha-cuts;
//! - [`defuzz`] — the MOM / COG / ALC / VAL operators plus the mean-style
//!   baselines M1 (trapezoid parameters) and M2 (interval midpoint);
//! - [`data`] — datasets, synthetic generation, interval conversion,
//!   oversampling, splitting; [`csv_io`] and [`kv`] for files;
//! - [`svm`] — one-vs-rest kernel SVM trained with an SMO dual solver;
//! - [`mlp`] — two-hidden-layer perceptron trained with Adam on
//!   cross-entropy;
//! - [`metrics`] — accuracy, balanced accuracy, macro AUC, Wilcoxon rank-sum;
//! - [`theory`] — empirical Rademacher complexity estimation for the kernel
//!   hypothesis class and the matching closed-form bounds;
//! - [`experiment`] — end-to-end split/select/evaluate protocols and sweeps.

pub mod csv_io;
pub mod data;
pub mod defuzz;
pub mod error;
pub mod experiment;
pub mod fuzzy;
pub mod kv;
pub mod metrics;
pub mod mlp;
pub mod svm;
pub mod theory;
mod util;

pub use error::{Error, Result};
