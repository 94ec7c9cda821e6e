//! Crate-wide error type.

use thiserror::Error;

/// Everything that can go wrong across the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Fuzzy-number parameters violate their ordering or positivity constraints.
    #[error("invalid fuzzy number: {0}")]
    InvalidFuzzyNumber(String),

    /// An argument is outside its documented domain (alpha, beta, fractions, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A defuzzification method was applied to a feature kind it does not support.
    #[error("defuzzifier {method} does not support {kind} features (feature index {index})")]
    UnsupportedKind {
        method: String,
        kind: String,
        index: usize,
    },

    /// Input does not match the schema the model or dataset expects.
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    /// Malformed fuzzy CSV content; positions are 1-based (line, cell).
    #[error("csv error at line {line}, cell {cell}: {msg}")]
    CsvFormat {
        line: usize,
        cell: usize,
        msg: String,
    },

    /// Malformed key-value file content.
    #[error("key-value error at line {line}: {msg}")]
    KvFormat { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// SMO left the dual constraint violated after exhausting its budget.
    #[error("svm training did not converge: dual feasibility residual {residual:e}")]
    Convergence { residual: f64 },

    /// A non-finite value appeared during numeric evaluation.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Inputs that must be nonempty or equal-length were not.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A class required by the computation has no instances.
    #[error("class {0} is absent from the data")]
    ClassAbsent(usize),

    /// Oversampling needs at least two instances of a class to interpolate.
    #[error("cannot interpolate class {class}: only {count} instance(s)")]
    CannotInterpolate { class: usize, count: usize },

    /// A requested split produced an empty partition.
    #[error("split produced an empty partition: {0}")]
    EmptyPartition(String),

    /// A matrix failed a structural requirement (symmetry, positive semidefiniteness).
    #[error("matrix error: {0}")]
    Matrix(String),
}

pub type Result<T> = std::result::Result<T, Error>;
