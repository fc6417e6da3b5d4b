use std::fmt;

use thiserror::Error;

/// Broad class of an [`Error`], used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Numerical,
    Io,
}

impl fmt::Display for ErrorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorClass::Validation => "validation",
            ErrorClass::Numerical => "numerical",
            ErrorClass::Io => "io",
        })
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("component {component} is not exposed to any risk factor")]
    EmptyRow { component: usize },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("factor {factor} has non-positive shape {shape}")]
    NonPositiveShape { factor: usize, shape: f64 },

    #[error("factor at position {position} has id {id}; ids must run 1..=l+m in column order")]
    InvalidFactorId { position: usize, id: usize },

    #[error("unknown factor kind {0:?} (expected \"comonotone\" or \"independent\")")]
    UnknownFactorKind(String),

    #[error("exposure entry ({row}, {col}) is {value}; entries must be 0 or 1")]
    NonBinaryExposure { row: usize, col: usize, value: i64 },

    #[error("index {index} out of range for {len} components")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("index {0} appears more than once")]
    DuplicateIndex(usize),

    #[error("pair indices must differ (got {0} twice)")]
    EqualIndices(usize),

    #[error("subset must contain at least {min} components, got {found}")]
    SubsetTooSmall { min: usize, found: usize },

    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("coordinate {index} = {value} lies outside [0, 1]")]
    CoordinateOutOfRange { index: usize, value: f64 },

    #[error("time {index} = {value} is negative")]
    NegativeTime { index: usize, value: f64 },

    #[error("argument {value} outside the domain of {what}")]
    DomainError { what: &'static str, value: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("divergent series: {0}")]
    DivergentSeries(String),

    #[error("no convergence after {iterations} iterations in {what}")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("invalid tolerance {0}")]
    InvalidTolerance(f64),

    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),

    #[error("draw count must be at least 1")]
    ZeroCount,

    #[error("sample batch is empty")]
    EmptyBatch,

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("{} validation problems: {}", .0.len(), join_problems(.0))]
    InvalidModel(Vec<Error>),

    #[error("model file: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::DivergentSeries(_)
            | Error::NoConvergence { .. }
            | Error::QuadratureFailure(_) => ErrorClass::Numerical,
            Error::Io(_) => ErrorClass::Io,
            _ => ErrorClass::Validation,
        }
    }

    /// Stable machine-readable identifier of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptyRow { .. } => "EmptyRow",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NonPositiveShape { .. } => "NonPositiveShape",
            Error::InvalidFactorId { .. } => "InvalidFactorId",
            Error::UnknownFactorKind(_) => "UnknownFactorKind",
            Error::NonBinaryExposure { .. } => "NonBinaryExposure",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::DuplicateIndex(_) => "DuplicateIndex",
            Error::EqualIndices(_) => "EqualIndices",
            Error::SubsetTooSmall { .. } => "SubsetTooSmall",
            Error::InvalidParameter { .. } => "InvalidParameter",
            Error::CoordinateOutOfRange { .. } => "CoordinateOutOfRange",
            Error::NegativeTime { .. } => "NegativeTime",
            Error::DomainError { .. } => "DomainError",
            Error::PreconditionViolated(_) => "PreconditionViolated",
            Error::DivergentSeries(_) => "DivergentSeries",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::InvalidTolerance(_) => "InvalidTolerance",
            Error::QuadratureFailure(_) => "QuadratureFailure",
            Error::ZeroCount => "ZeroCount",
            Error::EmptyBatch => "EmptyBatch",
            Error::DegenerateGrid(_) => "DegenerateGrid",
            Error::InvalidModel(_) => "InvalidModel",
            Error::Json(_) => "ModelParse",
            Error::Io(_) => "Io",
        }
    }
}

fn join_problems(problems: &[Error]) -> String {
    problems
        .iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
