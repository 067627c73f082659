use std::path::PathBuf;

use crate::sparse::CgReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure categories. [`Error::exit_code`] maps them onto the CLI contract.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("exponent out of range at t = {t}: α(t) = {value} (must lie in [0, {bound}])")]
    ExponentOutOfRange { t: f64, value: f64, bound: f64 },

    #[error(
        "superconvergence condition violated at step {n}: α_n = {alpha_n}, α(t_(n-θ_n)) = {alpha_star}"
    )]
    ConditionViolated {
        n: usize,
        alpha_n: f64,
        alpha_star: f64,
    },

    #[error("newton iteration for step {n} did not converge within {iterations} iterations")]
    NewtonDiverged { n: usize, iterations: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("index ({row}, {col}) out of range for a {nrows}x{ncols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },

    #[error("kernel identity violated for n = {n}, m = {m}: residual {residual:e}")]
    KernelIdentity { n: usize, m: usize, residual: f64 },

    #[error("invalid preconditioner: diagonal entry {row} is {value}")]
    InvalidPreconditioner { row: usize, value: f64 },

    #[error(
        "conjugate gradients did not converge: {} iterations, relative residual {:e}",
        .0.iterations, .0.relative_residual
    )]
    NonConvergence(CgReport),

    #[error("ellipticity violated at ({x}, {y}): eigenvalues [{lo}, {hi}] outside [{lower}, {upper}]")]
    Ellipticity {
        x: f64,
        y: f64,
        lo: f64,
        hi: f64,
        lower: f64,
        upper: f64,
    },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("non-finite value in solution at step {step}")]
    NonFinite { step: usize },

    #[error("step {step} (policy {policy}) failed: {source}")]
    Step {
        step: usize,
        policy: String,
        #[source]
        source: Box<Error>,
    },

    #[error("run with {what} failed: {source}")]
    Study {
        what: String,
        #[source]
        source: Box<Error>,
    },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// 1 = validation, 2 = numerical failure, 3 = I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_)
            | Error::ExponentOutOfRange { .. }
            | Error::LengthMismatch { .. }
            | Error::IndexOutOfRange { .. }
            | Error::Ellipticity { .. }
            | Error::Unsupported(_)
            | Error::Config { .. } => 1,
            Error::ConditionViolated { .. }
            | Error::NewtonDiverged { .. }
            | Error::KernelIdentity { .. }
            | Error::InvalidPreconditioner { .. }
            | Error::NonConvergence(_)
            | Error::NonFinite { .. } => 2,
            Error::Io { .. } => 3,
            Error::Step { source, .. } | Error::Study { source, .. } => source.exit_code(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
