use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse {
        line: Option<usize>,
        message: String,
    },

    #[error("mesh is not closed: edge ({a}, {b}) borders {count} face(s)")]
    NotClosed { a: usize, b: usize, count: usize },

    #[error("mesh is not orientable")]
    NotOrientable,

    #[error("degenerate face {face} with area {area:e}")]
    DegenerateFace { face: usize, area: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate one-ring at vertex {0}")]
    DegenerateOneRing(usize),

    #[error("vector is not orthogonal to the normal: <X,N> = {0:e}")]
    NonOrthogonal(f64),

    #[error("curvature field was computed on a different mesh")]
    CurvatureMismatch,

    #[error("spinor field has {found} vertices, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigensolver failed: {message} (achieved residual {residual:e})")]
    SolverFailure { message: String, residual: f64 },

    #[error("incomplete eigenbasis: relative residual {residual:e} outside the resolved span")]
    IncompleteBasis { residual: f64 },

    #[error("spinor field vanishes at the sample point")]
    ZeroSpinor,

    #[error("spectrum does not resolve a nonnegative eigenvalue")]
    UnresolvedLambda1,
}

pub type Result<T> = std::result::Result<T, Error>;
