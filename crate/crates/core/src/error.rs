use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },
    #[error("eigenvalue {value:.3e} below the clamp window")]
    NegativeEigenvalue { value: f64 },
    #[error("I - zT is numerically singular (condition estimate {condition:.3e})")]
    SingularShift { condition: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("not a C.0 contraction: {0}")]
    NotContraction(String),
    #[error("point outside the open disk: {0}")]
    InvalidPoint(String),
    #[error("basis size {size} exceeds cap {cap}")]
    SizeOverflow { size: usize, cap: usize },
    #[error("symbol degree {degree} exceeds truncation degree {max}")]
    DegreeOverflow { degree: usize, max: usize },
    #[error("operator does not intertwine the shifts (residual {residual:.3e})")]
    NotIntertwining { residual: f64 },
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("adjoint defect space is zero")]
    ZeroDefect,
    #[error("no safe degree range: {0}")]
    UnsafeDegree(String),
    #[error("symbol is not inner on the truncation (residual {residual:.3e})")]
    NotInner { residual: f64 },
    #[error("wandering subspace has dimension {dim} with scalar coefficients")]
    AmbiguousWandering { dim: usize },
}
