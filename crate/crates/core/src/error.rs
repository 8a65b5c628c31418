use thiserror::Error;

/// Errors raised by the numerical library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension {0} (need at least 2)")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator of dimension {dim} exceeds the configured cap {cap}")]
    SizeCap { dim: usize, cap: usize },

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is {0} (expected 1)")]
    InvalidTrace(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("eigensolver did not converge (off-diagonal residual {0:e})")]
    NoConvergence(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("interpolation system is ill-conditioned (estimated condition number {0:e})")]
    IllConditioned(f64),

    #[error("dual certificate did not reach the requested gap (achieved {0:e})")]
    CertificateQuality(f64),

    #[error("witness regime violated: margin estimate {0:e} is not positive")]
    WitnessRegime(f64),

    #[error("robustness is infinite; operation requires a finite value")]
    InfiniteRobustness,

    #[error("state is free (robustness {0:e}); nothing to witness")]
    FreeState(f64),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
