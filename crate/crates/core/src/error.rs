use thiserror::Error;

/// Errors raised by the sampling, kernel and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular sampling matrix (|det| = {det:e})")]
    SingularMatrix { det: f64 },

    #[error("quadrature did not converge: achieved {achieved:e}, target {target:e} after {evaluations} integrand evaluations")]
    Quadrature {
        achieved: f64,
        target: f64,
        evaluations: usize,
    },

    #[error("no wavevector reaches the {threshold_db} dB threshold")]
    EmptySupport { threshold_db: f64 },

    #[error("samples do not match the lattice: {0}")]
    LatticeMismatch(String),

    #[error("kernel support does not pair with the sampling lattice: {0}")]
    KernelMismatch(String),

    #[error("non-finite autocorrelation value at displacement ({x}, {y})")]
    NonFiniteAcf { x: f64, y: f64 },

    #[error("eigensolver failed on a {n}x{n} matrix (max |off-diagonal| = {max_offdiag:e}, diagonal range [{min_diag:e}, {max_diag:e}])")]
    Eigen {
        n: usize,
        max_offdiag: f64,
        min_diag: f64,
        max_diag: f64,
    },

    #[error("matrix is not positive semidefinite: eigenvalue {value:e} below -{tolerance:e}")]
    NotPositiveSemidefinite { value: f64, tolerance: f64 },

    #[error("scenario file: {0}")]
    Scenario(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
