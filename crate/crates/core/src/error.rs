use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension or field mismatch: {0}")]
    Mismatch(String),

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("point is not on the unit sphere of traceless matrices: {0}")]
    NotOnSphere(String),

    #[error("vector is not tangent: {0}")]
    NotTangent(String),

    #[error("not austere-diagonalizable: {0}")]
    NotAustere(String),

    #[error("critical point of the odd trace map: {0}")]
    Critical(String),

    #[error("ill-conditioned input: {0}")]
    IllConditioned(String),

    #[error("eigenvalue clustering is ambiguous: {0}")]
    ClusterAmbiguity(String),

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
