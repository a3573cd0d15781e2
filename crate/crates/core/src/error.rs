use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mode-count mismatch: {0} vs {1}")]
    ModeMismatch(usize, usize),
    #[error("adjoint series still nonzero after {0} terms")]
    NonTerminatingAdjoint(usize),
    #[error("generator has degree {0}; at most 2 is required")]
    DegreeTooHigh(u32),
    #[error("generator is not Hermitian (anti-Hermitian part {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not symplectic (defect {0:e})")]
    NotSymplectic(f64),
    #[error("gate cannot be teleported: {0}")]
    GateNotTeleportable(String),
    #[error("invalid argument: {0}")]
    Domain(String),
    #[error("truncation: {0}")]
    Truncation(String),
    #[error("degenerate measurement: {0}")]
    DegenerateMeasurement(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("linear algebra: {0}")]
    Linalg(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
