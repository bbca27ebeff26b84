use thiserror::Error;

/// Errors raised by oracles, solvers and the experiment machinery.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// A parameter violates its documented range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The request is well-formed but outside what this implementation supports
    /// (lattice dimension, integer overflow, brute-force scale).
    #[error("capability exceeded: {0}")]
    Capability(String),

    /// The instance or its oracle behaved inconsistently.
    #[error("instance error: {0}")]
    Instance(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("adversary certificate unavailable: {0}")]
    CertificateUnavailable(String),
}

impl Error {
    /// Short machine-readable code, stable across releases.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Dimension { .. } => "E_DIMENSION",
            Error::InvalidParameter { .. } => "E_PARAMETER",
            Error::InvalidInput(_) => "E_INPUT",
            Error::Capability(_) => "E_CAPABILITY",
            Error::Instance(_) => "E_INSTANCE",
            Error::Numeric(_) => "E_NUMERIC",
            Error::CertificateUnavailable(_) => "E_CERTIFICATE",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
