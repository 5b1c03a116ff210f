use std::fmt;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A single configuration problem, tied to the key that caused it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    pub key: String,
    pub reason: String,
}

impl ConfigIssue {
    pub fn new(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`: {}", self.key, self.reason)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not positive semidefinite (minimum eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("matrix is not Hermitian positive definite")]
    NotPositiveDefinite,

    #[error("geometry: {0}")]
    Geometry(String),

    #[error(
        "vectorized OBE path needs {required} entries but the guard allows {limit}; use the explicit path"
    )]
    VectorizedGuard { required: usize, limit: usize },

    #[error("empty sample set")]
    EmptySamples,

    #[error("scheme `{scheme}` does not support K = {num_ue} UEs")]
    UnsupportedUeCount { scheme: String, num_ue: usize },

    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),

    #[error("invalid configuration: {}", .0.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; "))]
    Config(Vec<ConfigIssue>),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Process exit code: 1 for configuration problems, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParameter { .. } | Error::UnknownScheme(_) => 1,
            _ => 2,
        }
    }
}
