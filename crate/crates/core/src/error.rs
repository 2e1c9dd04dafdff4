use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum DscError {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("integration diverged at t = {time}: non-finite state")]
    Divergence { time: f64 },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("gain b{stage} = {value:e} is below the floor {floor:e}")]
    GainFloor {
        stage: usize,
        value: f64,
        floor: f64,
    },

    #[error("ill-conditioned metric: condition estimate {estimate:e} exceeds cap {cap:e}")]
    Conditioning { estimate: f64, cap: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{path}: {message}")]
    Spec { path: String, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl DscError {
    /// Process exit code: 1 for numerical failures, 2 for usage and configuration errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            DscError::Divergence { .. }
            | DscError::NonFinite(_)
            | DscError::GainFloor { .. }
            | DscError::Conditioning { .. } => 1,
            DscError::Shape(_)
            | DscError::Config(_)
            | DscError::Domain(_)
            | DscError::Spec { .. }
            | DscError::Io { .. } => 2,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        DscError::Config(msg.into())
    }

    /// Prefixes spec-path context onto configuration style errors.
    pub fn in_spec(self, path: &str) -> Self {
        match self {
            DscError::Config(m) | DscError::Domain(m) | DscError::Shape(m) => DscError::Spec {
                path: path.to_string(),
                message: m,
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, DscError>;
