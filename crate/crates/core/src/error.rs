use thiserror::Error;


use crate::config::ConfigError;
use crate::engine::EngineError;
use crate::environment::EnvironmentError;
use crate::protocol::ProtocolError;
use crate::qmath::QmathError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Environment(#[from] EnvironmentError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Qmath(#[from] QmathError),
    #[error("backends disagree: max discrepancy {discrepancy:.3e} exceeds {tolerance:.1e}")]
    BackendMismatch { discrepancy: f64, tolerance: f64 },
    #[error("{0}")]
    Invalid(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}
