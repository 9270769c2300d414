use thiserror::Error;

/// Errors raised anywhere in the pipeline.
///
/// Each variant maps onto one of the CLI exit codes through [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("homoclinic connection unsupported: self-loop at node '{0}'")]
    Homoclinic(String),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(String, String),
    #[error("unknown node label '{0}'")]
    UnknownNode(String),
    #[error("network is not strongly connected: {0}")]
    NotStronglyConnected(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("size guard exceeded: {0}")]
    SizeGuard(String),
    #[error("solver limit: {0}")]
    SolverLimit(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("synthesis failure: {0}")]
    Synthesis(String),
    #[error("verification failure: {0}")]
    Verification(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Exit code contract of the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SolverLimit(_) | Error::Infeasible(_) => 2,
            Error::Synthesis(_) => 3,
            Error::Verification(_) => 4,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
