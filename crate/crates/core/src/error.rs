use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MfgError {
    #[error("malformed model: {0}")]
    MalformedModel(String),

    #[error("invalid population distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Every rate vanishes at this population distribution, so no uniformization constant exists.
    #[error("degenerate dynamics: all transition rates vanish")]
    DegenerateDynamics,

    #[error("singular linear system: {0}")]
    SingularSystem(String),

    #[error("reducible generator{}", .0.as_deref().map(|s| format!(" ({s})")).unwrap_or_default())]
    ReducibleGenerator(Option<String>),

    #[error("invalid cut: the state subset must be non-empty and proper")]
    InvalidCut,

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, MfgError>;

impl From<std::io::Error> for MfgError {
    fn from(e: std::io::Error) -> Self {
        MfgError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for MfgError {
    fn from(e: serde_json::Error) -> Self {
        MfgError::Parse(e.to_string())
    }
}
