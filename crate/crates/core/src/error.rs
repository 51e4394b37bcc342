use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by state construction, heralded operations and the plan
/// pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("insufficient cutoff: {0}")]
    InsufficientCutoff(String),

    /// The conditioning event has zero probability (or the ideal operator
    /// annihilates the input).
    #[error("herald impossible: {0}")]
    HeraldImpossible(String),

    #[error("{0}")]
    Plan(#[from] crate::plan::PlanError),

    #[error("stage {stage} ({op}) failed: {source}")]
    Stage {
        stage: usize,
        op: String,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn mismatch(msg: impl Into<String>) -> Self {
        Error::SpaceMismatch(msg.into())
    }

    pub(crate) fn impossible(msg: impl Into<String>) -> Self {
        Error::HeraldImpossible(msg.into())
    }

    /// True for herald-impossible failures, including ones wrapped by a plan
    /// stage.
    pub fn is_herald_impossible(&self) -> bool {
        match self {
            Error::HeraldImpossible(_) => true,
            Error::Stage { source, .. } => source.is_herald_impossible(),
            _ => false,
        }
    }
}
