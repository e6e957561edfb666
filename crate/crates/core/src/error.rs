use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("support escape: {0}")]
    SupportEscape(String),
    #[error("under-resolved kernel: {0}")]
    UnderResolved(String),
    #[error("not a diffeomorphism: {0}")]
    NotDiffeomorphism(String),
    #[error("monotonicity lost: {0}")]
    MonotonicityLost(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("blow-up/unstable: {0}")]
    Unstable(String),
    #[error("epsilon too large: {0}")]
    EpsilonTooLarge(String),
    #[error("g not ≡ 1 on required window: {0}")]
    PlateauViolated(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
