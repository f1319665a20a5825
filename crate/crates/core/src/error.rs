use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("station {station}: no response defined for setting `{label}`")]
    UnknownSetting { station: char, label: String },

    #[error("station {station} stream is not sorted by time tag at index {index}")]
    UnsortedStream { station: char, index: usize },

    #[error("unwindowed matching requires equal pair-id sets ({0})")]
    PairIdMismatch(String),

    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("AR model is not stationary: {0}")]
    NonStationary(String),

    #[error("singular system: {0}")]
    Singular(String),
}
