use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("stabilizer support has odd size {0}; a parity-changing operator is not physical")]
    OddSupport(usize),

    #[error("unsupported code distance {d}: {reason}")]
    InvalidDistance { d: usize, reason: &'static str },

    #[error("invalid mode count {0}: must be even and at most {max}", max = crate::exactsim::MAX_MODES)]
    InvalidModeCount(usize),

    #[error("inconsistent outcome specification: {0}")]
    InconsistentOutcomes(String),

    #[error("matching infeasible: {0}")]
    MatchingInfeasible(String),

    #[error("decoder left a non-trivial syndrome on {0} plaquette(s)")]
    DirtySyndrome(usize),

    #[error("merge rejected: {0}")]
    Merge(String),

    #[error("no bar pattern satisfies stabilizer {plaquette}: {reason}")]
    PatternSearch { plaquette: usize, reason: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed history file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
