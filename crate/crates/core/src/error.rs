use num_bigint::BigInt;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid source spec `{spec}`: {reason}")]
    ParseSource { spec: String, reason: String },

    #[error("partial quotient a_{index} = {value} must be at least 1")]
    InvalidQuotient { index: usize, value: BigInt },

    #[error("source exhausted: needed {needed} partial quotients, only {available} available")]
    SourceExhausted { needed: usize, available: usize },

    #[error("bracket depth must be at least 2, got {0}")]
    DepthTooSmall(usize),

    #[error("comparison of `{left}` and `{right}` at t = {t} undecided after depth {depth}")]
    ComparisonUndecided {
        left: String,
        right: String,
        t: BigInt,
        depth: usize,
    },

    #[error("t = {t} is not a convergent denominator of `{label}` past the second")]
    NotAJumpPoint { label: String, t: BigInt },

    #[error("t = {t} is below the domain of the staircase (t >= 1)")]
    TimeOutOfRange { t: BigInt },

    #[error("brute-force oracle cap exceeded: t = {t} > cap {cap}")]
    CapExceeded { t: BigInt, cap: u64 },

    #[error("index ({j}, {l}) out of range for k = {k}")]
    IndexOutOfRange { k: usize, j: usize, l: usize },

    #[error("position {position} out of range for k = {k}")]
    PositionOutOfRange { k: usize, position: usize },

    #[error("vector length {got} does not match n = {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("k must be at least {min}, got {k}")]
    InvalidK { k: usize, min: usize },

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),

    #[error("tuple must not be empty")]
    EmptyTuple,

    #[error("enumeration inference failed: {0}")]
    EnumerationInferenceFailed(String),

    #[error("lemma hypothesis not met: {0}")]
    HypothesisNotMet(String),

    #[error("coincidence pattern mismatch: {0}")]
    PatternMismatch(String),

    #[error("schedule infeasible: {0}")]
    InfeasibleSchedule(String),

    #[error("derived partial quotient for `{label}` is below 1")]
    QuotientUnderflow { label: String },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable kind, used in error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ParseSource { .. } => "parse_source",
            Error::InvalidQuotient { .. } => "invalid_quotient",
            Error::SourceExhausted { .. } => "source_exhausted",
            Error::DepthTooSmall(_) => "depth_too_small",
            Error::ComparisonUndecided { .. } => "comparison_undecided",
            Error::NotAJumpPoint { .. } => "not_a_jump_point",
            Error::TimeOutOfRange { .. } => "time_out_of_range",
            Error::CapExceeded { .. } => "cap_exceeded",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::PositionOutOfRange { .. } => "position_out_of_range",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::InvalidK { .. } => "invalid_k",
            Error::UnknownLabel(_) => "unknown_label",
            Error::DuplicateLabel(_) => "duplicate_label",
            Error::EmptyTuple => "empty_tuple",
            Error::EnumerationInferenceFailed(_) => "enumeration_inference_failed",
            Error::HypothesisNotMet(_) => "hypothesis_not_met",
            Error::PatternMismatch(_) => "pattern_mismatch",
            Error::InfeasibleSchedule(_) => "infeasible_schedule",
            Error::QuotientUnderflow { .. } => "quotient_underflow",
            Error::InvalidSchedule(_) => "invalid_schedule",
            Error::Config(_) => "config",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
