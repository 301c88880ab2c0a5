use thiserror::Error;

/// Errors raised by the decision engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FahpError {
    #[error("fuzzy number ({l}, {m}, {u}) violates l <= m <= u")]
    InvalidTfn { l: f64, m: f64, u: f64 },
    #[error("fuzzy number ({l}, {m}, {u}) has a non-positive component")]
    NonPositiveComponent { l: f64, m: f64, u: f64 },
    #[error("root order must be at least 1")]
    InvalidRootOrder,
    #[error("unknown linguistic grade {0:?}")]
    UnknownGrade(String),
    #[error("missing judgment for pair ({row}, {col})")]
    MissingPair { row: String, col: String },
    #[error("pair ({row}, {col}) judged more than once")]
    DuplicatePair { row: String, col: String },
    #[error("element {0:?} compared with itself")]
    DiagonalEntry(String),
    #[error("unknown element {0:?}")]
    UnknownElement(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("element labels differ between inputs")]
    LabelMismatch,
    #[error("comparison matrix is invalid: {0}")]
    InvalidMatrix(String),
    #[error("weights are degenerate (zero or near-zero component)")]
    DegenerateWeights,
    #[error("unsupported matrix dimension {0}")]
    UnsupportedDimension(usize),
    #[error("consistency threshold {0} outside [0, 0.1]")]
    ThresholdOutOfRange(f64),
    #[error("no alternative weights for sub-criterion {0:?}")]
    IncompleteCoverage(String),
    #[error("judgments missing for {}", .0.join(", "))]
    IncompleteJudgments(Vec<String>),
    #[error("invalid hierarchy: {0}")]
    InvalidHierarchy(String),
    #[error("empty input")]
    Empty,
    #[error("invalid currency amount {0:?}")]
    InvalidAmount(String),
    #[error("unknown or screened-out contractor {0:?}")]
    UnknownContractor(String),
    #[error("no bid received from qualified contractor {0:?}")]
    MissingBid(String),
    #[error("contractor {0:?} submitted more than one bid")]
    DuplicateBid(String),
    #[error("bid security document missing for contractor {0:?}")]
    MissingBidSecurity(String),
}

pub type Result<T, E = FahpError> = std::result::Result<T, E>;
