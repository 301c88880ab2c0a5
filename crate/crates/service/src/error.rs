use fahp_core::FahpError;
use thiserror::Error;

use crate::workflow::WorkflowState;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid project id {0:?}")]
    InvalidId(String),
}

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("project {0} not found")]
    ProjectNotFound(String),
    #[error("project {0} already exists")]
    ProjectExists(String),
    #[error("{operation} is not allowed while the project is in {state}")]
    WrongState { operation: &'static str, state: WorkflowState },
    #[error("unknown decision maker {0}")]
    UnknownDecisionMaker(String),
    #[error("unknown comparison context {0}")]
    UnknownContext(String),
    #[error("unknown contractor {0}")]
    UnknownContractor(String),
    #[error("no dossier received from {0}")]
    MissingDossier(String),
    #[error("no bidder passed prescreening")]
    NoQualifiedBidders,
    #[error("{0} was screened out and may not bid")]
    BidFromScreenedOut(String),
    #[error("invalid requirement list: {0}")]
    InvalidRequirements(String),
    #[error("{0} is not available yet")]
    NotAvailable(&'static str),
    #[error("audit log of project {project} is inconsistent at record {sequence}: {reason}")]
    AuditMismatch { project: String, sequence: u64, reason: String },
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Core(#[from] FahpError),
}

impl ServiceError {
    /// Stable machine-readable code used in API error documents.
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::ProjectNotFound(_) => "project_not_found",
            ServiceError::ProjectExists(_) => "project_exists",
            ServiceError::WrongState { .. } => "wrong_state",
            ServiceError::UnknownDecisionMaker(_) => "unknown_decision_maker",
            ServiceError::UnknownContext(_) => "unknown_context",
            ServiceError::UnknownContractor(_) => "unknown_contractor",
            ServiceError::MissingDossier(_) => "missing_dossier",
            ServiceError::NoQualifiedBidders => "no_qualified_bidders",
            ServiceError::BidFromScreenedOut(_) => "bid_from_screened_out",
            ServiceError::InvalidRequirements(_) => "invalid_requirements",
            ServiceError::NotAvailable(_) => "not_available",
            ServiceError::AuditMismatch { .. } => "audit_mismatch",
            ServiceError::Store(_) => "store_error",
            ServiceError::Core(e) => core_code(e),
        }
    }
}

fn core_code(e: &FahpError) -> &'static str {
    match e {
        FahpError::InvalidTfn { .. } | FahpError::NonPositiveComponent { .. } => "invalid_tfn",
        FahpError::UnknownGrade(_) => "unknown_grade",
        FahpError::MissingPair { .. } => "missing_pair",
        FahpError::DuplicatePair { .. } => "duplicate_pair",
        FahpError::DiagonalEntry(_) => "diagonal_entry",
        FahpError::UnknownElement(_) => "unknown_element",
        FahpError::LabelMismatch | FahpError::DimensionMismatch { .. } => "label_mismatch",
        FahpError::UnsupportedDimension(_) => "unsupported_dimension",
        FahpError::ThresholdOutOfRange(_) => "threshold_out_of_range",
        FahpError::IncompleteJudgments(_) => "incomplete_judgments",
        FahpError::InvalidHierarchy(_) => "invalid_hierarchy",
        FahpError::InvalidAmount(_) => "invalid_amount",
        FahpError::UnknownContractor(_) => "unknown_contractor",
        FahpError::MissingBid(_) => "missing_bid",
        FahpError::DuplicateBid(_) => "duplicate_bid",
        FahpError::MissingBidSecurity(_) => "missing_bid_security",
        _ => "invalid_input",
    }
}

pub type Result<T, E = ServiceError> = std::result::Result<T, E>;
