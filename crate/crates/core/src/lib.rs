//! Fuzzy AHP group decision engine for contractor and tender evaluation.
//!
//! Decision makers compare elements pairwise on a nine-grade linguistic
//! scale expressed as triangular fuzzy numbers. Each matrix is checked for
//! consistency before it is accepted; accepted matrices are turned into
//! local weights by the fuzzy geometric mean method, synthesized down a
//! goal / criteria / sub-criteria / alternatives hierarchy, averaged across
//! decision makers, ranked and screened at half the best weight. The
//! screened-in contractors then go to a bid-price stage.

pub mod consistency;
pub mod error;
pub mod financial;
pub mod fuzzy;
pub mod matrix;
pub mod report;
pub mod synthesis;
pub mod weights;

pub use consistency::{
    evaluate_consistency, ConsistencyReport, Direction, Identification, RevisionHint, Threshold,
};
pub use error::{FahpError, Result};
pub use financial::{Bid, BidDifference, FinancialResult, Money, DEFAULT_BID_SECURITY_THRESHOLD};
pub use fuzzy::{GradeChoice, LinguisticGrade, Tfn};
pub use matrix::{CrispMatrix, FuzzyComparisonMatrix, JudgmentEntry, JudgmentSubmission};
pub use synthesis::{
    synthesize, BidderDossier, ComparisonContext, Criterion, DecisionHierarchy, DmJudgments, Element,
    PrescreenOutcome, RankedAlternative, Requirement, Screening, SynthesisResult,
};
pub use weights::{local_weights, FuzzyWeightVector, LocalWeightRule, WeightVector};
