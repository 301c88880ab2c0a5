//! Consistency ratio of a judgment matrix and the accept / revise feedback
//! derived from it.
//!
//! The matrix is defuzzified (upper centroids, exact reciprocal lower
//! triangle), local weights come from the fuzzy geometric mean method, and
//! `lambda_max` is the mean of `(A w)_i / w_i`. A report whose ratio exceeds
//! the threshold is sent back with revision hints: the upper cells whose
//! entered value deviates most from the ratio implied by the weights.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{FahpError, Result};
use crate::fuzzy::GradeChoice;
use crate::matrix::{CrispMatrix, FuzzyComparisonMatrix};
use crate::weights::{local_weights, WeightVector};

/// Random consistency index for dimensions 1 through 10.
pub const RANDOM_INDEX: [f64; 10] = [0.0, 0.0, 0.58, 0.9, 1.12, 1.24, 1.32, 1.41, 1.45, 1.49];

/// Hints returned with a reject-and-modify report.
pub const DEFAULT_HINT_LIMIT: usize = 5;

/// Consistency threshold, restricted to `[0, 0.1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Threshold(f64);

impl Threshold {
    pub const MAX: f64 = 0.1;

    pub fn new(gamma: f64) -> Result<Self> {
        if (0.0..=Self::MAX).contains(&gamma) {
            Ok(Self(gamma))
        } else {
            Err(FahpError::ThresholdOutOfRange(gamma))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for Threshold {
    fn default() -> Self {
        Self(Self::MAX)
    }
}

impl TryFrom<f64> for Threshold {
    type Error = FahpError;

    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Threshold> for f64 {
    fn from(t: Threshold) -> f64 {
        t.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Identification {
    /// Ratio above the threshold.
    #[serde(rename = "IR.1")]
    AboveThreshold,
    /// Ratio within the threshold.
    #[serde(rename = "IR.2")]
    WithinThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "DR.1-RejectAndModify")]
    RejectAndModify,
    #[serde(rename = "DR.2-Accept")]
    Accept,
}

impl Direction {
    pub fn is_accept(self) -> bool {
        self == Direction::Accept
    }

    /// The serialized tag, e.g. `DR.2-Accept`.
    pub fn code(self) -> &'static str {
        match self {
            Direction::RejectAndModify => "DR.1-RejectAndModify",
            Direction::Accept => "DR.2-Accept",
        }
    }
}

/// One suggested revision of an upper-triangle judgment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RevisionHint {
    pub row: String,
    pub col: String,
    pub current: GradeChoice,
    pub current_value: f64,
    /// `|ln(a_ij * w_j / w_i)|`
    pub deviation: f64,
    pub implied_ratio: f64,
    pub suggested: GradeChoice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub context_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decision_maker_id: Option<String>,
    pub dimension: usize,
    pub lambda_max: f64,
    pub ci: f64,
    pub ri: f64,
    pub cr: f64,
    pub gamma: f64,
    pub identification: Identification,
    pub direction: Direction,
    /// Heuristic revision hints; present only for reject-and-modify.
    pub advice: Vec<RevisionHint>,
    pub status: String,
}

impl ConsistencyReport {
    pub fn is_accepted(&self) -> bool {
        self.direction.is_accept()
    }

    pub fn with_decision_maker(mut self, dm: impl Into<String>) -> Self {
        self.decision_maker_id = Some(dm.into());
        self
    }
}

impl fmt::Display for ConsistencyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Lambda Max\t{}", self.lambda_max)?;
        writeln!(f, "Random Index\t{}", self.ri)?;
        writeln!(f, "Consistency Index\t{}", self.ci)?;
        writeln!(f, "Consistency Ratio\t{}", self.cr)?;
        writeln!(f, "{}", self.status)?;
        if !self.advice.is_empty() {
            writeln!(f, "Suggested revisions (heuristic, largest deviation first):")?;
            for h in &self.advice {
                writeln!(
                    f,
                    "  {} vs {}: entered {} -> consider {} (deviation {:.4})",
                    h.row, h.col, h.current, h.suggested, h.deviation
                )?;
            }
        }
        Ok(())
    }
}

pub fn status_line(gamma: f64, direction: Direction) -> String {
    match direction {
        Direction::Accept => format!("Since Consistency Ratio is <= {gamma}, Status: Acceptable"),
        Direction::RejectAndModify => format!("Since Consistency Ratio is > {gamma}, Status: Reject and modify"),
    }
}

pub fn random_index(n: usize) -> Result<f64> {
    n.checked_sub(1)
        .and_then(|i| RANDOM_INDEX.get(i))
        .copied()
        .ok_or(FahpError::UnsupportedDimension(n))
}

/// `(1/n) * sum_i (A w)_i / w_i`.
pub fn lambda_max(a: &CrispMatrix, w: &WeightVector) -> Result<f64> {
    let n = a.dim();
    if w.len() != n {
        return Err(FahpError::DimensionMismatch { expected: n, found: w.len() });
    }
    if w.weights.iter().any(|&x| !(x > 0.0)) {
        return Err(FahpError::DegenerateWeights);
    }
    let aw = a.mul_vec(&w.weights);
    Ok(aw.iter().zip(&w.weights).map(|(x, wi)| x / wi).sum::<f64>() / n as f64)
}

pub fn consistency_index(lambda_max: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(FahpError::UnsupportedDimension(n));
    }
    Ok((lambda_max - n as f64) / (n as f64 - 1.0))
}

/// `ci / ri`, or zero when `ri` is zero (dimensions one and two).
pub fn consistency_ratio(ci: f64, ri: f64) -> f64 {
    if ri > 0.0 {
        ci / ri
    } else {
        0.0
    }
}

pub fn identify(cr: f64, gamma: Threshold) -> (Identification, Direction) {
    if cr > gamma.value() {
        (Identification::AboveThreshold, Direction::RejectAndModify)
    } else {
        (Identification::WithinThreshold, Direction::Accept)
    }
}

pub fn evaluate_consistency(mat: &FuzzyComparisonMatrix, gamma: Threshold) -> Result<ConsistencyReport> {
    let crisp = mat.defuzzify();
    let w = local_weights(mat)?;
    let n = mat.dim();
    let lambda = lambda_max(&crisp, &w)?;
    let ci = consistency_index(lambda, n)?;
    let ri = random_index(n)?;
    let cr = consistency_ratio(ci, ri);
    let (identification, direction) = identify(cr, gamma);
    let advice = match direction {
        Direction::RejectAndModify => revision_hints(&crisp, &w, DEFAULT_HINT_LIMIT),
        Direction::Accept => Vec::new(),
    };
    Ok(ConsistencyReport {
        context_id: mat.context_id().to_owned(),
        decision_maker_id: None,
        dimension: n,
        lambda_max: lambda,
        ci,
        ri,
        cr,
        gamma: gamma.value(),
        identification,
        direction,
        advice,
        status: status_line(gamma.value(), direction),
    })
}

/// Up to `k` upper cells ranked by how far the entered value is from the
/// ratio implied by `w`. Ties keep row-major order.
pub fn revision_hints(a: &CrispMatrix, w: &WeightVector, k: usize) -> Vec<RevisionHint> {
    let n = a.dim();
    let mut hints = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let value = a.get(i, j);
            let implied = w.weights[i] / w.weights[j];
            hints.push(RevisionHint {
                row: a.labels()[i].clone(),
                col: a.labels()[j].clone(),
                current: GradeChoice::nearest(value),
                current_value: value,
                deviation: (value / implied).ln().abs(),
                implied_ratio: implied,
                suggested: GradeChoice::nearest(implied),
            });
        }
    }
    hints.sort_by(|x, y| y.deviation.total_cmp(&x.deviation));
    hints.truncate(k);
    hints
}
