//! Fuzzy pairwise comparison matrices.
//!
//! Decision makers judge only the strict upper triangle; the diagonal and the
//! reciprocal lower triangle are generated. A crisp view of a fuzzy matrix is
//! obtained by centre-of-area defuzzification of the upper triangle with the
//! lower triangle rebuilt as exact reciprocals, because the centroid of a
//! reciprocal triangle is not the reciprocal of the centroid.

use std::collections::{HashMap, HashSet};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{FahpError, Result};
use crate::fuzzy::{GradeChoice, LinguisticGrade, Tfn};

const RECIPROCITY_TOL: f64 = 1e-12;
const CRISP_RECIPROCITY_TOL: f64 = 1e-9;

/// One judged pair in a submission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgmentEntry {
    pub row: String,
    pub col: String,
    pub grade: LinguisticGrade,
    #[serde(default)]
    pub inverted: bool,
}

impl JudgmentEntry {
    pub fn new(row: impl Into<String>, col: impl Into<String>, grade: LinguisticGrade, inverted: bool) -> Self {
        Self { row: row.into(), col: col.into(), grade, inverted }
    }

    pub fn choice(&self) -> GradeChoice {
        GradeChoice { grade: self.grade, inverted: self.inverted }
    }
}

/// A decision maker's upper-triangle judgments for one comparison context.
///
/// This is also the matrix exchange document: one per context per decision
/// maker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgmentSubmission {
    #[serde(default)]
    pub decision_maker_id: String,
    #[serde(default)]
    pub context_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub entries: Vec<JudgmentEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub submitted_at: Option<DateTime<Utc>>,
}

/// A square reciprocal matrix of triangular fuzzy judgments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyComparisonMatrix {
    context_id: String,
    labels: Vec<String>,
    cells: Vec<Vec<Tfn>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Shape,
    Diagonal,
    Reciprocity,
    Ordering,
    NonPositive,
    DuplicateLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub row: usize,
    pub col: usize,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} at ({}, {})", self.kind, self.row, self.col)
    }
}

/// Outcome of [`validate_matrix`]; an empty violation list means valid.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Validation {
    pub violations: Vec<Violation>,
}

impl Validation {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn label_index(labels: &[String]) -> HashMap<&str, usize> {
    labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect()
}

impl FuzzyComparisonMatrix {
    /// Builds a matrix from its strict upper triangle.
    pub fn from_upper(
        context_id: impl Into<String>,
        labels: Vec<String>,
        mut upper: impl FnMut(usize, usize) -> Tfn,
    ) -> Result<Self> {
        let n = labels.len();
        if n < 2 {
            return Err(FahpError::UnsupportedDimension(n));
        }
        let mut cells = vec![vec![Tfn::ONE; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let t = upper(i, j);
                cells[j][i] = t.reciprocal()?;
                cells[i][j] = t;
            }
        }
        let m = Self { context_id: context_id.into(), labels, cells };
        m.ensure_valid()?;
        Ok(m)
    }

    /// Builds a matrix from a full grid, rejecting it if any invariant fails.
    pub fn from_cells(context_id: impl Into<String>, labels: Vec<String>, cells: Vec<Vec<Tfn>>) -> Result<Self> {
        let m = Self::new_unchecked(context_id, labels, cells);
        m.ensure_valid()?;
        Ok(m)
    }

    /// Builds without any checks; use [`validate_matrix`] on the result.
    pub fn new_unchecked(context_id: impl Into<String>, labels: Vec<String>, cells: Vec<Vec<Tfn>>) -> Self {
        Self { context_id: context_id.into(), labels, cells }
    }

    /// All-indifferent matrix.
    pub fn identity(context_id: impl Into<String>, labels: Vec<String>) -> Result<Self> {
        Self::from_upper(context_id, labels, |_, _| Tfn::ONE)
    }

    pub fn context_id(&self) -> &str {
        &self.context_id
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn cells(&self) -> &[Vec<Tfn>] {
        &self.cells
    }

    pub fn cell(&self, i: usize, j: usize) -> Tfn {
        self.cells[i][j]
    }

    pub fn validate(&self) -> Validation {
        validate_matrix(self)
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        match v.violations.first() {
            None => Ok(()),
            Some(first) => Err(FahpError::InvalidMatrix(format!(
                "{} violation(s), first: {first}",
                v.violations.len()
            ))),
        }
    }

    /// The judged upper triangle, in row-major order.
    pub fn upper_triangle(&self) -> impl Iterator<Item = (usize, usize, Tfn)> + '_ {
        let n = self.dim();
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j, self.cells[i][j])))
    }

    /// Reads the upper triangle back as linguistic entries. `None` if some
    /// cell is not on the grade scale (e.g. after aggregation).
    pub fn to_entries(&self) -> Option<Vec<JudgmentEntry>> {
        self.upper_triangle()
            .map(|(i, j, t)| {
                GradeChoice::from_tfn(&t).map(|c| {
                    JudgmentEntry::new(self.labels[i].clone(), self.labels[j].clone(), c.grade, c.inverted)
                })
            })
            .collect()
    }

    pub fn with_context(mut self, context_id: impl Into<String>) -> Self {
        self.context_id = context_id.into();
        self
    }

    pub fn defuzzify(&self) -> CrispMatrix {
        defuzzify_matrix(self)
    }
}

/// Builds a comparison matrix from linguistic upper-triangle entries over
/// `labels`. An entry given as `(col, row)` is accepted and stored as the
/// opposite judgment on `(row, col)`.
pub fn matrix_from_submission(s: &JudgmentSubmission, labels: &[String]) -> Result<FuzzyComparisonMatrix> {
    let n = labels.len();
    if n < 2 {
        return Err(FahpError::UnsupportedDimension(n));
    }
    if let Some(doc_labels) = &s.labels {
        if doc_labels.as_slice() != labels {
            return Err(FahpError::LabelMismatch);
        }
    }
    let index = label_index(labels);
    if index.len() != n {
        return Err(FahpError::InvalidMatrix("duplicate element label".into()));
    }
    let mut upper: Vec<Vec<Option<Tfn>>> = vec![vec![None; n]; n];
    for e in &s.entries {
        let r = *index.get(e.row.as_str()).ok_or_else(|| FahpError::UnknownElement(e.row.clone()))?;
        let c = *index.get(e.col.as_str()).ok_or_else(|| FahpError::UnknownElement(e.col.clone()))?;
        if r == c {
            return Err(FahpError::DiagonalEntry(e.row.clone()));
        }
        let (i, j, inverted) = if r < c { (r, c, e.inverted) } else { (c, r, !e.inverted) };
        if upper[i][j].is_some() {
            return Err(FahpError::DuplicatePair { row: labels[i].clone(), col: labels[j].clone() });
        }
        upper[i][j] = Some(GradeChoice { grade: e.grade, inverted }.tfn());
    }
    for i in 0..n {
        for j in i + 1..n {
            if upper[i][j].is_none() {
                return Err(FahpError::MissingPair { row: labels[i].clone(), col: labels[j].clone() });
            }
        }
    }
    FuzzyComparisonMatrix::from_upper(s.context_id.clone(), labels.to_vec(), |i, j| upper[i][j].unwrap())
}

/// Lists every shape, diagonal, reciprocity, ordering and positivity violation.
pub fn validate_matrix(mat: &FuzzyComparisonMatrix) -> Validation {
    let mut violations = Vec::new();
    let n = mat.labels.len();
    let mut seen = HashSet::new();
    for (i, l) in mat.labels.iter().enumerate() {
        if !seen.insert(l) {
            violations.push(Violation { kind: ViolationKind::DuplicateLabel, row: i, col: i });
        }
    }
    if n < 2 || mat.cells.len() != n || mat.cells.iter().any(|r| r.len() != n) {
        violations.push(Violation { kind: ViolationKind::Shape, row: mat.cells.len(), col: n });
        return Validation { violations };
    }
    for i in 0..n {
        for j in 0..n {
            let c = mat.cells[i][j];
            if !c.is_ordered() {
                violations.push(Violation { kind: ViolationKind::Ordering, row: i, col: j });
            }
            if !c.is_positive() {
                violations.push(Violation { kind: ViolationKind::NonPositive, row: i, col: j });
            }
            if i == j {
                if c != Tfn::ONE {
                    violations.push(Violation { kind: ViolationKind::Diagonal, row: i, col: j });
                }
            } else if i > j {
                // the lower cell is checked against its upper partner
                let up = mat.cells[j][i];
                let ok = up.is_positive()
                    && rel_close(c.l(), 1.0 / up.u(), RECIPROCITY_TOL)
                    && rel_close(c.m(), 1.0 / up.m(), RECIPROCITY_TOL)
                    && rel_close(c.u(), 1.0 / up.l(), RECIPROCITY_TOL);
                if !ok {
                    violations.push(Violation { kind: ViolationKind::Reciprocity, row: i, col: j });
                }
            }
        }
    }
    Validation { violations }
}

/// Componentwise geometric mean of several experts' matrices over the same
/// context.
pub fn aggregate_experts(mats: &[FuzzyComparisonMatrix]) -> Result<FuzzyComparisonMatrix> {
    let first = mats.first().ok_or(FahpError::Empty)?;
    let n = first.dim();
    for m in mats {
        m.ensure_valid()?;
        if m.dim() != n {
            return Err(FahpError::DimensionMismatch { expected: n, found: m.dim() });
        }
        if m.labels != first.labels {
            return Err(FahpError::LabelMismatch);
        }
    }
    let k = u32::try_from(mats.len()).map_err(|_| FahpError::DimensionMismatch { expected: n, found: mats.len() })?;
    let mut cells = vec![vec![Tfn::ONE; n]; n];
    for (i, row) in cells.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            if i != j {
                *cell = mats.iter().map(|m| m.cells[i][j]).product::<Tfn>().root(k)?;
            }
        }
    }
    FuzzyComparisonMatrix::from_cells(first.context_id.clone(), first.labels.clone(), cells)
}

/// A crisp positive reciprocal matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrispMatrix {
    labels: Vec<String>,
    cells: Vec<Vec<f64>>,
}

impl CrispMatrix {
    pub fn new(labels: Vec<String>, cells: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if n == 0 || cells.len() != n || cells.iter().any(|r| r.len() != n) {
            return Err(FahpError::InvalidMatrix("crisp matrix is not square over its labels".into()));
        }
        for i in 0..n {
            if cells[i][i] != 1.0 {
                return Err(FahpError::InvalidMatrix(format!("diagonal at ({i}, {i}) is not 1")));
            }
            for j in i + 1..n {
                let (a, b) = (cells[i][j], cells[j][i]);
                if !(a > 0.0 && a.is_finite() && b > 0.0 && rel_close(b, 1.0 / a, CRISP_RECIPROCITY_TOL)) {
                    return Err(FahpError::InvalidMatrix(format!("cells ({i}, {j}) and ({j}, {i}) are not reciprocal")));
                }
            }
        }
        Ok(Self { labels, cells })
    }

    /// The perfectly consistent matrix `a_ij = p_i / p_j`.
    pub fn from_ratios(labels: Vec<String>, p: &[f64]) -> Result<Self> {
        if p.len() != labels.len() {
            return Err(FahpError::DimensionMismatch { expected: labels.len(), found: p.len() });
        }
        if p.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(FahpError::DegenerateWeights);
        }
        let n = p.len();
        let mut cells = vec![vec![1.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                cells[i][j] = p[i] / p[j];
                cells[j][i] = 1.0 / cells[i][j];
            }
        }
        Self::new(labels, cells)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn cells(&self) -> &[Vec<f64>] {
        &self.cells
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.cells[i][j]
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.cells.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }
}

/// Centroid of every upper cell; lower cells are the exact reciprocals.
pub fn defuzzify_matrix(mat: &FuzzyComparisonMatrix) -> CrispMatrix {
    let n = mat.dim();
    let mut cells = vec![vec![1.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let c = mat.cells[i][j].centroid();
            cells[i][j] = c;
            cells[j][i] = 1.0 / c;
        }
    }
    CrispMatrix { labels: mat.labels.clone(), cells }
}
