//! Local weights from one fuzzy comparison matrix by the fuzzy geometric
//! mean method: row geometric means, scaling by the reversed reciprocal of
//! their sum, centroid defuzzification, then normalization.

use serde::{Deserialize, Serialize};

use crate::error::{FahpError, Result};
use crate::fuzzy::Tfn;
use crate::matrix::FuzzyComparisonMatrix;

/// Components at or below this are treated as zero.
pub const DEGENERATE_WEIGHT: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyWeightVector {
    pub labels: Vec<String>,
    pub weights: Vec<Tfn>,
}

/// Crisp weights over labelled elements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    pub labels: Vec<String>,
    pub weights: Vec<f64>,
}

impl WeightVector {
    pub fn new(labels: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        if labels.len() != weights.len() {
            return Err(FahpError::DimensionMismatch { expected: labels.len(), found: weights.len() });
        }
        Ok(Self { labels, weights })
    }

    /// Uniform `1/n` weights.
    pub fn uniform(labels: Vec<String>) -> Self {
        let n = labels.len();
        Self { labels, weights: vec![1.0 / n as f64; n] }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.labels.iter().position(|l| l == label).map(|i| self.weights[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.labels.iter().map(String::as_str).zip(self.weights.iter().copied())
    }
}

/// How the normalized weights become local weights.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalWeightRule {
    /// The normalized weights are the local weights.
    #[default]
    Normalized,
    /// Normalized weights further divided by the matrix dimension. Kept for
    /// comparison runs only; the result no longer sums to one.
    DividedByDimension,
}

/// `r_i = (prod_j a_ij)^(1/n)` per row.
pub fn row_geometric_means(mat: &FuzzyComparisonMatrix) -> Result<Vec<Tfn>> {
    let n = u32::try_from(mat.dim()).map_err(|_| FahpError::UnsupportedDimension(mat.dim()))?;
    mat.cells().iter().map(|row| row.iter().copied().product::<Tfn>().root(n)).collect()
}

/// `w_i = r_i * (sum r)^-1`, the inverse sum taken in increasing order.
pub fn fuzzy_weight_vector(labels: Vec<String>, r: &[Tfn]) -> Result<FuzzyWeightVector> {
    if labels.len() != r.len() {
        return Err(FahpError::DimensionMismatch { expected: labels.len(), found: r.len() });
    }
    if r.is_empty() {
        return Err(FahpError::Empty);
    }
    if let Some(bad) = r.iter().find(|t| !t.is_positive()) {
        return Err(FahpError::NonPositiveComponent { l: bad.l(), m: bad.m(), u: bad.u() });
    }
    let inv_sum = r.iter().copied().sum::<Tfn>().reciprocal()?;
    Ok(FuzzyWeightVector { labels, weights: r.iter().map(|&ri| ri * inv_sum).collect() })
}

/// Unnormalized crisp weights: the centroid of each fuzzy weight.
pub fn crisp_weights(fw: &FuzzyWeightVector) -> WeightVector {
    WeightVector { labels: fw.labels.clone(), weights: fw.weights.iter().map(Tfn::centroid).collect() }
}

pub fn normalize(m: &WeightVector) -> Result<WeightVector> {
    let total = m.sum();
    if !(total.is_finite() && total > DEGENERATE_WEIGHT) || m.weights.iter().any(|&w| w < 0.0) {
        return Err(FahpError::DegenerateWeights);
    }
    Ok(WeightVector { labels: m.labels.clone(), weights: m.weights.iter().map(|w| w / total).collect() })
}

pub fn local_weights(mat: &FuzzyComparisonMatrix) -> Result<WeightVector> {
    local_weights_with(mat, LocalWeightRule::Normalized)
}

pub fn local_weights_with(mat: &FuzzyComparisonMatrix, rule: LocalWeightRule) -> Result<WeightVector> {
    mat.ensure_valid()?;
    let r = row_geometric_means(mat)?;
    let fw = fuzzy_weight_vector(mat.labels().to_vec(), &r)?;
    let mut v = normalize(&crisp_weights(&fw))?;
    if v.weights.iter().any(|&w| w <= DEGENERATE_WEIGHT) {
        return Err(FahpError::DegenerateWeights);
    }
    if rule == LocalWeightRule::DividedByDimension {
        let n = v.len() as f64;
        v.weights.iter_mut().for_each(|w| *w /= n);
    }
    Ok(v)
}
