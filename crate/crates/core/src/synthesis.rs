//! Three-level hierarchy (goal, criteria with sub-criteria, alternatives),
//! per decision maker weight synthesis, group averaging, ranking and the
//! half-of-best screening gate.
//!
//! The award path synthesizes each decision maker separately and averages
//! the resulting alternative weights. The aggregate-first path (geometric
//! mean of the experts' matrices, then a single synthesis) is available for
//! reporting only.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FahpError, Result};
use crate::matrix::{aggregate_experts, FuzzyComparisonMatrix};
use crate::weights::{local_weights, WeightVector};

/// Context id of the criteria-versus-goal comparison.
pub const GOAL_CONTEXT: &str = "goal";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Element {
    pub id: String,
    #[serde(default)]
    pub name: String,
}

impl Element {
    pub fn new(id: impl Into<String>, name: impl Into<String>) -> Self {
        Self { id: id.into(), name: name.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Criterion {
    pub id: String,
    #[serde(default)]
    pub name: String,
    pub sub_criteria: Vec<Element>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionHierarchy {
    pub goal: String,
    pub criteria: Vec<Criterion>,
    pub alternatives: Vec<Element>,
    pub decision_makers: Vec<Element>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextLevel {
    Criteria,
    SubCriteria,
    Alternatives,
}

/// One pairwise comparison a decision maker must provide.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonContext {
    pub id: String,
    pub level: ContextLevel,
    pub labels: Vec<String>,
}

fn ids(elements: &[Element]) -> Vec<String> {
    elements.iter().map(|e| e.id.clone()).collect()
}

impl DecisionHierarchy {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(FahpError::InvalidHierarchy(msg));
        if self.criteria.len() < 2 {
            return bad(format!("at least 2 criteria required, found {}", self.criteria.len()));
        }
        if self.alternatives.len() < 2 {
            return bad(format!("at least 2 alternatives required, found {}", self.alternatives.len()));
        }
        if self.decision_makers.is_empty() {
            return bad("at least 1 decision maker required".into());
        }
        // criteria and sub-criteria ids double as context ids, so they share one namespace
        let mut nodes = HashSet::from([GOAL_CONTEXT]);
        for c in &self.criteria {
            if c.sub_criteria.is_empty() {
                return bad(format!("criterion {} has no sub-criteria", c.id));
            }
            for id in std::iter::once(&c.id).chain(c.sub_criteria.iter().map(|s| &s.id)) {
                if id.is_empty() || !nodes.insert(id.as_str()) {
                    return bad(format!("criterion id {id:?} is empty or not unique"));
                }
            }
        }
        for (what, list) in [("alternative", &self.alternatives), ("decision maker", &self.decision_makers)] {
            let mut seen = HashSet::new();
            for e in list {
                if e.id.is_empty() || !seen.insert(e.id.as_str()) {
                    return bad(format!("{what} id {:?} is empty or not unique", e.id));
                }
            }
        }
        Ok(())
    }

    pub fn criterion_ids(&self) -> Vec<String> {
        self.criteria.iter().map(|c| c.id.clone()).collect()
    }

    pub fn alternative_ids(&self) -> Vec<String> {
        ids(&self.alternatives)
    }

    pub fn decision_maker_ids(&self) -> Vec<String> {
        ids(&self.decision_makers)
    }

    /// All sub-criterion ids in hierarchy order.
    pub fn sub_criterion_ids(&self) -> Vec<String> {
        self.criteria.iter().flat_map(|c| c.sub_criteria.iter().map(|s| s.id.clone())).collect()
    }

    /// Every comparison each decision maker must supply. A criterion with a
    /// single sub-criterion needs no comparison.
    pub fn contexts(&self) -> Vec<ComparisonContext> {
        let mut out = vec![ComparisonContext {
            id: GOAL_CONTEXT.into(),
            level: ContextLevel::Criteria,
            labels: self.criterion_ids(),
        }];
        for c in &self.criteria {
            if c.sub_criteria.len() >= 2 {
                out.push(ComparisonContext {
                    id: c.id.clone(),
                    level: ContextLevel::SubCriteria,
                    labels: ids(&c.sub_criteria),
                });
            }
        }
        let alternatives = self.alternative_ids();
        for s in self.sub_criterion_ids() {
            out.push(ComparisonContext { id: s, level: ContextLevel::Alternatives, labels: alternatives.clone() });
        }
        out
    }

    pub fn context(&self, id: &str) -> Option<ComparisonContext> {
        self.contexts().into_iter().find(|c| c.id == id)
    }

    /// The same hierarchy over a subset of the alternatives, order kept.
    pub fn restrict_alternatives(&self, keep: &[String]) -> DecisionHierarchy {
        let keep: HashSet<&str> = keep.iter().map(String::as_str).collect();
        DecisionHierarchy {
            alternatives: self.alternatives.iter().filter(|a| keep.contains(a.id.as_str())).cloned().collect(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Requirement {
    pub id: String,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub mandatory: bool,
}

/// Fifteen requirement slots `R01`..`R15`, the first ten mandatory.
pub fn default_requirements() -> Vec<Requirement> {
    (1..=15)
        .map(|i| Requirement { id: format!("R{i:02}"), name: String::new(), mandatory: i <= 10 })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BidderDossier {
    pub contractor_id: String,
    pub submitted: BTreeSet<String>,
}

impl BidderDossier {
    /// Every submitted id must be one of the configured requirements.
    pub fn check_against(&self, requirements: &[Requirement]) -> Result<()> {
        let known: HashSet<&str> = requirements.iter().map(|r| r.id.as_str()).collect();
        match self.submitted.iter().find(|s| !known.contains(s.as_str())) {
            Some(s) => Err(FahpError::UnknownElement(s.clone())),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Disqualification {
    pub contractor_id: String,
    pub missing: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrescreenOutcome {
    pub qualified: Vec<String>,
    pub disqualified: Vec<Disqualification>,
}

/// A bidder qualifies iff every mandatory requirement was submitted.
pub fn prescreen_mandatory(requirements: &[Requirement], dossiers: &[BidderDossier]) -> PrescreenOutcome {
    let mut out = PrescreenOutcome::default();
    for d in dossiers {
        let missing: Vec<String> = requirements
            .iter()
            .filter(|r| r.mandatory && !d.submitted.contains(&r.id))
            .map(|r| r.id.clone())
            .collect();
        if missing.is_empty() {
            out.qualified.push(d.contractor_id.clone());
        } else {
            out.disqualified.push(Disqualification { contractor_id: d.contractor_id.clone(), missing });
        }
    }
    out
}

/// `W_s = w_criterion * w_s` for every sub-criterion of one criterion.
pub fn global_subcriterion_weights(criterion_weight: f64, sub: &WeightVector) -> WeightVector {
    WeightVector { labels: sub.labels.clone(), weights: sub.weights.iter().map(|w| criterion_weight * w).collect() }
}

/// `WB_v = (sum_s W_s * w_s(v)) / n_sub` over all sub-criteria `s`.
pub fn alternative_global_weight(
    sub_global: &WeightVector,
    alt_locals: &BTreeMap<String, WeightVector>,
    n_sub: usize,
) -> Result<WeightVector> {
    if n_sub == 0 {
        return Err(FahpError::Empty);
    }
    let mut acc: Option<WeightVector> = None;
    for (s, ws) in sub_global.iter() {
        let local = alt_locals.get(s).ok_or_else(|| FahpError::IncompleteCoverage(s.to_owned()))?;
        let acc = acc.get_or_insert_with(|| WeightVector { labels: local.labels.clone(), weights: vec![0.0; local.len()] });
        if local.labels != acc.labels {
            return Err(FahpError::LabelMismatch);
        }
        for (a, l) in acc.weights.iter_mut().zip(&local.weights) {
            *a += ws * l;
        }
    }
    let mut wb = acc.ok_or(FahpError::Empty)?;
    wb.weights.iter_mut().for_each(|w| *w /= n_sub as f64);
    Ok(wb)
}

/// Arithmetic mean of the decision makers' alternative weights.
pub fn final_weights(per_dm: &[WeightVector]) -> Result<WeightVector> {
    let first = per_dm.first().ok_or(FahpError::Empty)?;
    let mut sum = vec![0.0; first.len()];
    for v in per_dm {
        if v.labels != first.labels {
            return Err(FahpError::LabelMismatch);
        }
        for (s, w) in sum.iter_mut().zip(&v.weights) {
            *s += w;
        }
    }
    let z = per_dm.len() as f64;
    Ok(WeightVector { labels: first.labels.clone(), weights: sum.into_iter().map(|s| s / z).collect() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedAlternative {
    pub id: String,
    pub weight: f64,
    pub rank: usize,
}

/// Descending by weight. Equal weights share a rank (competition ranking)
/// and are listed by id.
pub fn rank(fw: &WeightVector) -> Vec<RankedAlternative> {
    let mut order: Vec<(&str, f64)> = fw.iter().collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let mut out: Vec<RankedAlternative> = Vec::with_capacity(order.len());
    for (pos, (id, weight)) in order.into_iter().enumerate() {
        let rank = match out.last() {
            Some(prev) if prev.weight == weight => prev.rank,
            _ => pos + 1,
        };
        out.push(RankedAlternative { id: id.to_owned(), weight, rank });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Screening {
    pub sigma: f64,
    /// In ranking order.
    pub qualified: Vec<String>,
    pub screened_out: Vec<String>,
}

impl Screening {
    pub fn is_qualified(&self, id: &str) -> bool {
        self.qualified.iter().any(|q| q == id)
    }
}

/// `sigma = max / 2`; weights at or above sigma qualify.
pub fn screen(fw: &WeightVector) -> Result<Screening> {
    if fw.is_empty() {
        return Err(FahpError::Empty);
    }
    let sigma = 0.5 * fw.weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (qualified, screened_out) = rank(fw).into_iter().partition::<Vec<_>, _>(|r| r.weight >= sigma);
    Ok(Screening {
        sigma,
        qualified: qualified.into_iter().map(|r| r.id).collect(),
        screened_out: screened_out.into_iter().map(|r| r.id).collect(),
    })
}

/// One decision maker's matrices keyed by context id.
pub type DmJudgments = BTreeMap<String, FuzzyComparisonMatrix>;

/// All weights derived from one decision maker's judgments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmSynthesis {
    pub decision_maker_id: String,
    pub criteria: WeightVector,
    /// Local weights of the sub-criteria under each criterion.
    pub sub_criteria_local: BTreeMap<String, WeightVector>,
    /// Global weights of all sub-criteria, in hierarchy order.
    pub sub_criteria_global: WeightVector,
    /// Local weights of the alternatives under each sub-criterion.
    pub alternatives_local: BTreeMap<String, WeightVector>,
    pub alternatives_global: WeightVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisResult {
    pub decision_makers: Vec<DmSynthesis>,
    pub final_weights: WeightVector,
    pub ranking: Vec<RankedAlternative>,
    pub screening: Screening,
}

impl SynthesisResult {
    pub fn sigma(&self) -> f64 {
        self.screening.sigma
    }

    pub fn qualified(&self) -> &[String] {
        &self.screening.qualified
    }
}

/// `dm/context` pairs with no matrix, in hierarchy order.
pub fn missing_judgments(hierarchy: &DecisionHierarchy, judgments: &BTreeMap<String, DmJudgments>) -> Vec<String> {
    let contexts = hierarchy.contexts();
    let mut missing = Vec::new();
    for dm in hierarchy.decision_maker_ids() {
        let have = judgments.get(&dm);
        for c in &contexts {
            if !have.is_some_and(|j| j.contains_key(&c.id)) {
                missing.push(format!("{dm}/{}", c.id));
            }
        }
    }
    missing
}

fn context_weights(ctx: &ComparisonContext, judgments: &DmJudgments) -> Result<WeightVector> {
    let m = judgments.get(&ctx.id).ok_or_else(|| FahpError::IncompleteCoverage(ctx.id.clone()))?;
    if m.labels() != ctx.labels.as_slice() {
        return Err(FahpError::LabelMismatch);
    }
    local_weights(m)
}

/// Synthesizes one decision maker's matrices down to alternative weights.
pub fn synthesize_decision_maker(
    hierarchy: &DecisionHierarchy,
    decision_maker_id: &str,
    judgments: &DmJudgments,
) -> Result<DmSynthesis> {
    let mut criteria = None;
    let mut sub_criteria_local = BTreeMap::new();
    let mut alternatives_local = BTreeMap::new();
    for ctx in hierarchy.contexts() {
        let w = context_weights(&ctx, judgments)?;
        match ctx.level {
            ContextLevel::Criteria => criteria = Some(w),
            ContextLevel::SubCriteria => {
                sub_criteria_local.insert(ctx.id, w);
            }
            ContextLevel::Alternatives => {
                alternatives_local.insert(ctx.id, w);
            }
        }
    }
    let criteria = criteria.ok_or_else(|| FahpError::IncompleteCoverage(GOAL_CONTEXT.into()))?;
    for c in &hierarchy.criteria {
        if c.sub_criteria.len() == 1 {
            sub_criteria_local.insert(c.id.clone(), WeightVector::uniform(ids(&c.sub_criteria)));
        }
    }
    let mut global = WeightVector { labels: Vec::new(), weights: Vec::new() };
    for (c, wc) in hierarchy.criteria.iter().zip(&criteria.weights) {
        let g = global_subcriterion_weights(*wc, &sub_criteria_local[&c.id]);
        global.labels.extend(g.labels);
        global.weights.extend(g.weights);
    }
    let alternatives_global = alternative_global_weight(&global, &alternatives_local, global.len())?;
    Ok(DmSynthesis {
        decision_maker_id: decision_maker_id.to_owned(),
        criteria,
        sub_criteria_local,
        sub_criteria_global: global,
        alternatives_local,
        alternatives_global,
    })
}

/// Per decision maker synthesis, group averaging, ranking and screening.
pub fn synthesize(hierarchy: &DecisionHierarchy, judgments: &BTreeMap<String, DmJudgments>) -> Result<SynthesisResult> {
    hierarchy.validate()?;
    let missing = missing_judgments(hierarchy, judgments);
    if !missing.is_empty() {
        return Err(FahpError::IncompleteJudgments(missing));
    }
    let decision_makers = hierarchy
        .decision_makers
        .par_iter()
        .map(|dm| synthesize_decision_maker(hierarchy, &dm.id, &judgments[&dm.id]))
        .collect::<Result<Vec<_>>>()?;
    let per_dm: Vec<WeightVector> = decision_makers.iter().map(|d| d.alternatives_global.clone()).collect();
    let final_weights = final_weights(&per_dm)?;
    let ranking = rank(&final_weights);
    let screening = screen(&final_weights)?;
    Ok(SynthesisResult { decision_makers, final_weights, ranking, screening })
}

/// Geometric-mean aggregation of every context across decision makers,
/// followed by a single synthesis. Reporting only.
pub fn synthesize_aggregated(
    hierarchy: &DecisionHierarchy,
    judgments: &BTreeMap<String, DmJudgments>,
) -> Result<DmSynthesis> {
    hierarchy.validate()?;
    let missing = missing_judgments(hierarchy, judgments);
    if !missing.is_empty() {
        return Err(FahpError::IncompleteJudgments(missing));
    }
    let mut aggregated = DmJudgments::new();
    for ctx in hierarchy.contexts() {
        let mats: Vec<FuzzyComparisonMatrix> =
            hierarchy.decision_makers.iter().map(|dm| judgments[&dm.id][&ctx.id].clone()).collect();
        aggregated.insert(ctx.id.clone(), aggregate_experts(&mats)?);
    }
    synthesize_decision_maker(hierarchy, "aggregate", &aggregated)
}
