//! Project documents and the workflow state machine.
//!
//! Every mutation is a [`Command`]. [`apply`] is a pure function of the
//! prior project, the command and its timestamp, which is what makes the
//! audit log replayable.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use chrono::{DateTime, Utc};
use fahp_core::consistency::{evaluate_consistency, random_index};
use fahp_core::financial::evaluate_financial;
use fahp_core::matrix::matrix_from_submission;
use fahp_core::synthesis::{missing_judgments, prescreen_mandatory, synthesize, DmJudgments};
use fahp_core::{
    Bid, BidderDossier, ConsistencyReport, DecisionHierarchy, Element, FahpError, FinancialResult,
    JudgmentSubmission, Money, PrescreenOutcome, Requirement, SynthesisResult, Threshold,
};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ServiceError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WorkflowState {
    Setup,
    Prescreening,
    JudgmentCollection,
    ConsistencyReview,
    TechnicalRanking,
    Screening,
    FinancialEvaluation,
    Awarded,
    Cancelled,
}

impl WorkflowState {
    pub fn is_terminal(self) -> bool {
        matches!(self, WorkflowState::Awarded | WorkflowState::Cancelled)
    }

    /// Whether `self -> next` is an edge of the workflow graph. Staying put
    /// is always allowed for non-terminal states.
    pub fn can_transition_to(self, next: WorkflowState) -> bool {
        use WorkflowState::*;
        if self.is_terminal() {
            return false;
        }
        if self == next || next == Cancelled {
            return true;
        }
        matches!(
            (self, next),
            (Setup, Prescreening)
                | (Prescreening, JudgmentCollection)
                | (JudgmentCollection, ConsistencyReview)
                | (ConsistencyReview, JudgmentCollection)
                | (JudgmentCollection, TechnicalRanking)
                | (ConsistencyReview, TechnicalRanking)
                | (TechnicalRanking, Screening)
                | (Screening, FinancialEvaluation)
                | (FinancialEvaluation, Awarded)
        )
    }

    /// Judgments of other decision makers are hidden before this point.
    pub fn judgments_disclosed(self) -> bool {
        use WorkflowState::*;
        matches!(self, TechnicalRanking | Screening | FinancialEvaluation | Awarded)
    }
}

impl fmt::Display for WorkflowState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// The latest submission for one decision maker and context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgmentRecord {
    pub submission: JudgmentSubmission,
    pub report: ConsistencyReport,
}

impl JudgmentRecord {
    pub fn is_accepted(&self) -> bool {
        self.report.is_accepted()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotStatus {
    Missing,
    Draft,
    Accepted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Project {
    pub id: String,
    pub title: String,
    /// Alternatives are narrowed to the prescreened bidders.
    pub hierarchy: DecisionHierarchy,
    /// Every bidder registered at creation.
    pub bidders: Vec<Element>,
    pub requirements: Vec<Requirement>,
    pub gamma: Threshold,
    pub estimate: Money,
    pub bid_security_threshold: Money,
    pub state: WorkflowState,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
    /// Number of commands applied so far.
    pub revision: u64,
    #[serde(default)]
    pub dossiers: BTreeMap<String, BidderDossier>,
    #[serde(default)]
    pub prescreen: Option<PrescreenOutcome>,
    /// decision maker -> context -> latest submission
    #[serde(default)]
    pub judgments: BTreeMap<String, BTreeMap<String, JudgmentRecord>>,
    #[serde(default)]
    pub technical: Option<SynthesisResult>,
    #[serde(default)]
    pub bids: BTreeMap<String, Bid>,
    #[serde(default)]
    pub award: Option<FinancialResult>,
    #[serde(default)]
    pub cancellation: Option<String>,
}

impl Project {
    pub fn judgment(&self, dm: &str, context: &str) -> Option<&JudgmentRecord> {
        self.judgments.get(dm)?.get(context)
    }

    /// Matrices of accepted submissions only; drafts are left out.
    pub fn accepted_judgments(&self) -> Result<BTreeMap<String, DmJudgments>> {
        let mut out = BTreeMap::new();
        for (dm, slots) in &self.judgments {
            let mut mats = DmJudgments::new();
            for (ctx_id, rec) in slots.iter().filter(|(_, r)| r.is_accepted()) {
                let ctx = self.hierarchy.context(ctx_id).ok_or_else(|| ServiceError::UnknownContext(ctx_id.clone()))?;
                mats.insert(ctx_id.clone(), matrix_from_submission(&rec.submission, &ctx.labels)?);
            }
            out.insert(dm.clone(), mats);
        }
        Ok(out)
    }

    /// `dm/context` pairs without an accepted matrix.
    pub fn missing_judgments(&self) -> Vec<String> {
        let mut out = Vec::new();
        for dm in self.hierarchy.decision_maker_ids() {
            for ctx in self.hierarchy.contexts() {
                if !self.judgment(&dm, &ctx.id).is_some_and(JudgmentRecord::is_accepted) {
                    out.push(format!("{dm}/{}", ctx.id));
                }
            }
        }
        out
    }

    pub fn has_drafts(&self) -> bool {
        self.judgments.values().flat_map(|s| s.values()).any(|r| !r.is_accepted())
    }

    /// Per decision maker, per context completion.
    pub fn progress(&self) -> BTreeMap<String, BTreeMap<String, SlotStatus>> {
        let contexts = self.hierarchy.contexts();
        self.hierarchy
            .decision_maker_ids()
            .into_iter()
            .map(|dm| {
                let row = contexts
                    .iter()
                    .map(|c| {
                        let status = match self.judgment(&dm, &c.id) {
                            None => SlotStatus::Missing,
                            Some(r) if r.is_accepted() => SlotStatus::Accepted,
                            Some(_) => SlotStatus::Draft,
                        };
                        (c.id.clone(), status)
                    })
                    .collect();
                (dm, row)
            })
            .collect()
    }

    /// The document as seen by one decision maker: other decision makers'
    /// judgments are dropped until they are disclosed.
    pub fn view_for(&self, dm: &str) -> Project {
        let mut p = self.clone();
        if !self.state.judgments_disclosed() {
            p.judgments.retain(|k, _| k == dm);
        }
        p
    }

    pub fn may_see_judgments_of(&self, viewer: &str, owner: &str) -> bool {
        viewer == owner || self.state.judgments_disclosed()
    }
}

/// Every state-changing request. Serialized into the audit log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Command {
    CreateProject {
        project_id: String,
        title: String,
        hierarchy: DecisionHierarchy,
        requirements: Vec<Requirement>,
        gamma: Threshold,
        estimate: Money,
        bid_security_threshold: Money,
    },
    OpenPrescreening,
    SubmitDossier {
        dossier: BidderDossier,
    },
    RunPrescreen,
    SubmitJudgment {
        decision_maker_id: String,
        submission: JudgmentSubmission,
    },
    RunTechnicalEvaluation,
    OpenBidding,
    SubmitBid {
        bid: Bid,
    },
    RunFinancialEvaluation,
    Cancel {
        #[serde(default)]
        reason: Option<String>,
    },
}

impl Command {
    pub fn action(&self) -> &'static str {
        match self {
            Command::CreateProject { .. } => "create_project",
            Command::OpenPrescreening => "open_prescreening",
            Command::SubmitDossier { .. } => "submit_dossier",
            Command::RunPrescreen => "run_prescreen",
            Command::SubmitJudgment { .. } => "submit_judgment",
            Command::RunTechnicalEvaluation => "run_technical_evaluation",
            Command::OpenBidding => "open_bidding",
            Command::SubmitBid { .. } => "submit_bid",
            Command::RunFinancialEvaluation => "run_financial_evaluation",
            Command::Cancel { .. } => "cancel",
        }
    }

    fn allowed_in(&self, s: WorkflowState) -> bool {
        use WorkflowState::*;
        match self {
            Command::CreateProject { .. } => false,
            Command::OpenPrescreening => s == Setup,
            Command::SubmitDossier { .. } | Command::RunPrescreen => s == Prescreening,
            Command::SubmitJudgment { .. } => matches!(s, JudgmentCollection | ConsistencyReview),
            Command::RunTechnicalEvaluation => {
                matches!(s, JudgmentCollection | ConsistencyReview | TechnicalRanking | Screening)
            }
            Command::OpenBidding => s == Screening,
            Command::SubmitBid { .. } | Command::RunFinancialEvaluation => s == FinancialEvaluation,
            Command::Cancel { .. } => !s.is_terminal(),
        }
    }
}

/// Applies `cmd` at time `at`. `current` is `None` only for project creation.
pub fn apply(current: Option<&Project>, cmd: &Command, at: DateTime<Utc>) -> Result<Project> {
    let prior = match (current, cmd) {
        (None, Command::CreateProject { .. }) => return create(cmd, at),
        (Some(p), Command::CreateProject { .. }) => return Err(ServiceError::ProjectExists(p.id.clone())),
        (None, _) => return Err(ServiceError::ProjectNotFound(String::new())),
        (Some(p), _) => p,
    };
    if !cmd.allowed_in(prior.state) {
        return Err(ServiceError::WrongState { operation: cmd.action(), state: prior.state });
    }
    let mut p = prior.clone();
    match cmd {
        Command::CreateProject { .. } => unreachable!("handled above"),
        Command::OpenPrescreening => p.state = WorkflowState::Prescreening,
        Command::SubmitDossier { dossier } => {
            if !p.bidders.iter().any(|b| b.id == dossier.contractor_id) {
                return Err(ServiceError::UnknownContractor(dossier.contractor_id.clone()));
            }
            dossier.check_against(&p.requirements)?;
            p.dossiers.insert(dossier.contractor_id.clone(), dossier.clone());
        }
        Command::RunPrescreen => run_prescreen(&mut p)?,
        Command::SubmitJudgment { decision_maker_id, submission } => {
            submit_judgment(&mut p, decision_maker_id, submission, at)?
        }
        Command::RunTechnicalEvaluation => {
            let missing = p.missing_judgments();
            if !missing.is_empty() {
                return Err(FahpError::IncompleteJudgments(missing).into());
            }
            let accepted = p.accepted_judgments()?;
            debug_assert!(missing_judgments(&p.hierarchy, &accepted).is_empty());
            p.technical = Some(synthesize(&p.hierarchy, &accepted)?);
            p.state = WorkflowState::Screening;
        }
        Command::OpenBidding => p.state = WorkflowState::FinancialEvaluation,
        Command::SubmitBid { bid } => {
            let screening = &p.technical.as_ref().ok_or(ServiceError::NotAvailable("technical evaluation"))?.screening;
            if !screening.is_qualified(&bid.contractor_id) {
                return Err(if p.bidders.iter().any(|b| b.id == bid.contractor_id) {
                    ServiceError::BidFromScreenedOut(bid.contractor_id.clone())
                } else {
                    ServiceError::UnknownContractor(bid.contractor_id.clone())
                });
            }
            bid.validate()?;
            p.bids.insert(bid.contractor_id.clone(), bid.clone());
        }
        Command::RunFinancialEvaluation => {
            let qualified =
                p.technical.as_ref().ok_or(ServiceError::NotAvailable("technical evaluation"))?.screening.qualified.clone();
            let bids: Vec<Bid> = qualified.iter().filter_map(|q| p.bids.get(q).cloned()).collect();
            p.award = Some(evaluate_financial(p.estimate, &bids, &qualified, p.bid_security_threshold)?);
            p.state = WorkflowState::Awarded;
        }
        Command::Cancel { reason } => {
            p.cancellation = Some(reason.clone().unwrap_or_default());
            p.state = WorkflowState::Cancelled;
        }
    }
    debug_assert!(prior.state.can_transition_to(p.state));
    p.revision += 1;
    p.updated_at = at;
    Ok(p)
}

fn create(cmd: &Command, at: DateTime<Utc>) -> Result<Project> {
    let Command::CreateProject { project_id, title, hierarchy, requirements, gamma, estimate, bid_security_threshold } =
        cmd
    else {
        unreachable!("create called with {}", cmd.action())
    };
    hierarchy.validate()?;
    random_index(hierarchy.criteria.len())?;
    for c in hierarchy.criteria.iter().filter(|c| c.sub_criteria.len() >= 2) {
        random_index(c.sub_criteria.len())?;
    }
    let mut seen = HashSet::new();
    if let Some(dup) = requirements.iter().find(|r| !seen.insert(r.id.as_str())) {
        return Err(ServiceError::InvalidRequirements(format!("duplicate id {}", dup.id)));
    }
    if *estimate <= Money::ZERO {
        return Err(FahpError::InvalidAmount(estimate.to_string()).into());
    }
    Ok(Project {
        id: project_id.clone(),
        title: title.clone(),
        hierarchy: hierarchy.clone(),
        bidders: hierarchy.alternatives.clone(),
        requirements: requirements.clone(),
        gamma: *gamma,
        estimate: *estimate,
        bid_security_threshold: *bid_security_threshold,
        state: WorkflowState::Setup,
        created_at: at,
        updated_at: at,
        revision: 1,
        dossiers: BTreeMap::new(),
        prescreen: None,
        judgments: BTreeMap::new(),
        technical: None,
        bids: BTreeMap::new(),
        award: None,
        cancellation: None,
    })
}

fn run_prescreen(p: &mut Project) -> Result<()> {
    let mut dossiers = Vec::with_capacity(p.bidders.len());
    for b in &p.bidders {
        dossiers.push(p.dossiers.get(&b.id).cloned().ok_or_else(|| ServiceError::MissingDossier(b.id.clone()))?);
    }
    let outcome = prescreen_mandatory(&p.requirements, &dossiers);
    if outcome.qualified.is_empty() {
        return Err(ServiceError::NoQualifiedBidders);
    }
    let narrowed = p.hierarchy.restrict_alternatives(&outcome.qualified);
    narrowed.validate()?;
    random_index(narrowed.alternatives.len())?;
    p.hierarchy = narrowed;
    p.prescreen = Some(outcome);
    p.state = WorkflowState::JudgmentCollection;
    Ok(())
}

fn submit_judgment(p: &mut Project, dm: &str, submission: &JudgmentSubmission, at: DateTime<Utc>) -> Result<()> {
    if !p.hierarchy.decision_makers.iter().any(|d| d.id == dm) {
        return Err(ServiceError::UnknownDecisionMaker(dm.to_owned()));
    }
    let ctx =
        p.hierarchy.context(&submission.context_id).ok_or_else(|| ServiceError::UnknownContext(submission.context_id.clone()))?;
    let mut submission = submission.clone();
    submission.decision_maker_id = dm.to_owned();
    submission.submitted_at = Some(at);
    let matrix = matrix_from_submission(&submission, &ctx.labels)?;
    let report = evaluate_consistency(&matrix, p.gamma)?.with_decision_maker(dm);
    p.judgments.entry(dm.to_owned()).or_default().insert(ctx.id, JudgmentRecord { submission, report });
    p.state = if p.has_drafts() {
        WorkflowState::ConsistencyReview
    } else if p.missing_judgments().is_empty() {
        WorkflowState::TechnicalRanking
    } else {
        WorkflowState::JudgmentCollection
    };
    Ok(())
}
