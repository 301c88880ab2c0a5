//! The decision service: command execution with per-project serialization,
//! audit logging and bearer-token credentials.

use std::collections::HashMap;
use std::sync::Arc;

use chrono::{DateTime, Utc};
use fahp_core::{
    Bid, BidderDossier, ConsistencyReport, DecisionHierarchy, FinancialResult, JudgmentSubmission, Money,
    PrescreenOutcome, Requirement, SynthesisResult, Threshold, DEFAULT_BID_SECURITY_THRESHOLD,
};
use fahp_core::synthesis::default_requirements;
use parking_lot::Mutex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use uuid::Uuid;

use crate::audit::{replay, AuditRecord};
use crate::error::{Result, ServiceError};
use crate::store::{DocumentStore, Grant};
use crate::workflow::{apply, Command, JudgmentRecord, Project, WorkflowState};

/// Request body for project creation. Omitted settings take the service
/// defaults, which are then frozen into the project.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectSpec {
    pub title: String,
    pub hierarchy: DecisionHierarchy,
    #[serde(default)]
    pub requirements: Option<Vec<Requirement>>,
    #[serde(default)]
    pub gamma: Option<f64>,
    pub estimate: Money,
    #[serde(default)]
    pub bid_security_threshold: Option<Money>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectSummary {
    pub id: String,
    pub title: String,
    pub state: WorkflowState,
    pub updated_at: DateTime<Utc>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Defaults {
    pub gamma: Threshold,
    pub bid_security_threshold: Money,
}

impl Default for Defaults {
    fn default() -> Self {
        Self { gamma: Threshold::default(), bid_security_threshold: DEFAULT_BID_SECURITY_THRESHOLD }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Principal {
    Admin,
    DecisionMaker(Grant),
}

impl Principal {
    pub fn actor(&self) -> String {
        match self {
            Principal::Admin => "admin".into(),
            Principal::DecisionMaker(g) => format!("dm:{}", g.decision_maker_id),
        }
    }
}

type Clock = Box<dyn Fn() -> DateTime<Utc> + Send + Sync>;

pub struct DecisionService {
    store: Arc<dyn DocumentStore>,
    defaults: Defaults,
    admin_digest: String,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
    clock: Clock,
}

fn digest(token: &str) -> String {
    hex::encode(Sha256::digest(token.as_bytes()))
}

impl DecisionService {
    pub fn new(store: Arc<dyn DocumentStore>, defaults: Defaults, admin_token: &str) -> Self {
        Self {
            store,
            defaults,
            admin_digest: digest(admin_token),
            locks: Mutex::new(HashMap::new()),
            clock: Box::new(Utc::now),
        }
    }

    /// Replaces the wall clock, e.g. for reproducible batch runs.
    pub fn with_clock(mut self, clock: impl Fn() -> DateTime<Utc> + Send + Sync + 'static) -> Self {
        self.clock = Box::new(clock);
        self
    }

    pub fn defaults(&self) -> Defaults {
        self.defaults
    }

    pub fn store(&self) -> &Arc<dyn DocumentStore> {
        &self.store
    }

    fn lock_for(&self, id: &str) -> Arc<Mutex<()>> {
        self.locks.lock().entry(id.to_owned()).or_default().clone()
    }

    fn commit(&self, prior: Option<&Project>, actor: &str, cmd: Command) -> Result<Project> {
        let at = (self.clock)();
        let next = apply(prior, &cmd, at)?;
        let record = AuditRecord::new(prior, &next, actor, cmd, at);
        self.store.commit(&next, &record)?;
        tracing::info!(project = %next.id, action = %record.action, actor, state = %next.state, "committed");
        Ok(next)
    }

    pub fn create_project(&self, actor: &str, spec: ProjectSpec) -> Result<Project> {
        let id = Uuid::new_v4().to_string();
        self.create_project_with_id(actor, id, spec)
    }

    pub fn create_project_with_id(&self, actor: &str, id: String, spec: ProjectSpec) -> Result<Project> {
        let lock = self.lock_for(&id);
        let _g = lock.lock();
        if self.store.load(&id)?.is_some() {
            return Err(ServiceError::ProjectExists(id));
        }
        let cmd = Command::CreateProject {
            project_id: id,
            title: spec.title,
            hierarchy: spec.hierarchy,
            requirements: spec.requirements.unwrap_or_else(default_requirements),
            gamma: match spec.gamma {
                Some(g) => Threshold::new(g)?,
                None => self.defaults.gamma,
            },
            estimate: spec.estimate,
            bid_security_threshold: spec.bid_security_threshold.unwrap_or(self.defaults.bid_security_threshold),
        };
        self.commit(None, actor, cmd)
    }

    /// Applies one command under the project's write lock.
    pub fn execute(&self, project_id: &str, actor: &str, cmd: Command) -> Result<Project> {
        if matches!(cmd, Command::CreateProject { .. }) {
            return Err(ServiceError::ProjectExists(project_id.to_owned()));
        }
        let lock = self.lock_for(project_id);
        let _g = lock.lock();
        let prior = self.project(project_id)?;
        self.commit(Some(&prior), actor, cmd)
    }

    pub fn project(&self, id: &str) -> Result<Project> {
        self.store.load(id)?.ok_or_else(|| ServiceError::ProjectNotFound(id.to_owned()))
    }

    pub fn projects(&self) -> Result<Vec<ProjectSummary>> {
        let mut out = Vec::new();
        for id in self.store.project_ids()? {
            if let Some(p) = self.store.load(&id)? {
                out.push(ProjectSummary { id: p.id, title: p.title, state: p.state, updated_at: p.updated_at });
            }
        }
        Ok(out)
    }

    pub fn open_prescreening(&self, id: &str, actor: &str) -> Result<Project> {
        self.execute(id, actor, Command::OpenPrescreening)
    }

    pub fn submit_dossier(&self, id: &str, actor: &str, dossier: BidderDossier) -> Result<Project> {
        self.execute(id, actor, Command::SubmitDossier { dossier })
    }

    pub fn run_prescreen(&self, id: &str, actor: &str) -> Result<PrescreenOutcome> {
        let p = self.execute(id, actor, Command::RunPrescreen)?;
        Ok(p.prescreen.expect("set by a successful prescreen"))
    }

    pub fn submit_judgment(
        &self,
        id: &str,
        actor: &str,
        decision_maker_id: &str,
        submission: JudgmentSubmission,
    ) -> Result<ConsistencyReport> {
        let context = submission.context_id.clone();
        let cmd = Command::SubmitJudgment { decision_maker_id: decision_maker_id.to_owned(), submission };
        let p = self.execute(id, actor, cmd)?;
        let rec = p.judgment(decision_maker_id, &context).expect("stored by a successful submission");
        Ok(rec.report.clone())
    }

    pub fn judgment(&self, id: &str, decision_maker_id: &str, context: &str) -> Result<JudgmentRecord> {
        let p = self.project(id)?;
        if !p.hierarchy.decision_makers.iter().any(|d| d.id == decision_maker_id) {
            return Err(ServiceError::UnknownDecisionMaker(decision_maker_id.to_owned()));
        }
        p.judgment(decision_maker_id, context).cloned().ok_or(ServiceError::NotAvailable("judgment"))
    }

    pub fn run_technical_evaluation(&self, id: &str, actor: &str) -> Result<SynthesisResult> {
        let p = self.execute(id, actor, Command::RunTechnicalEvaluation)?;
        Ok(p.technical.expect("set by a successful evaluation"))
    }

    pub fn open_bidding(&self, id: &str, actor: &str) -> Result<Project> {
        self.execute(id, actor, Command::OpenBidding)
    }

    pub fn submit_bid(&self, id: &str, actor: &str, bid: Bid) -> Result<Project> {
        self.execute(id, actor, Command::SubmitBid { bid })
    }

    pub fn run_financial_evaluation(&self, id: &str, actor: &str) -> Result<FinancialResult> {
        let p = self.execute(id, actor, Command::RunFinancialEvaluation)?;
        Ok(p.award.expect("set by a successful financial evaluation"))
    }

    pub fn cancel(&self, id: &str, actor: &str, reason: Option<String>) -> Result<Project> {
        self.execute(id, actor, Command::Cancel { reason })
    }

    pub fn audit_log(&self, id: &str) -> Result<Vec<AuditRecord>> {
        self.project(id)?;
        Ok(self.store.audit_log(id)?)
    }

    /// The project rebuilt from its audit log alone.
    pub fn replay(&self, id: &str) -> Result<Project> {
        let log = self.store.audit_log(id)?;
        replay(&log)?.ok_or_else(|| ServiceError::ProjectNotFound(id.to_owned()))
    }

    /// Issues a fresh bearer token for one decision maker of a project.
    pub fn issue_token(&self, project_id: &str, decision_maker_id: &str) -> Result<String> {
        let p = self.project(project_id)?;
        if !p.hierarchy.decision_makers.iter().any(|d| d.id == decision_maker_id) {
            return Err(ServiceError::UnknownDecisionMaker(decision_maker_id.to_owned()));
        }
        let token = format!("fahp_{}{}", Uuid::new_v4().simple(), Uuid::new_v4().simple());
        let grant = Grant { project_id: project_id.to_owned(), decision_maker_id: decision_maker_id.to_owned() };
        self.store.put_credential(digest(&token), grant)?;
        Ok(token)
    }

    pub fn authenticate(&self, token: &str) -> Result<Option<Principal>> {
        let d = digest(token);
        if d == self.admin_digest {
            return Ok(Some(Principal::Admin));
        }
        Ok(self.store.credentials()?.remove(&d).map(Principal::DecisionMaker))
    }
}
