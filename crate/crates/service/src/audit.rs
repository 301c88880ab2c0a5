//! Append-only audit records and log replay.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, ServiceError};
use crate::workflow::{apply, Command, Project, WorkflowState};

/// One applied command. `sequence` starts at 1 and has no gaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub project_id: String,
    pub sequence: u64,
    pub actor: String,
    pub action: String,
    pub command: Command,
    /// Hex SHA-256 of the command's JSON encoding.
    pub payload_digest: String,
    pub timestamp: DateTime<Utc>,
    pub prior_state: Option<WorkflowState>,
    pub next_state: WorkflowState,
}

impl AuditRecord {
    pub fn new(
        prior: Option<&Project>,
        next: &Project,
        actor: impl Into<String>,
        command: Command,
        timestamp: DateTime<Utc>,
    ) -> Self {
        AuditRecord {
            project_id: next.id.clone(),
            sequence: next.revision,
            actor: actor.into(),
            action: command.action().to_owned(),
            payload_digest: payload_digest(&command),
            command,
            timestamp,
            prior_state: prior.map(|p| p.state),
            next_state: next.state,
        }
    }
}

pub fn payload_digest(command: &Command) -> String {
    let bytes = serde_json::to_vec(command).expect("commands always serialize");
    hex::encode(Sha256::digest(&bytes))
}

/// Rebuilds a project from its log, checking every record against the
/// state it claims to have produced.
pub fn replay(records: &[AuditRecord]) -> Result<Option<Project>> {
    let mut project: Option<Project> = None;
    for (i, r) in records.iter().enumerate() {
        let mismatch = |reason: String| ServiceError::AuditMismatch {
            project: r.project_id.clone(),
            sequence: r.sequence,
            reason,
        };
        if r.sequence != i as u64 + 1 {
            return Err(mismatch(format!("expected sequence {}", i + 1)));
        }
        if payload_digest(&r.command) != r.payload_digest {
            return Err(mismatch("payload digest does not match".into()));
        }
        if r.action != r.command.action() {
            return Err(mismatch(format!("action {} does not match command", r.action)));
        }
        if project.as_ref().map(|p| p.state) != r.prior_state {
            return Err(mismatch("prior state does not match".into()));
        }
        let next = apply(project.as_ref(), &r.command, r.timestamp).map_err(|e| mismatch(e.to_string()))?;
        if next.state != r.next_state || next.id != r.project_id {
            return Err(mismatch("replayed state does not match".into()));
        }
        project = Some(next);
    }
    Ok(project)
}
