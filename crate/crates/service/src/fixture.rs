//! Fixture directories and batch runs through the full workflow.
//!
//! ```text
//! project.json                 ProjectSpec
//! dossiers/<contractor>.json   BidderDossier
//! judgments/<dm>/<ctx>.json    JudgmentSubmission
//! bids/<contractor>.json       Bid (optional stage)
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use fahp_core::{Bid, BidderDossier, JudgmentSubmission};
use serde::de::DeserializeOwned;
use thiserror::Error;

use crate::error::ServiceError;
use crate::service::{DecisionService, ProjectSpec};
use crate::workflow::{Project, WorkflowState};

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error(transparent)]
    Service(#[from] ServiceError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureSet {
    pub spec: ProjectSpec,
    /// In bidder registration order.
    pub dossiers: Vec<BidderDossier>,
    /// Grouped by decision maker in hierarchy order, then by context order.
    pub judgments: Vec<JudgmentSubmission>,
    /// Sorted by contractor id.
    pub bids: Vec<Bid>,
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, FixtureError> {
    let bytes = fs::read(path).map_err(|source| FixtureError::Io { path: path.to_owned(), source })?;
    serde_json::from_slice(&bytes).map_err(|source| FixtureError::Json { path: path.to_owned(), source })
}

/// JSON files directly under `dir`, sorted by name; empty if `dir` is absent.
fn json_files(dir: &Path) -> Result<Vec<PathBuf>, FixtureError> {
    let entries = match fs::read_dir(dir) {
        Ok(e) => e,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(source) => return Err(FixtureError::Io { path: dir.to_owned(), source }),
    };
    let mut out = Vec::new();
    for entry in entries {
        let path = entry.map_err(|source| FixtureError::Io { path: dir.to_owned(), source })?.path();
        if path.extension().is_some_and(|e| e == "json") {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

pub fn load_fixture(dir: impl AsRef<Path>) -> Result<FixtureSet, FixtureError> {
    let dir = dir.as_ref();
    let spec: ProjectSpec = read_json(&dir.join("project.json"))?;

    let mut dossiers: Vec<BidderDossier> =
        json_files(&dir.join("dossiers"))?.iter().map(|p| read_json(p)).collect::<Result<_, _>>()?;
    let bidder_pos = |id: &str| spec.hierarchy.alternatives.iter().position(|a| a.id == id).unwrap_or(usize::MAX);
    dossiers.sort_by(|a, b| bidder_pos(&a.contractor_id).cmp(&bidder_pos(&b.contractor_id)));

    let contexts: Vec<String> = spec.hierarchy.contexts().into_iter().map(|c| c.id).collect();
    let ctx_pos = |id: &str| contexts.iter().position(|c| c == id).unwrap_or(usize::MAX);
    let mut judgments = Vec::new();
    for dm in &spec.hierarchy.decision_makers {
        let mut mine: Vec<JudgmentSubmission> = Vec::new();
        for path in json_files(&dir.join("judgments").join(&dm.id))? {
            let mut s: JudgmentSubmission = read_json(&path)?;
            if s.decision_maker_id.is_empty() {
                s.decision_maker_id = dm.id.clone();
            }
            mine.push(s);
        }
        mine.sort_by_key(|s| ctx_pos(&s.context_id));
        judgments.extend(mine);
    }

    let mut bids: Vec<Bid> = json_files(&dir.join("bids"))?.iter().map(|p| read_json(p)).collect::<Result<_, _>>()?;
    bids.sort_by(|a, b| a.contractor_id.cmp(&b.contractor_id));

    Ok(FixtureSet { spec, dossiers, judgments, bids })
}

/// Drives a fixture through every workflow stage it has data for. Stops
/// after screening when the fixture has no bids.
pub fn run_fixture(service: &DecisionService, project_id: &str, fx: &FixtureSet) -> Result<Project, ServiceError> {
    const OWNER: &str = "admin";
    service.create_project_with_id(OWNER, project_id.to_owned(), fx.spec.clone())?;
    service.open_prescreening(project_id, OWNER)?;
    for d in &fx.dossiers {
        service.submit_dossier(project_id, OWNER, d.clone())?;
    }
    service.run_prescreen(project_id, OWNER)?;
    for s in &fx.judgments {
        let dm = s.decision_maker_id.clone();
        service.submit_judgment(project_id, &format!("dm:{dm}"), &dm, s.clone())?;
    }
    service.run_technical_evaluation(project_id, OWNER)?;
    if !fx.bids.is_empty() {
        service.open_bidding(project_id, OWNER)?;
        let p = service.project(project_id)?;
        let screening = &p.technical.as_ref().expect("screening state has a result").screening;
        for b in fx.bids.iter().filter(|b| screening.is_qualified(&b.contractor_id)) {
            service.submit_bid(project_id, OWNER, b.clone())?;
        }
        service.run_financial_evaluation(project_id, OWNER)?;
    }
    let p = service.project(project_id)?;
    debug_assert!(matches!(p.state, WorkflowState::Screening | WorkflowState::Awarded));
    Ok(p)
}
