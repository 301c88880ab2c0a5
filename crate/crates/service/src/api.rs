//! HTTP API.
//!
//! All bodies are JSON except the `export` endpoints, which return
//! tab-separated text. Currency amounts are decimal strings. Every route
//! except `/health` needs `Authorization: Bearer <token>`: the admin token
//! from the configuration, or a decision-maker token issued through
//! `POST /v1/projects/{id}/tokens`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{FromRequestParts, Path, State};
use axum::http::header::{AUTHORIZATION, CONTENT_TYPE, WWW_AUTHENTICATE};
use axum::http::request::Parts;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use fahp_core::report::{financial_table, synthesis_table};
use fahp_core::{Bid, BidderDossier, ConsistencyReport, FahpError, FinancialResult, JudgmentSubmission, Money};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::audit::AuditRecord;
use crate::error::ServiceError;
use crate::service::{DecisionService, Principal, ProjectSpec, ProjectSummary};
use crate::workflow::{JudgmentRecord, Project, SlotStatus};

pub type SharedState = Arc<DecisionService>;

#[derive(Debug)]
pub enum ApiError {
    Unauthorized,
    Forbidden(String),
    BadRequest(String),
    Service(ServiceError),
    Internal(String),
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        ApiError::Service(e)
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::BadRequest(e.body_text())
    }
}

fn service_status(e: &ServiceError) -> StatusCode {
    match e {
        ServiceError::ProjectNotFound(_)
        | ServiceError::UnknownDecisionMaker(_)
        | ServiceError::UnknownContext(_)
        | ServiceError::UnknownContractor(_)
        | ServiceError::NotAvailable(_) => StatusCode::NOT_FOUND,
        ServiceError::ProjectExists(_)
        | ServiceError::WrongState { .. }
        | ServiceError::MissingDossier(_)
        | ServiceError::NoQualifiedBidders
        | ServiceError::Core(FahpError::IncompleteJudgments(_) | FahpError::MissingBid(_)) => StatusCode::CONFLICT,
        ServiceError::AuditMismatch { .. } | ServiceError::Store(_) => StatusCode::INTERNAL_SERVER_ERROR,
        ServiceError::BidFromScreenedOut(_) | ServiceError::InvalidRequirements(_) | ServiceError::Core(_) => {
            StatusCode::UNPROCESSABLE_ENTITY
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, code, message, details) = match &self {
            ApiError::Unauthorized => (StatusCode::UNAUTHORIZED, "unauthorized", "missing or unknown bearer token".into(), None),
            ApiError::Forbidden(m) => (StatusCode::FORBIDDEN, "forbidden", m.clone(), None),
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, "bad_request", m.clone(), None),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, "internal", m.clone(), None),
            ApiError::Service(e) => {
                let details = match e {
                    ServiceError::Core(FahpError::IncompleteJudgments(missing)) => Some(json!({ "missing": missing })),
                    ServiceError::WrongState { state, .. } => Some(json!({ "state": state })),
                    _ => None,
                };
                (service_status(e), e.code(), e.to_string(), details)
            }
        };
        if status.is_server_error() {
            tracing::error!(code, %message, "request failed");
        }
        let mut body = json!({ "error": code, "message": message });
        if let Some(d) = details {
            body["details"] = d;
        }
        let mut resp = (status, Json(body)).into_response();
        if status == StatusCode::UNAUTHORIZED {
            resp.headers_mut().insert(WWW_AUTHENTICATE, "Bearer".parse().expect("static header"));
        }
        resp
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Runs a blocking service call off the async executor.
async fn blocking<T, F>(svc: &SharedState, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&DecisionService) -> Result<T, ServiceError> + Send + 'static,
{
    let svc = svc.clone();
    tokio::task::spawn_blocking(move || f(&svc))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?
        .map_err(ApiError::from)
}

pub struct Auth(pub Principal);

impl FromRequestParts<SharedState> for Auth {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &SharedState) -> Result<Self, Self::Rejection> {
        let token = parts
            .headers
            .get(AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .map(|t| t.trim().to_owned())
            .filter(|t| !t.is_empty())
            .ok_or(ApiError::Unauthorized)?;
        blocking(state, move |s| s.authenticate(&token)).await?.map(Auth).ok_or(ApiError::Unauthorized)
    }
}

impl Auth {
    fn admin(&self) -> ApiResult<()> {
        match self.0 {
            Principal::Admin => Ok(()),
            _ => Err(ApiError::Forbidden("requires the admin token".into())),
        }
    }

    /// Admin or a decision maker of `project`. Returns the decision maker
    /// id, if any.
    fn member(&self, project: &str) -> ApiResult<Option<String>> {
        match &self.0 {
            Principal::Admin => Ok(None),
            Principal::DecisionMaker(g) if g.project_id == project => Ok(Some(g.decision_maker_id.clone())),
            Principal::DecisionMaker(_) => Err(ApiError::Forbidden("token is bound to another project".into())),
        }
    }

    fn decision_maker(&self, project: &str, dm: &str) -> ApiResult<()> {
        match &self.0 {
            Principal::DecisionMaker(g) if g.project_id == project && g.decision_maker_id == dm => Ok(()),
            _ => Err(ApiError::Forbidden(format!("only {dm} may submit these judgments"))),
        }
    }

    fn actor(&self) -> String {
        self.0.actor()
    }
}

pub fn router(service: SharedState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/v1/projects", get(list_projects).post(create_project))
        .route("/v1/projects/{id}", get(get_project))
        .route("/v1/projects/{id}/progress", get(get_progress))
        .route("/v1/projects/{id}/prescreening", post(open_prescreening))
        .route("/v1/projects/{id}/dossiers/{contractor}", put(put_dossier))
        .route("/v1/projects/{id}/prescreen", post(run_prescreen))
        .route("/v1/projects/{id}/tokens", post(issue_token))
        .route("/v1/projects/{id}/judgments/{dm}/{context}", put(put_judgment).get(get_judgment))
        .route("/v1/projects/{id}/reports/{dm}/{context}", get(get_report))
        .route("/v1/projects/{id}/evaluation", post(run_evaluation).get(get_evaluation))
        .route("/v1/projects/{id}/evaluation/export", get(export_evaluation))
        .route("/v1/projects/{id}/bidding", post(open_bidding))
        .route("/v1/projects/{id}/bids/{contractor}", put(put_bid))
        .route("/v1/projects/{id}/award", post(run_award).get(get_award))
        .route("/v1/projects/{id}/award/export", get(export_award))
        .route("/v1/projects/{id}/audit", get(get_audit))
        .route("/v1/projects/{id}/cancel", post(cancel))
        .with_state(service)
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok", "version": env!("CARGO_PKG_VERSION") }))
}

async fn list_projects(State(s): State<SharedState>, auth: Auth) -> ApiResult<Json<Vec<ProjectSummary>>> {
    auth.admin()?;
    Ok(Json(blocking(&s, |s| s.projects()).await?))
}

async fn create_project(
    State(s): State<SharedState>,
    auth: Auth,
    body: Result<Json<ProjectSpec>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<Project>)> {
    auth.admin()?;
    let Json(spec) = body?;
    let actor = auth.actor();
    let p = blocking(&s, move |s| s.create_project(&actor, spec)).await?;
    Ok((StatusCode::CREATED, Json(p)))
}

async fn get_project(State(s): State<SharedState>, auth: Auth, Path(id): Path<String>) -> ApiResult<Json<Project>> {
    let viewer = auth.member(&id)?;
    let p = blocking(&s, move |s| s.project(&id)).await?;
    Ok(Json(match viewer {
        Some(dm) => p.view_for(&dm),
        None => p,
    }))
}

async fn get_progress(
    State(s): State<SharedState>,
    auth: Auth,
    Path(id): Path<String>,
) -> ApiResult<Json<BTreeMap<String, BTreeMap<String, SlotStatus>>>> {
    auth.member(&id)?;
    Ok(Json(blocking(&s, move |s| Ok(s.project(&id)?.progress())).await?))
}

async fn open_prescreening(State(s): State<SharedState>, auth: Auth, Path(id): Path<String>) -> ApiResult<Json<Project>> {
    auth.admin()?;
    let actor = auth.actor();
    Ok(Json(blocking(&s, move |s| s.open_prescreening(&id, &actor)).await?))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DossierBody {
    pub submitted: BTreeSet<String>,
}

async fn put_dossier(
    State(s): State<SharedState>,
    auth: Auth,
    Path((id, contractor)): Path<(String, String)>,
    body: Result<Json<DossierBody>, JsonRejection>,
) -> ApiResult<Json<BidderDossier>> {
    auth.admin()?;
    let Json(body) = body?;
    let dossier = BidderDossier { contractor_id: contractor, submitted: body.submitted };
    let actor = auth.actor();
    let d = dossier.clone();
    blocking(&s, move |s| s.submit_dossier(&id, &actor, d)).await?;
    Ok(Json(dossier))
}

async fn run_prescreen(
    State(s): State<SharedState>,
    auth: Auth,
    Path(id): Path<String>,
) -> ApiResult<Json<fahp_core::PrescreenOutcome>> {
    auth.admin()?;
    let actor = auth.actor();
    Ok(Json(blocking(&s, move |s| s.run_prescreen(&id, &actor)).await?))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TokenRequest {
    pub decision_maker_id: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TokenResponse {
    pub project_id: String,
    pub decision_maker_id: String,
    pub token: String,
}

async fn issue_token(
    State(s): State<SharedState>,
    auth: Auth,
    Path(id): Path<String>,
    body: Result<Json<TokenRequest>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<TokenResponse>)> {
    auth.admin()?;
    let Json(req) = body?;
    let (pid, dm) = (id.clone(), req.decision_maker_id.clone());
    let token = blocking(&s, move |s| s.issue_token(&pid, &dm)).await?;
    Ok((StatusCode::CREATED, Json(TokenResponse { project_id: id, decision_maker_id: req.decision_maker_id, token })))
}

async fn put_judgment(
    State(s): State<SharedState>,
    auth: Auth,
    Path((id, dm, context)): Path<(String, String, String)>,
    body: Result<Json<JudgmentSubmission>, JsonRejection>,
) -> ApiResult<Json<ConsistencyReport>> {
    auth.decision_maker(&id, &dm)?;
    let Json(mut sub) = body?;
    if sub.context_id.is_empty() {
        sub.context_id = context.clone();
    } else if sub.context_id != context {
        return Err(ApiError::BadRequest(format!("context_id {} does not match the path", sub.context_id)));
    }
    if !sub.decision_maker_id.is_empty() && sub.decision_maker_id != dm {
        return Err(ApiError::BadRequest(format!("decision_maker_id {} does not match the path", sub.decision_maker_id)));
    }
    let actor = auth.actor();
    Ok(Json(blocking(&s, move |s| s.submit_judgment(&id, &actor, &dm, sub)).await?))
}

async fn visible_judgment(s: &SharedState, auth: &Auth, id: String, dm: String, context: String) -> ApiResult<JudgmentRecord> {
    let viewer = auth.member(&id)?;
    blocking(s, move |s| {
        let p = s.project(&id)?;
        if let Some(v) = &viewer {
            if !p.may_see_judgments_of(v, &dm) {
                return Ok(Err(ApiError::Forbidden("judgments of other decision makers are not yet disclosed".into())));
            }
        }
        Ok(Ok(s.judgment(&id, &dm, &context)?))
    })
    .await?
}

async fn get_judgment(
    State(s): State<SharedState>,
    auth: Auth,
    Path((id, dm, context)): Path<(String, String, String)>,
) -> ApiResult<Json<JudgmentRecord>> {
    Ok(Json(visible_judgment(&s, &auth, id, dm, context).await?))
}

async fn get_report(
    State(s): State<SharedState>,
    auth: Auth,
    Path((id, dm, context)): Path<(String, String, String)>,
) -> ApiResult<Json<ConsistencyReport>> {
    Ok(Json(visible_judgment(&s, &auth, id, dm, context).await?.report))
}

async fn run_evaluation(
    State(s): State<SharedState>,
    auth: Auth,
    Path(id): Path<String>,
) -> ApiResult<Json<fahp_core::SynthesisResult>> {
    auth.admin()?;
    let actor = auth.actor();
    Ok(Json(blocking(&s, move |s| s.run_technical_evaluation(&id, &actor)).await?))
}

async fn technical(s: &SharedState, auth: &Auth, id: String) -> ApiResult<fahp_core::SynthesisResult> {
    auth.member(&id)?;
    blocking(s, move |s| s.project(&id)?.technical.ok_or(ServiceError::NotAvailable("technical evaluation"))).await
}

async fn get_evaluation(
    State(s): State<SharedState>,
    auth: Auth,
    Path(id): Path<String>,
) -> ApiResult<Json<fahp_core::SynthesisResult>> {
    Ok(Json(technical(&s, &auth, id).await?))
}

fn tsv(body: String) -> Response {
    ([(CONTENT_TYPE, "text/tab-separated-values; charset=utf-8")], body).into_response()
}

async fn export_evaluation(State(s): State<SharedState>, auth: Auth, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(tsv(synthesis_table(&technical(&s, &auth, id).await?)))
}

async fn open_bidding(State(s): State<SharedState>, auth: Auth, Path(id): Path<String>) -> ApiResult<Json<Project>> {
    auth.admin()?;
    let actor = auth.actor();
    Ok(Json(blocking(&s, move |s| s.open_bidding(&id, &actor)).await?))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BidBody {
    pub price: Money,
    #[serde(default)]
    pub security_document: Option<String>,
}

async fn put_bid(
    State(s): State<SharedState>,
    auth: Auth,
    Path((id, contractor)): Path<(String, String)>,
    body: Result<Json<BidBody>, JsonRejection>,
) -> ApiResult<Json<Bid>> {
    auth.admin()?;
    let Json(body) = body?;
    let bid = Bid { contractor_id: contractor, price: body.price, security_document: body.security_document };
    let actor = auth.actor();
    let b = bid.clone();
    blocking(&s, move |s| s.submit_bid(&id, &actor, b)).await?;
    Ok(Json(bid))
}

async fn run_award(State(s): State<SharedState>, auth: Auth, Path(id): Path<String>) -> ApiResult<Json<FinancialResult>> {
    auth.admin()?;
    let actor = auth.actor();
    Ok(Json(blocking(&s, move |s| s.run_financial_evaluation(&id, &actor)).await?))
}

async fn award(s: &SharedState, auth: &Auth, id: String) -> ApiResult<FinancialResult> {
    auth.member(&id)?;
    blocking(s, move |s| s.project(&id)?.award.ok_or(ServiceError::NotAvailable("award"))).await
}

async fn get_award(State(s): State<SharedState>, auth: Auth, Path(id): Path<String>) -> ApiResult<Json<FinancialResult>> {
    Ok(Json(award(&s, &auth, id).await?))
}

async fn export_award(State(s): State<SharedState>, auth: Auth, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(tsv(financial_table(&award(&s, &auth, id).await?)))
}

async fn get_audit(State(s): State<SharedState>, auth: Auth, Path(id): Path<String>) -> ApiResult<Json<Vec<AuditRecord>>> {
    auth.admin()?;
    Ok(Json(blocking(&s, move |s| s.audit_log(&id)).await?))
}

#[derive(Debug, Default, Serialize, Deserialize)]
pub struct CancelBody {
    #[serde(default)]
    pub reason: Option<String>,
}

async fn cancel(
    State(s): State<SharedState>,
    auth: Auth,
    Path(id): Path<String>,
    body: Option<Json<CancelBody>>,
) -> ApiResult<Json<Project>> {
    auth.admin()?;
    let reason = body.and_then(|Json(b)| b.reason);
    let actor = auth.actor();
    Ok(Json(blocking(&s, move |s| s.cancel(&id, &actor, reason)).await?))
}
