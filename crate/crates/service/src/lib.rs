//! Tender evaluation workflow service.
//!
//! Projects move through prescreening, judgment collection with consistency
//! feedback, technical ranking and screening, then the bid-price award. Each
//! mutation is a [`Command`] recorded in an append-only audit log from which
//! the project can be rebuilt.

pub mod api;
pub mod audit;
pub mod config;
pub mod error;
pub mod fixture;
pub mod service;
pub mod store;
pub mod workflow;

use std::sync::Arc;

pub use audit::{replay, AuditRecord};
pub use config::Config;
pub use error::{ServiceError, StoreError};
pub use fixture::{load_fixture, run_fixture, FixtureSet};
pub use service::{DecisionService, Defaults, Principal, ProjectSpec};
pub use store::{DocumentStore, FileStore, MemoryStore};
pub use workflow::{apply, Command, JudgmentRecord, Project, WorkflowState};

/// Serves the API with a file-backed store until interrupted.
pub async fn serve(config: Config) -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    let store = FileStore::open(&config.store_path)?;
    let admin_token = match &config.admin_token {
        Some(t) => t.clone(),
        None => {
            let t = format!("fahp_admin_{}", uuid::Uuid::new_v4().simple());
            tracing::warn!(token = %t, "FAHP_ADMIN_TOKEN not set; generated an admin token for this run");
            t
        }
    };
    let service = Arc::new(DecisionService::new(Arc::new(store), config.defaults(), &admin_token));
    let listener = tokio::net::TcpListener::bind(config.listen_addr).await?;
    tracing::info!(addr = %listener.local_addr()?, store = %config.store_path.display(), "listening");
    axum::serve(listener, api::router(service))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
