#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::atomic::{AtomicI64, Ordering};
use std::sync::Arc;

use chrono::{DateTime, TimeZone, Utc};
use fahp_service::{load_fixture, DecisionService, Defaults, DocumentStore, FixtureSet, MemoryStore};

pub const ADMIN: &str = "admin-token";

pub fn case_study_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/case-study")
}

pub fn case_study() -> FixtureSet {
    load_fixture(case_study_dir()).expect("case-study fixture loads")
}

/// One second per call from a fixed origin.
pub fn ticking_clock() -> impl Fn() -> DateTime<Utc> + Send + Sync + 'static {
    let t = AtomicI64::new(0);
    move || Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap() + chrono::Duration::seconds(t.fetch_add(1, Ordering::SeqCst))
}

pub fn service_with(store: Arc<dyn DocumentStore>) -> DecisionService {
    DecisionService::new(store, Defaults::default(), ADMIN).with_clock(ticking_clock())
}

pub fn memory_service() -> DecisionService {
    service_with(Arc::new(MemoryStore::new()))
}
