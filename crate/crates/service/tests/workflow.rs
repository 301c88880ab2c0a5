mod common;

use std::collections::BTreeMap;
use std::sync::Arc;

use fahp_core::synthesis::synthesize;
use fahp_core::{
    matrix::matrix_from_submission, Bid, BidderDossier, Direction, Element, FahpError, JudgmentEntry,
    JudgmentSubmission, LinguisticGrade, Money,
};
use fahp_service::{
    replay, run_fixture, DecisionService, DocumentStore, FileStore, FixtureSet, MemoryStore, Project, ServiceError,
    WorkflowState,
};

use common::{case_study, memory_service, service_with};

const OWNER: &str = "admin";

/// Creates the case-study project and takes it through prescreening.
fn prescreened(svc: &DecisionService, fx: &FixtureSet, id: &str) {
    svc.create_project_with_id(OWNER, id.into(), fx.spec.clone()).unwrap();
    svc.open_prescreening(id, OWNER).unwrap();
    for d in &fx.dossiers {
        svc.submit_dossier(id, OWNER, d.clone()).unwrap();
    }
    svc.run_prescreen(id, OWNER).unwrap();
}

fn submit_all(svc: &DecisionService, fx: &FixtureSet, id: &str, skip: Option<(&str, &str)>) {
    for s in &fx.judgments {
        if skip == Some((s.decision_maker_id.as_str(), s.context_id.as_str())) {
            continue;
        }
        let dm = s.decision_maker_id.clone();
        let r = svc.submit_judgment(id, &format!("dm:{dm}"), &dm, s.clone()).unwrap();
        assert!(r.is_accepted(), "{dm}/{} rejected with CR {}", s.context_id, r.cr);
    }
}

/// Goal-level judgments that contradict each other: C1 > C2 > C3 > C1.
fn cyclic_goal(dm: &str) -> JudgmentSubmission {
    use LinguisticGrade::*;
    let e = |r: &str, c: &str, g, inv| JudgmentEntry::new(r, c, g, inv);
    JudgmentSubmission {
        decision_maker_id: dm.into(),
        context_id: "goal".into(),
        labels: None,
        entries: vec![
            e("C1", "C2", ExtremelyImportant, false),
            e("C1", "C3", ExtremelyImportant, true),
            e("C1", "C4", EquallyImportant, false),
            e("C2", "C3", ExtremelyImportant, false),
            e("C2", "C4", EquallyImportant, false),
            e("C3", "C4", EquallyImportant, false),
        ],
        submitted_at: None,
    }
}

fn fixture_judgment<'a>(fx: &'a FixtureSet, dm: &str, ctx: &str) -> &'a JudgmentSubmission {
    fx.judgments.iter().find(|s| s.decision_maker_id == dm && s.context_id == ctx).unwrap()
}

#[test]
fn case_study_runs_to_award() {
    let svc = memory_service();
    let fx = case_study();
    let p = run_fixture(&svc, "case", &fx).unwrap();

    assert_eq!(p.state, WorkflowState::Awarded);
    let pre = p.prescreen.as_ref().unwrap();
    assert_eq!(pre.qualified.len(), 9);
    assert_eq!(pre.disqualified.len(), 6);
    assert_eq!(p.hierarchy.alternatives.len(), 9);
    assert_eq!(p.bidders.len(), 15);

    let t = p.technical.as_ref().unwrap();
    let order: Vec<&str> = t.ranking.iter().map(|r| r.id.as_str()).collect();
    assert_eq!(
        order,
        ["contractor-4", "contractor-3", "contractor-1", "contractor-8", "contractor-6", "contractor-9", "contractor-5", "contractor-2", "contractor-7"]
    );
    assert_eq!(t.screening.qualified.len(), 7);
    assert_eq!(t.screening.screened_out, ["contractor-2", "contractor-7"]);

    let award = p.award.as_ref().unwrap();
    assert_eq!(award.winner, "contractor-5");
    assert!(t.screening.is_qualified(&award.winner));
    assert!(!award.security_required);
}

#[test]
fn every_mutation_appends_exactly_one_record() {
    let svc = memory_service();
    let p = run_fixture(&svc, "case", &case_study()).unwrap();
    let log = svc.audit_log("case").unwrap();
    assert_eq!(log.len() as u64, p.revision);
    for (i, r) in log.iter().enumerate() {
        assert_eq!(r.sequence, i as u64 + 1);
        assert_eq!(r.project_id, "case");
        if let Some(prior) = r.prior_state {
            assert!(prior.can_transition_to(r.next_state), "{prior} -> {}", r.next_state);
        }
    }
    assert!(log.windows(2).all(|w| w[0].timestamp < w[1].timestamp));
    assert_eq!(log[0].action, "create_project");
    assert_eq!(log.last().unwrap().action, "run_financial_evaluation");
}

#[test]
fn failed_operations_leave_no_record() {
    let svc = memory_service();
    let fx = case_study();
    svc.create_project_with_id(OWNER, "p".into(), fx.spec.clone()).unwrap();
    let err = svc.run_prescreen("p", OWNER).unwrap_err();
    assert!(matches!(err, ServiceError::WrongState { state: WorkflowState::Setup, .. }), "{err}");
    assert!(matches!(svc.open_bidding("p", OWNER), Err(ServiceError::WrongState { .. })));
    assert!(matches!(svc.run_technical_evaluation("p", OWNER), Err(ServiceError::WrongState { .. })));
    assert_eq!(svc.audit_log("p").unwrap().len(), 1);
    assert_eq!(svc.project("p").unwrap().revision, 1);
}

#[test]
fn replaying_the_log_rebuilds_the_project() {
    let svc = memory_service();
    let p = run_fixture(&svc, "case", &case_study()).unwrap();
    assert_eq!(svc.replay("case").unwrap(), p);
}

#[test]
fn replay_detects_a_tampered_record() {
    let svc = memory_service();
    run_fixture(&svc, "case", &case_study()).unwrap();
    let mut log = svc.audit_log("case").unwrap();
    let i = log.iter().position(|r| r.action == "submit_bid").unwrap();
    if let fahp_service::Command::SubmitBid { bid } = &mut log[i].command {
        bid.price = Money::from_major(1);
    }
    let err = replay(&log).unwrap_err();
    assert!(matches!(err, ServiceError::AuditMismatch { sequence, .. } if sequence == log[i].sequence), "{err}");
}

#[test]
fn creation_rejects_single_criterion_hierarchy() {
    let svc = memory_service();
    let mut spec = case_study().spec;
    spec.hierarchy.criteria.truncate(1);
    let err = svc.create_project(OWNER, spec).unwrap_err();
    assert!(matches!(err, ServiceError::Core(FahpError::InvalidHierarchy(_))), "{err}");
    assert!(svc.projects().unwrap().is_empty());
}

#[test]
fn creation_rejects_gamma_above_bound() {
    let svc = memory_service();
    let mut spec = case_study().spec;
    spec.gamma = Some(0.2);
    let err = svc.create_project(OWNER, spec).unwrap_err();
    assert!(matches!(err, ServiceError::Core(FahpError::ThresholdOutOfRange(g)) if g == 0.2), "{err}");
}

#[test]
fn creation_freezes_service_defaults() {
    let svc = memory_service();
    let mut spec = case_study().spec;
    spec.gamma = None;
    spec.requirements = None;
    let p = svc.create_project(OWNER, spec).unwrap();
    assert_eq!(p.gamma.value(), 0.1);
    assert_eq!(p.requirements.len(), 15);
    assert_eq!(p.requirements.iter().filter(|r| r.mandatory).count(), 10);
    assert_eq!(p.bid_security_threshold, Money::from_major(300_000_000));
    assert_eq!(p.state, WorkflowState::Setup);
}

#[test]
fn prescreen_with_no_qualified_bidder_stays_put() {
    let svc = memory_service();
    let fx = case_study();
    svc.create_project_with_id(OWNER, "p".into(), fx.spec.clone()).unwrap();
    svc.open_prescreening("p", OWNER).unwrap();
    for b in &fx.spec.hierarchy.alternatives {
        svc.submit_dossier("p", OWNER, BidderDossier { contractor_id: b.id.clone(), submitted: Default::default() })
            .unwrap();
    }
    assert!(matches!(svc.run_prescreen("p", OWNER), Err(ServiceError::NoQualifiedBidders)));
    assert_eq!(svc.project("p").unwrap().state, WorkflowState::Prescreening);
}

#[test]
fn prescreen_needs_every_dossier() {
    let svc = memory_service();
    let fx = case_study();
    svc.create_project_with_id(OWNER, "p".into(), fx.spec.clone()).unwrap();
    svc.open_prescreening("p", OWNER).unwrap();
    for d in fx.dossiers.iter().skip(1) {
        svc.submit_dossier("p", OWNER, d.clone()).unwrap();
    }
    let err = svc.run_prescreen("p", OWNER).unwrap_err();
    assert!(matches!(&err, ServiceError::MissingDossier(c) if c == "contractor-1"), "{err}");
}

#[test]
fn dossier_from_unregistered_bidder_is_rejected() {
    let svc = memory_service();
    let fx = case_study();
    svc.create_project_with_id(OWNER, "p".into(), fx.spec.clone()).unwrap();
    svc.open_prescreening("p", OWNER).unwrap();
    let d = BidderDossier { contractor_id: "contractor-99".into(), submitted: Default::default() };
    let err = svc.submit_dossier("p", OWNER, d).unwrap_err();
    assert!(matches!(&err, ServiceError::UnknownContractor(c) if c == "contractor-99"), "{err}");
}

#[test]
fn judgments_from_strangers_and_for_unknown_contexts_are_rejected() {
    let svc = memory_service();
    let fx = case_study();
    prescreened(&svc, &fx, "p");
    let s = fixture_judgment(&fx, "dm-1", "goal").clone();
    let err = svc.submit_judgment("p", "dm:dm-9", "dm-9", s.clone()).unwrap_err();
    assert!(matches!(err, ServiceError::UnknownDecisionMaker(_)), "{err}");
    let mut other = s.clone();
    other.context_id = "C9".into();
    let err = svc.submit_judgment("p", "dm:dm-1", "dm-1", other).unwrap_err();
    assert!(matches!(err, ServiceError::UnknownContext(_)), "{err}");
    let mut short = s;
    short.entries.pop();
    let err = svc.submit_judgment("p", "dm:dm-1", "dm-1", short).unwrap_err();
    assert!(matches!(err, ServiceError::Core(FahpError::MissingPair { .. })), "{err}");
}

#[test]
fn revision_loop_keeps_drafts_out_of_synthesis() {
    let svc = memory_service();
    let fx = case_study();
    prescreened(&svc, &fx, "p");
    submit_all(&svc, &fx, "p", Some(("dm-1", "goal")));
    assert_eq!(svc.project("p").unwrap().state, WorkflowState::JudgmentCollection);

    let draft = svc.submit_judgment("p", "dm:dm-1", "dm-1", cyclic_goal("dm-1")).unwrap();
    assert_eq!(draft.direction, Direction::RejectAndModify);
    assert!(draft.cr > 0.1);
    assert!(!draft.advice.is_empty());
    assert!(draft.advice.windows(2).all(|w| w[0].deviation >= w[1].deviation));
    let p = svc.project("p").unwrap();
    assert_eq!(p.state, WorkflowState::ConsistencyReview);
    assert_eq!(p.missing_judgments(), ["dm-1/goal"]);

    let err = svc.run_technical_evaluation("p", OWNER).unwrap_err();
    assert!(
        matches!(&err, ServiceError::Core(FahpError::IncompleteJudgments(m)) if m == &["dm-1/goal".to_string()]),
        "{err}"
    );

    let fixed = svc.submit_judgment("p", "dm:dm-1", "dm-1", fixture_judgment(&fx, "dm-1", "goal").clone()).unwrap();
    assert_eq!(fixed.direction, Direction::Accept);
    assert_eq!(svc.project("p").unwrap().state, WorkflowState::TechnicalRanking);
    let result = svc.run_technical_evaluation("p", OWNER).unwrap();

    // Synthesis straight from the fixture documents, with no draft anywhere.
    let p = svc.project("p").unwrap();
    let mut direct: BTreeMap<String, fahp_core::DmJudgments> = BTreeMap::new();
    for s in &fx.judgments {
        let labels = p.hierarchy.context(&s.context_id).unwrap().labels;
        direct
            .entry(s.decision_maker_id.clone())
            .or_default()
            .insert(s.context_id.clone(), matrix_from_submission(s, &labels).unwrap());
    }
    assert_eq!(result, synthesize(&p.hierarchy, &direct).unwrap());
}

#[test]
fn rejected_resubmission_withdraws_acceptance() {
    let svc = memory_service();
    let fx = case_study();
    prescreened(&svc, &fx, "p");
    let good = fixture_judgment(&fx, "dm-2", "goal").clone();
    assert!(svc.submit_judgment("p", "dm:dm-2", "dm-2", good).unwrap().is_accepted());
    assert!(!svc.submit_judgment("p", "dm:dm-2", "dm-2", cyclic_goal("dm-2")).unwrap().is_accepted());
    let p = svc.project("p").unwrap();
    assert!(p.missing_judgments().contains(&"dm-2/goal".to_string()));
    assert_eq!(p.state, WorkflowState::ConsistencyReview);
}

#[test]
fn one_missing_matrix_is_named() {
    let svc = memory_service();
    let fx = case_study();
    prescreened(&svc, &fx, "p");
    submit_all(&svc, &fx, "p", Some(("dm-3", "C24")));
    let err = svc.run_technical_evaluation("p", OWNER).unwrap_err();
    assert!(
        matches!(&err, ServiceError::Core(FahpError::IncompleteJudgments(m)) if m == &["dm-3/C24".to_string()]),
        "{err}"
    );
}

#[test]
fn rerunning_the_evaluation_is_bit_identical() {
    let svc = memory_service();
    let fx = case_study();
    prescreened(&svc, &fx, "p");
    submit_all(&svc, &fx, "p", None);
    let a = svc.run_technical_evaluation("p", OWNER).unwrap();
    let b = svc.run_technical_evaluation("p", OWNER).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    for (x, y) in a.final_weights.weights.iter().zip(&b.final_weights.weights) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
}

#[test]
fn judgments_close_once_complete() {
    let svc = memory_service();
    let fx = case_study();
    prescreened(&svc, &fx, "p");
    submit_all(&svc, &fx, "p", None);
    let s = fixture_judgment(&fx, "dm-1", "goal").clone();
    let err = svc.submit_judgment("p", "dm:dm-1", "dm-1", s).unwrap_err();
    assert!(matches!(err, ServiceError::WrongState { state: WorkflowState::TechnicalRanking, .. }), "{err}");
}

#[test]
fn other_decision_makers_judgments_are_hidden_until_ranking() {
    let svc = memory_service();
    let fx = case_study();
    prescreened(&svc, &fx, "p");
    submit_all(&svc, &fx, "p", Some(("dm-4", "C44")));
    let p = svc.project("p").unwrap();
    let view = p.view_for("dm-1");
    assert_eq!(view.judgments.keys().collect::<Vec<_>>(), ["dm-1"]);
    assert!(!p.may_see_judgments_of("dm-1", "dm-2"));

    svc.submit_judgment("p", "dm:dm-4", "dm-4", fixture_judgment(&fx, "dm-4", "C44").clone()).unwrap();
    let p = svc.project("p").unwrap();
    assert_eq!(p.state, WorkflowState::TechnicalRanking);
    assert_eq!(p.view_for("dm-1").judgments.len(), 4);
}

#[test]
fn bids_from_screened_out_contractors_are_rejected() {
    let svc = memory_service();
    let fx = case_study();
    prescreened(&svc, &fx, "p");
    submit_all(&svc, &fx, "p", None);
    svc.run_technical_evaluation("p", OWNER).unwrap();
    svc.open_bidding("p", OWNER).unwrap();
    let err = svc.submit_bid("p", OWNER, Bid::new("contractor-2", Money::from_major(100))).unwrap_err();
    assert!(matches!(&err, ServiceError::BidFromScreenedOut(c) if c == "contractor-2"), "{err}");
    let err = svc.submit_bid("p", OWNER, Bid::new("contractor-12", Money::from_major(100))).unwrap_err();
    assert!(matches!(&err, ServiceError::BidFromScreenedOut(_)), "{err}");
    let err = svc.submit_bid("p", OWNER, Bid::new("nobody", Money::from_major(100))).unwrap_err();
    assert!(matches!(&err, ServiceError::UnknownContractor(_)), "{err}");
}

#[test]
fn award_needs_a_bid_from_every_qualified_contractor() {
    let svc = memory_service();
    let fx = case_study();
    prescreened(&svc, &fx, "p");
    submit_all(&svc, &fx, "p", None);
    svc.run_technical_evaluation("p", OWNER).unwrap();
    svc.open_bidding("p", OWNER).unwrap();
    for b in fx.bids.iter().filter(|b| b.contractor_id != "contractor-9") {
        svc.submit_bid("p", OWNER, b.clone()).unwrap();
    }
    let err = svc.run_financial_evaluation("p", OWNER).unwrap_err();
    assert!(matches!(&err, ServiceError::Core(FahpError::MissingBid(c)) if c == "contractor-9"), "{err}");
    assert_eq!(svc.project("p").unwrap().state, WorkflowState::FinancialEvaluation);
}

#[test]
fn large_estimate_requires_bid_security() {
    let svc = memory_service();
    let mut fx = case_study();
    fx.spec.estimate = "300,000,000.00".parse().unwrap();
    prescreened(&svc, &fx, "p");
    submit_all(&svc, &fx, "p", None);
    svc.run_technical_evaluation("p", OWNER).unwrap();
    svc.open_bidding("p", OWNER).unwrap();
    for b in &fx.bids {
        svc.submit_bid("p", OWNER, b.clone()).unwrap();
    }
    let err = svc.run_financial_evaluation("p", OWNER).unwrap_err();
    assert!(matches!(err, ServiceError::Core(FahpError::MissingBidSecurity(_))), "{err}");

    for b in &fx.bids {
        let mut b = b.clone();
        b.security_document = Some(format!("bank-guarantee-{}", b.contractor_id));
        svc.submit_bid("p", OWNER, b).unwrap();
    }
    let award = svc.run_financial_evaluation("p", OWNER).unwrap();
    assert!(award.security_required);
    assert_eq!(award.winner, "contractor-5");
}

#[test]
fn cancelled_and_awarded_projects_are_final() {
    let svc = memory_service();
    let fx = case_study();
    svc.create_project_with_id(OWNER, "c".into(), fx.spec.clone()).unwrap();
    let p = svc.cancel("c", OWNER, Some("budget withdrawn".into())).unwrap();
    assert_eq!(p.state, WorkflowState::Cancelled);
    assert_eq!(p.cancellation.as_deref(), Some("budget withdrawn"));
    assert!(matches!(svc.open_prescreening("c", OWNER), Err(ServiceError::WrongState { .. })));
    assert!(matches!(svc.cancel("c", OWNER, None), Err(ServiceError::WrongState { .. })));

    run_fixture(&svc, "a", &fx).unwrap();
    assert!(matches!(svc.cancel("a", OWNER, None), Err(ServiceError::WrongState { .. })));
}

#[test]
fn duplicate_project_ids_are_rejected() {
    let svc = memory_service();
    let fx = case_study();
    svc.create_project_with_id(OWNER, "p".into(), fx.spec.clone()).unwrap();
    let err = svc.create_project_with_id(OWNER, "p".into(), fx.spec.clone()).unwrap_err();
    assert!(matches!(err, ServiceError::ProjectExists(_)));
    assert!(matches!(svc.project("missing"), Err(ServiceError::ProjectNotFound(_))));
}

#[test]
fn file_store_survives_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let fx = case_study();
    let (p, token) = {
        let svc = service_with(Arc::new(FileStore::open(dir.path()).unwrap()));
        let p = run_fixture(&svc, "case", &fx).unwrap();
        (p, svc.issue_token("case", "dm-2").unwrap())
    };
    let svc = service_with(Arc::new(FileStore::open(dir.path()).unwrap()));
    assert_eq!(svc.project("case").unwrap(), p);
    assert_eq!(svc.replay("case").unwrap(), p);
    assert_eq!(svc.projects().unwrap().len(), 1);
    let who = svc.authenticate(&token).unwrap().unwrap();
    assert_eq!(who.actor(), "dm:dm-2");
    assert!(svc.authenticate("not-a-token").unwrap().is_none());
}

#[test]
fn file_store_rejects_path_like_ids() {
    let dir = tempfile::tempdir().unwrap();
    let store = FileStore::open(dir.path()).unwrap();
    assert!(store.load("../escape").unwrap().is_none());
    let svc = service_with(Arc::new(store));
    let err = svc.create_project_with_id(OWNER, "../escape".into(), case_study().spec).unwrap_err();
    assert!(matches!(err, ServiceError::Store(_)), "{err}");
}

#[test]
fn concurrent_submissions_are_serialized() {
    let svc = Arc::new(memory_service());
    let fx = case_study();
    prescreened(&svc, &fx, "p");
    let before = svc.project("p").unwrap().revision;
    std::thread::scope(|scope| {
        for dm in ["dm-1", "dm-2", "dm-3", "dm-4"] {
            let svc = svc.clone();
            let mine: Vec<JudgmentSubmission> =
                fx.judgments.iter().filter(|s| s.decision_maker_id == dm).cloned().collect();
            scope.spawn(move || {
                for s in mine {
                    svc.submit_judgment("p", &format!("dm:{dm}"), dm, s).unwrap();
                }
            });
        }
    });
    let p = svc.project("p").unwrap();
    assert_eq!(p.revision, before + fx.judgments.len() as u64);
    assert_eq!(p.state, WorkflowState::TechnicalRanking);
    let log = svc.audit_log("p").unwrap();
    assert!(log.iter().enumerate().all(|(i, r)| r.sequence == i as u64 + 1));
    assert_eq!(replay(&log).unwrap().unwrap(), p);
}

#[test]
fn tokens_bind_to_registered_decision_makers() {
    let svc = memory_service();
    svc.create_project_with_id(OWNER, "p".into(), case_study().spec).unwrap();
    assert!(matches!(svc.issue_token("p", "dm-7"), Err(ServiceError::UnknownDecisionMaker(_))));
    let t1 = svc.issue_token("p", "dm-1").unwrap();
    let t2 = svc.issue_token("p", "dm-1").unwrap();
    assert_ne!(t1, t2);
    assert_eq!(svc.authenticate(common::ADMIN).unwrap(), Some(fahp_service::Principal::Admin));
    // tokens are stored only as digests
    let creds = svc.store().credentials().unwrap();
    assert!(creds.keys().all(|k| k != &t1 && k.len() == 64));
}

#[test]
fn memory_store_keeps_projects_apart() {
    let store = Arc::new(MemoryStore::new());
    let svc = service_with(store.clone());
    let fx = case_study();
    svc.create_project_with_id(OWNER, "a".into(), fx.spec.clone()).unwrap();
    let mut other = fx.spec.clone();
    other.hierarchy.alternatives.push(Element::new("contractor-16", "Contractor 16"));
    svc.create_project_with_id(OWNER, "b".into(), other).unwrap();
    svc.open_prescreening("b", OWNER).unwrap();
    assert_eq!(store.project_ids().unwrap(), ["a", "b"]);
    assert_eq!(store.audit_log("a").unwrap().len(), 1);
    assert_eq!(store.audit_log("b").unwrap().len(), 2);
    let a: Project = store.load("a").unwrap().unwrap();
    assert_eq!(a.bidders.len(), 15);
}
