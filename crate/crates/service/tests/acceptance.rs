//! Acceptance gate. Prints one `[PASS]`/`[FAIL]` line per criterion and
//! exits non-zero if any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use fahp_core::consistency::{consistency_index, consistency_ratio, identify, lambda_max, status_line};
use fahp_core::financial::evaluate_financial;
use fahp_core::matrix::{matrix_from_submission, CrispMatrix};
use fahp_core::synthesis::{final_weights, prescreen_mandatory, rank, screen, synthesize};
use fahp_core::{
    evaluate_consistency, local_weights, Bid, Direction, FuzzyComparisonMatrix, GradeChoice, JudgmentEntry,
    JudgmentSubmission, LinguisticGrade, Money, Threshold, Tfn, WeightVector, DEFAULT_BID_SECURITY_THRESHOLD,
};
use fahp_service::{replay, run_fixture, FileStore, ServiceError, WorkflowState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn contractor(i: usize) -> String {
    format!("contractor-{i}")
}

fn labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("e{i}")).collect()
}

// Per decision maker alternative global weights, contractors 1..9.
const PER_DM_WEIGHTS: [[f64; 4]; 9] = [
    [0.00096814, 0.00077432, 0.00085770, 0.00270205],
    [0.00031455, 0.00068291, 0.00053683, 0.00064577],
    [0.00099848, 0.00075659, 0.00088892, 0.00280886],
    [0.00124313, 0.00072990, 0.00097547, 0.00254776],
    [0.00093518, 0.00080540, 0.00084524, 0.00047604],
    [0.00134322, 0.00109932, 0.00114998, 0.00083954],
    [0.00029252, 0.00030443, 0.00044826, 0.00028128],
    [0.00134321, 0.00110530, 0.00123356, 0.001038022],
    [0.00100309, 0.00104860, 0.00085054, 0.00048683],
];

// Final weights in ranking order.
const FINAL_WEIGHTS: [(usize, f64); 9] = [
    (4, 0.001374),
    (3, 0.001363),
    (1, 0.001326),
    (8, 0.001180),
    (6, 0.001108),
    (9, 0.000847),
    (5, 0.000765),
    (2, 0.000545),
    (7, 0.000332),
];

// Bid price and difference from the estimate, as printed.
const BIDS: [(usize, &str, &str); 7] = [
    (4, "141,565,965.72", "-1,468,495.12"),
    (3, "143,431,759.87", "397,299.03"),
    (1, "141,853,042.08", "-1,181,418.76"),
    (8, "136,494,671.46", "-6,539,789.38"),
    (6, "184,624,400.10", "41,589,939.26"),
    (9, "160,311,181.21", "17,276,720.37"),
    (5, "121,187,832.10", "-21,846,628.74"),
];

fn consistency_chain() -> Outcome {
    let (lambda, n) = (4.004, 4);
    let ci = consistency_index(lambda, n).map_err(|e| e.to_string())?;
    let cr = consistency_ratio(ci, 0.9);
    ensure!((ci - 0.0013333333333).abs() < 1e-10, "CI {ci}");
    ensure!((cr - 0.0014814814814).abs() < 1e-10, "CR {cr}");
    let gamma = Threshold::new(0.1).unwrap();
    let (_, dir) = identify(cr, gamma);
    ensure!(dir == Direction::Accept, "direction {dir:?}");
    let status = status_line(gamma.value(), dir);
    ensure!(status.ends_with("Status: Acceptable"), "status {status}");

    let fx = common::case_study();
    let s = fx.judgments.iter().find(|s| s.decision_maker_id == "dm-1" && s.context_id == "goal").unwrap();
    let ctx = fx.spec.hierarchy.context("goal").unwrap();
    let m = matrix_from_submission(s, &ctx.labels).map_err(|e| e.to_string())?;
    let report = evaluate_consistency(&m, gamma).map_err(|e| e.to_string())?;
    ensure!((report.lambda_max - 4.004).abs() <= 5e-4, "DM1 fixture lambda_max {}", report.lambda_max);
    ensure!(report.is_accepted(), "DM1 fixture rejected");
    Ok(format!("CI={ci} CR={cr} (tol 1e-10), Acceptable; DM1 fixture lambda_max={:.6} (tol 5e-4)", report.lambda_max))
}

fn per_dm_weights() -> Vec<WeightVector> {
    let ids: Vec<String> = (1..=9).map(contractor).collect();
    (0..4)
        .map(|dm| WeightVector { labels: ids.clone(), weights: PER_DM_WEIGHTS.iter().map(|row| row[dm]).collect() })
        .collect()
}

fn final_ranking() -> Outcome {
    let fw = final_weights(&per_dm_weights()).map_err(|e| e.to_string())?;
    let ranking = rank(&fw);
    let mut worst = 0.0f64;
    for (r, (c, expected)) in ranking.iter().zip(FINAL_WEIGHTS) {
        ensure!(r.id == contractor(c), "rank {} is {}, expected contractor {c}", r.rank, r.id);
        let err = (r.weight - expected).abs();
        ensure!(err < 5e-7, "{} final weight {} vs {expected}", r.id, r.weight);
        worst = worst.max(err);
    }
    Ok(format!("ranking C4>C3>C1>C8>C6>C9>C5>C2>C7, max |err| {worst:.3e} (tol 5e-7)"))
}

fn screening() -> Outcome {
    let final_weights_vec = WeightVector {
        labels: FINAL_WEIGHTS.iter().map(|(c, _)| contractor(*c)).collect(),
        weights: FINAL_WEIGHTS.iter().map(|(_, w)| *w).collect(),
    };
    let s = screen(&final_weights_vec).map_err(|e| e.to_string())?;
    ensure!((s.sigma - 0.000687).abs() <= 5e-7, "sigma {}", s.sigma);
    ensure!(s.qualified.len() == 7 && s.screened_out.len() == 2, "{:?}", s);
    ensure!(s.screened_out == [contractor(2), contractor(7)], "screened out {:?}", s.screened_out);

    let derived = screen(&final_weights(&per_dm_weights()).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure!((derived.sigma - 0.000687).abs() <= 5e-7, "sigma from per-DM weights {}", derived.sigma);
    ensure!(derived.qualified == s.qualified, "qualified set differs when derived from per-DM weights");
    Ok(format!("sigma={} (tol 5e-7), 7 qualified, screened out contractor-2, contractor-7", s.sigma))
}

fn bid_award() -> Outcome {
    let estimate: Money = "143,034,460.84".parse().unwrap();
    let bids: Vec<Bid> = BIDS.iter().map(|(c, p, _)| Bid::new(contractor(*c), p.parse().unwrap())).collect();
    let qualified: Vec<String> = BIDS.iter().map(|(c, _, _)| contractor(*c)).collect();
    let r = evaluate_financial(estimate, &bids, &qualified, DEFAULT_BID_SECURITY_THRESHOLD).map_err(|e| e.to_string())?;
    for (row, (c, _, diff)) in r.rows.iter().zip(BIDS) {
        let expected: Money = diff.parse().unwrap();
        ensure!(row.contractor_id == contractor(c), "row order {}", row.contractor_id);
        ensure!(row.difference == expected, "{}: {} vs {}", row.contractor_id, row.difference.minor(), expected.minor());
        ensure!(row.difference.grouped() == diff, "{} prints as {}", row.contractor_id, row.difference.grouped());
    }
    ensure!(r.winner == contractor(5), "winner {}", r.winner);
    ensure!(r.tied_with.is_empty() && !r.security_required, "unexpected tie or security requirement");
    Ok("7 differences exact in minor units, winner contractor-5, no bid security required".into())
}

fn prescreen() -> Outcome {
    let fx = common::case_study();
    let reqs = fx.spec.requirements.clone().unwrap();
    ensure!(fx.dossiers.len() == 15, "{} dossiers", fx.dossiers.len());
    let out = prescreen_mandatory(&reqs, &fx.dossiers);
    ensure!(out.qualified.len() == 9, "{} qualified", out.qualified.len());
    ensure!(out.disqualified.len() == 6, "{} disqualified", out.disqualified.len());
    ensure!(out.disqualified.iter().all(|d| !d.missing.is_empty()), "disqualified without a missing item");
    Ok("15 dossiers, 6 deficient, 9 qualified".into())
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> FuzzyComparisonMatrix {
    let choices: Vec<GradeChoice> = GradeChoice::all().collect();
    FuzzyComparisonMatrix::from_upper("random", labels(n), |_, _| choices[rng.random_range(0..choices.len())].tfn())
        .unwrap()
}

/// Dominant eigenpair by power iteration; the eigenvector sums to 1.
fn power_iteration(a: &CrispMatrix) -> (f64, Vec<f64>) {
    let n = a.dim();
    let mut v = vec![1.0 / n as f64; n];
    let mut lambda = 0.0;
    for _ in 0..10_000 {
        let mut next = vec![0.0; n];
        for (i, x) in next.iter_mut().enumerate() {
            *x = (0..n).map(|j| a.get(i, j) * v[j]).sum();
        }
        let s: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= s);
        let delta = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        lambda = s;
        v = next;
        if delta < 1e-15 {
            break;
        }
    }
    (lambda, v)
}

fn properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_fa4b);
    let gamma = Threshold::default();

    // (a) and (c)
    let mut worst_sum = 0.0f64;
    let mut worst_gap = f64::INFINITY;
    for _ in 0..1000 {
        let n = rng.random_range(2..=9);
        let m = random_matrix(&mut rng, n);
        let w = local_weights(&m).map_err(|e| e.to_string())?;
        let sum_err = (w.sum() - 1.0).abs();
        ensure!(sum_err < 1e-9, "(a) weights sum to {} at n={n}", w.sum());
        worst_sum = worst_sum.max(sum_err);
        let r = evaluate_consistency(&m, gamma).map_err(|e| e.to_string())?;
        ensure!(r.lambda_max >= n as f64 - 1e-9, "(c) lambda_max {} < n={n}", r.lambda_max);
        worst_gap = worst_gap.min(r.lambda_max - n as f64);
    }

    // (b)
    for _ in 0..500 {
        let n = rng.random_range(2..=9);
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..20.0)).collect();
        let m = FuzzyComparisonMatrix::from_upper("ratio", labels(n), |i, j| Tfn::crisp(v[i] / v[j]))
            .map_err(|e| e.to_string())?;
        let r = evaluate_consistency(&m, gamma).map_err(|e| e.to_string())?;
        ensure!(r.cr < 1e-9, "(b) CR {} on a consistent matrix", r.cr);
        ensure!((r.lambda_max - n as f64).abs() < 1e-9, "(b) lambda_max {} at n={n}", r.lambda_max);
    }

    // (d)
    let mut worst_eig = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(2..=4);
        let a = random_matrix(&mut rng, n).defuzzify();
        let (eig, v) = power_iteration(&a);
        let w = WeightVector { labels: labels(n), weights: v };
        let lm = lambda_max(&a, &w).map_err(|e| e.to_string())?;
        ensure!((lm - eig).abs() < 1e-6, "(d) formula {lm} vs power iteration {eig}");
        worst_eig = worst_eig.max((lm - eig).abs());
    }

    // (e) rows ordered componentwise give ordered weights
    let mut ordered: Vec<GradeChoice> = GradeChoice::all().collect();
    ordered.sort_by(|a, b| a.tfn().centroid().total_cmp(&b.tfn().centroid()));
    let unit = ordered.iter().position(|c| c.tfn() == Tfn::ONE).unwrap();
    for _ in 0..500 {
        let n = rng.random_range(2..=9);
        let (hi, lo) = {
            let hi = rng.random_range(0..n);
            let mut lo = rng.random_range(0..n - 1);
            if lo >= hi {
                lo += 1;
            }
            (hi, lo)
        };
        // Upper-triangle index of every cell, chosen so that row `hi`
        // dominates row `lo`.
        let mut idx = vec![vec![unit; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                idx[i][j] = rng.random_range(0..ordered.len());
            }
        }
        let flip = |k: usize| ordered.len() - 1 - k;
        let get = |idx: &Vec<Vec<usize>>, i: usize, j: usize| match i.cmp(&j) {
            std::cmp::Ordering::Less => idx[i][j],
            std::cmp::Ordering::Equal => unit,
            std::cmp::Ordering::Greater => flip(idx[j][i]),
        };
        let set = |idx: &mut Vec<Vec<usize>>, i: usize, j: usize, k: usize| {
            if i < j {
                idx[i][j] = k;
            } else {
                idx[j][i] = flip(k);
            }
        };
        let k = rng.random_range(unit..ordered.len());
        set(&mut idx, hi, lo, k);
        for j in (0..n).filter(|&j| j != hi && j != lo) {
            let low = get(&idx, lo, j);
            let k = rng.random_range(low..ordered.len());
            set(&mut idx, hi, j, k);
        }
        let m = FuzzyComparisonMatrix::from_upper("dominance", labels(n), |i, j| ordered[idx[i][j]].tfn())
            .map_err(|e| e.to_string())?;
        for j in 0..n {
            let (a, b) = (m.cell(hi, j), m.cell(lo, j));
            ensure!(a.l() >= b.l() && a.m() >= b.m() && a.u() >= b.u(), "(e) construction does not dominate");
        }
        let w = local_weights(&m).map_err(|e| e.to_string())?;
        ensure!(w.weights[hi] >= w.weights[lo], "(e) w[{hi}]={} < w[{lo}]={}", w.weights[hi], w.weights[lo]);
    }

    // (f)
    let fx = common::case_study();
    let a = run_fixture(&common::memory_service(), "p", &fx).map_err(|e| e.to_string())?;
    let b = run_fixture(&common::memory_service(), "p", &fx).map_err(|e| e.to_string())?;
    let ja = serde_json::to_string(&a).unwrap();
    let jb = serde_json::to_string(&b).unwrap();
    ensure!(ja == jb, "(f) pipeline runs differ");
    let bits = |p: &fahp_service::Project| -> Vec<u64> {
        p.technical.as_ref().unwrap().final_weights.weights.iter().map(|w| w.to_bits()).collect()
    };
    ensure!(bits(&a) == bits(&b), "(f) final weights differ bitwise");

    Ok(format!(
        "(a) max |sum-1| {worst_sum:.1e}; (b) 500 ratio matrices; (c) min lambda-n {worst_gap:.1e}; \
         (d) max |formula-power| {worst_eig:.1e}; (e) 500 dominance cases; (f) identical runs"
    ))
}

fn cyclic_goal() -> JudgmentSubmission {
    use LinguisticGrade::*;
    let e = |r: &str, c: &str, g, inv| JudgmentEntry::new(r, c, g, inv);
    JudgmentSubmission {
        decision_maker_id: "dm-2".into(),
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

fn workflow() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let svc = common::service_with(Arc::new(FileStore::open(dir.path()).map_err(|e| e.to_string())?));
    let fx = common::case_study();
    let id = "tender";
    let owner = "admin";
    let err = |e: ServiceError| e.to_string();

    svc.create_project_with_id(owner, id.into(), fx.spec.clone()).map_err(err)?;
    svc.open_prescreening(id, owner).map_err(err)?;
    for d in &fx.dossiers {
        svc.submit_dossier(id, owner, d.clone()).map_err(err)?;
    }
    svc.run_prescreen(id, owner).map_err(err)?;

    let draft = svc.submit_judgment(id, "dm:dm-2", "dm-2", cyclic_goal()).map_err(err)?;
    ensure!(draft.direction == Direction::RejectAndModify, "cyclic matrix accepted with CR {}", draft.cr);
    ensure!(!draft.advice.is_empty(), "DR.1 without hints");
    ensure!(svc.project(id).map_err(err)?.state == WorkflowState::ConsistencyReview, "not in review");

    for s in &fx.judgments {
        let dm = s.decision_maker_id.clone();
        let r = svc.submit_judgment(id, &format!("dm:{dm}"), &dm, s.clone()).map_err(err)?;
        ensure!(r.is_accepted(), "{dm}/{} rejected", s.context_id);
    }
    let p = svc.project(id).map_err(err)?;
    ensure!(p.state == WorkflowState::TechnicalRanking, "state {} after resubmission", p.state);
    let result = svc.run_technical_evaluation(id, owner).map_err(err)?;

    let mut direct: BTreeMap<String, fahp_core::DmJudgments> = BTreeMap::new();
    for s in &fx.judgments {
        let labels = p.hierarchy.context(&s.context_id).unwrap().labels;
        direct
            .entry(s.decision_maker_id.clone())
            .or_default()
            .insert(s.context_id.clone(), matrix_from_submission(s, &labels).unwrap());
    }
    ensure!(result == synthesize(&p.hierarchy, &direct).unwrap(), "draft leaked into synthesis");

    svc.open_bidding(id, owner).map_err(err)?;
    for b in &fx.bids {
        svc.submit_bid(id, owner, b.clone()).map_err(err)?;
    }
    let award = svc.run_financial_evaluation(id, owner).map_err(err)?;
    ensure!(award.winner == contractor(5), "winner {}", award.winner);

    let stored = svc.project(id).map_err(err)?;
    let log = svc.audit_log(id).map_err(err)?;
    ensure!(log.len() as u64 == stored.revision, "{} records for {} mutations", log.len(), stored.revision);
    let rebuilt = replay(&log).map_err(err)?.ok_or("empty log")?;
    ensure!(rebuilt == stored, "replayed project differs from the stored one");
    Ok(format!("DR.1 with {} hints -> DR.2, draft excluded from synthesis, {} audit records replay identically", draft.advice.len(), log.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("criteria consistency chain", consistency_chain),
        ("per-DM weights to final ranking", final_ranking),
        ("screening threshold", screening),
        ("bid differences and award", bid_award),
        ("mandatory-requirement prescreen", prescreen),
        ("property suite", properties),
        ("workflow revision loop and audit replay", workflow),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let ms = start.elapsed().as_secs_f64() * 1e3;
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail} ({ms:.1} ms)"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {name}: {why} ({ms:.1} ms)");
            }
        }
    }
    println!("{} of 7 criteria passed", 7 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
