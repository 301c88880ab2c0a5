//! `fahp`: batch evaluation, matrix checks and the API server.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicI64, Ordering};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use chrono::{DateTime, TimeZone, Utc};
use clap::{Parser, Subcommand};
use fahp_core::matrix::matrix_from_submission;
use fahp_core::report::{consistency_table, financial_table, synthesis_table};
use fahp_core::synthesis::GOAL_CONTEXT;
use fahp_core::{evaluate_consistency, JudgmentSubmission, Threshold};
use fahp_service::{load_fixture, run_fixture, Config, DecisionService, Defaults, MemoryStore, Project};

const BATCH_PROJECT: &str = "batch";
const BATCH_TOKEN: &str = "batch";

#[derive(Parser)]
#[command(name = "fahp", version, about = "Fuzzy AHP group evaluation of tender bids")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a fixture directory through the full workflow and write reports.
    Evaluate {
        fixture: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Check one judgment matrix file for consistency.
    CheckConsistency {
        matrix: PathBuf,
        /// Comma-separated labels, for files that do not carry their own.
        #[arg(long, value_delimiter = ',')]
        labels: Option<Vec<String>>,
        #[arg(long, default_value_t = 0.1)]
        gamma: f64,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Print the consistency, ranking and award tables of the bundled case study.
    CaseStudy {
        #[arg(default_value = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/case-study"))]
        fixture: PathBuf,
    },
    /// Serve the HTTP API, configured from FAHP_* environment variables.
    Serve,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Cmd::Evaluate { fixture, out } => evaluate(&fixture, &out),
        Cmd::CheckConsistency { matrix, labels, gamma, json } => check_consistency(&matrix, labels, gamma, json),
        Cmd::CaseStudy { fixture } => case_study(&fixture),
        Cmd::Serve => serve(),
    }
}

/// Timestamps one second apart from a fixed origin, so batch output is
/// byte-for-byte reproducible.
fn fixed_clock() -> impl Fn() -> DateTime<Utc> + Send + Sync + 'static {
    let tick = AtomicI64::new(0);
    move || Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap() + chrono::Duration::seconds(tick.fetch_add(1, Ordering::SeqCst))
}

fn run_batch(fixture: &Path) -> Result<(DecisionService, Project)> {
    let fx = load_fixture(fixture)?;
    let svc = DecisionService::new(Arc::new(MemoryStore::new()), Defaults::default(), BATCH_TOKEN).with_clock(fixed_clock());
    let project = run_fixture(&svc, BATCH_PROJECT, &fx)?;
    Ok((svc, project))
}

fn evaluate(fixture: &Path, out: &Path) -> Result<()> {
    let (svc, project) = run_batch(fixture)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let write = |name: &str, body: String| -> Result<()> {
        let path = out.join(name);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
        Ok(())
    };

    write("project.json", serde_json::to_string_pretty(&project)? + "\n")?;
    let reports = project.judgments.values().flat_map(|m| m.values()).map(|r| &r.report);
    write("consistency.tsv", consistency_table(reports))?;
    if let Some(t) = &project.technical {
        write("ranking.tsv", synthesis_table(t))?;
    }
    if let Some(a) = &project.award {
        write("award.tsv", financial_table(a))?;
    }
    let mut log = String::new();
    for rec in svc.audit_log(BATCH_PROJECT)? {
        log.push_str(&serde_json::to_string(&rec)?);
        log.push('\n');
    }
    write("audit.jsonl", log)?;
    println!("state: {}", project.state);
    Ok(())
}

fn check_consistency(path: &Path, labels: Option<Vec<String>>, gamma: f64, json: bool) -> Result<()> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let sub: JudgmentSubmission = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let Some(labels) = labels.or_else(|| sub.labels.clone()) else {
        bail!("{} has no labels; pass --labels", path.display());
    };
    let gamma = Threshold::new(gamma)?;
    let matrix = matrix_from_submission(&sub, &labels)?;
    let mut report = evaluate_consistency(&matrix, gamma)?;
    if !sub.decision_maker_id.is_empty() {
        report = report.with_decision_maker(sub.decision_maker_id.as_str());
    }
    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{report}");
    }
    Ok(())
}

fn case_study(fixture: &Path) -> Result<()> {
    let (_, p) = run_batch(fixture)?;
    let first_dm = p.hierarchy.decision_makers.first().map(|d| d.id.clone()).unwrap_or_default();

    println!("== Consistency of {first_dm}, criteria level ==");
    match p.judgment(&first_dm, GOAL_CONTEXT) {
        Some(rec) => print!("{}", rec.report),
        None => println!("(no judgment)"),
    }

    if let Some(pre) = &p.prescreen {
        println!();
        println!("== Prescreening ==");
        println!("qualified: {}", pre.qualified.join(", "));
        for d in &pre.disqualified {
            println!("disqualified: {} (missing {})", d.contractor_id, d.missing.join(", "));
        }
    }

    if let Some(t) = &p.technical {
        println!();
        println!("== Technical ranking ==");
        println!("rank\tcontractor\tweight");
        for r in &t.ranking {
            println!("{}\t{}\t{:.6}", r.rank, r.id, r.weight);
        }
        println!("sigma\t{:.6}", t.sigma());
        println!("screened out: {}", t.screening.screened_out.join(", "));
    }

    if let Some(a) = &p.award {
        println!();
        println!("== Financial evaluation ==");
        print!("{}", financial_table(a));
    }
    Ok(())
}

fn serve() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .init();
    let config = Config::from_env()?;
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(fahp_service::serve(config)).map_err(|e| anyhow::anyhow!(e))
}
