//! Plain tab-separated exports of evaluation results.

use std::fmt::Write;

use crate::consistency::ConsistencyReport;
use crate::financial::FinancialResult;
use crate::synthesis::SynthesisResult;

/// One row per alternative in ranking order: id, each decision maker's
/// global weight, final weight, rank, qualified flag.
pub fn synthesis_table(r: &SynthesisResult) -> String {
    let mut out = String::from("alternative");
    for d in &r.decision_makers {
        write!(out, "\t{}", d.decision_maker_id).unwrap();
    }
    out.push_str("\tfinal_weight\trank\tqualified\n");
    for row in &r.ranking {
        out.push_str(&row.id);
        for d in &r.decision_makers {
            let w = d.alternatives_global.get(&row.id).unwrap_or(f64::NAN);
            write!(out, "\t{w}").unwrap();
        }
        writeln!(out, "\t{}\t{}\t{}", row.weight, row.rank, r.screening.is_qualified(&row.id)).unwrap();
    }
    writeln!(out, "sigma\t{}", r.screening.sigma).unwrap();
    out
}

/// One row per bidder (id, bid, difference), then the estimate and the winner.
pub fn financial_table(r: &FinancialResult) -> String {
    let mut out = String::from("contractor\tbid\tdifference\n");
    for row in &r.rows {
        writeln!(out, "{}\t{}\t{}", row.contractor_id, row.bid.grouped(), row.difference.grouped()).unwrap();
    }
    writeln!(out, "estimate\t{}", r.estimate.grouped()).unwrap();
    writeln!(out, "winner\t{}\t{}", r.winner, r.winning_row().bid.grouped()).unwrap();
    if !r.tied_with.is_empty() {
        writeln!(out, "tied\t{}", r.tied_with.join(",")).unwrap();
    }
    out
}

/// One row per evaluated matrix.
pub fn consistency_table<'a>(reports: impl IntoIterator<Item = &'a ConsistencyReport>) -> String {
    let mut out = String::from("decision_maker\tcontext\tn\tlambda_max\tci\tri\tcr\tgamma\tdirection\n");
    for r in reports {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.decision_maker_id.as_deref().unwrap_or("-"),
            r.context_id,
            r.dimension,
            r.lambda_max,
            r.ci,
            r.ri,
            r.cr,
            r.gamma,
            r.direction.code()
        )
        .unwrap();
    }
    out
}
