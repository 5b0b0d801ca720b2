//! Move-quality metrics: legal move accuracy with illegal-move causes,
//! oracle top-K agreement with per-K denominators, puzzle sequence accuracy
//! and opening-move statistics.
//!
//! All counters are commutative, so reports computed on disjoint slices of a
//! dataset can be merged in any order.

mod legal;
mod openings;
mod puzzles;
mod topk;

pub use legal::{check_move, legal_accuracy, IllegalCause, LegalAccuracyReport};
pub use openings::{
    opening_bucket, opening_move_histogram, OpeningHistogram, FAILED_BUCKET, ILLEGAL_BUCKET, KNIGHT_BUCKET,
};
pub use puzzles::{
    has_mate_in_one, puzzle_sequence_accuracy, solve_puzzle, PuzzleCase, PuzzleFailure, PuzzleReport, PuzzleVerdict,
};
pub use topk::{topk_accuracy, EngineOracle, Oracle, ScriptedOracle, TopKEntry, TopKReport};

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

/// The K values reported throughout.
pub const STANDARD_KS: [usize; 4] = [1, 3, 5, 10];

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("policy failed on {failed} of {total} boards (more than 1%)")]
    TooManyTransportFailures { failed: usize, total: usize },
}

/// Transport failures are tolerated up to 1% of the boards.
pub(crate) fn check_failures(failed: usize, total: usize) -> Result<(), MetricsError> {
    if failed * 100 > total {
        Err(MetricsError::TooManyTransportFailures { failed, total })
    } else {
        Ok(())
    }
}

/// Everything measured on one dataset.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub dataset: String,
    pub policy: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub legal: Option<LegalAccuracyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub topk: Option<TopKReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub puzzles: Option<PuzzleReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub openings: Option<OpeningHistogram>,
}

fn pct(x: f64) -> String {
    format!("{:.2}", 100.0 * x)
}

/// Aligned text table with one row per report: Legal, Sf. top1/3/5/10 and
/// Puzzle seq., all in percent; `-` where not measured.
pub fn format_table(reports: &[EvalReport]) -> String {
    let header = ["Dataset", "Legal", "Sf. top1", "Sf. top3", "Sf. top5", "Sf. top10", "Puzzle seq."];
    let mut rows: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
    for r in reports {
        let mut row = vec![r.dataset.clone()];
        row.push(r.legal.as_ref().map_or("-".into(), |l| pct(l.accuracy)));
        for k in STANDARD_KS {
            let cell = r.topk.as_ref().and_then(|t| t.entry(k)).map_or("-".into(), |e| pct(e.accuracy));
            row.push(cell);
        }
        row.push(r.puzzles.as_ref().map_or("-".into(), |p| pct(p.accuracy)));
        rows.push(row);
    }
    let widths: Vec<usize> = (0..header.len()).map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for (i, row) in rows.iter().enumerate() {
        for (c, cell) in row.iter().enumerate() {
            if c == 0 {
                let _ = write!(out, "{cell:<w$}", w = widths[c]);
            } else {
                let _ = write!(out, "  {cell:>w$}", w = widths[c]);
            }
        }
        out.push('\n');
        if i == 0 {
            out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
            out.push('\n');
        }
    }
    out
}

/// Top-K denominators alongside the table, mirroring the per-K count table.
pub fn format_denominators(reports: &[EvalReport]) -> String {
    let mut out = String::from("Dataset  top1  top3  top5  top10\n");
    for r in reports {
        let Some(t) = &r.topk else { continue };
        let _ = write!(out, "{}", r.dataset);
        for k in STANDARD_KS {
            let _ = write!(out, "  {}", t.entry(k).map_or("-".into(), |e| e.eligible.to_string()));
        }
        out.push('\n');
    }
    out
}
