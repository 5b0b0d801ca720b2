use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::legal::check_move;
use super::MetricsError;
use crate::kernel::{PieceKind, Position};
use crate::notation::uci::format_move;
use crate::policy::Policy;

/// Bucket for all first moves made by a knight.
pub const KNIGHT_BUCKET: &str = "knight";
pub const ILLEGAL_BUCKET: &str = "illegal";
pub const FAILED_BUCKET: &str = "failed";

/// First-move counts over a set of starting boards. Pawn moves are keyed
/// by UCI text; knight moves share one bucket.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpeningHistogram {
    pub counts: BTreeMap<String, usize>,
    pub total: usize,
}

impl OpeningHistogram {
    pub fn record(&mut self, bucket: &str) {
        *self.counts.entry(bucket.to_string()).or_default() += 1;
        self.total += 1;
    }

    /// Buckets by descending count, ties by name.
    pub fn ranked(&self) -> Vec<(&str, usize)> {
        let mut v: Vec<(&str, usize)> = self.counts.iter().map(|(k, &n)| (k.as_str(), n)).collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        v
    }

    /// Share of boards covered by the `n` most frequent buckets.
    pub fn top_share(&self, n: usize) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.ranked().iter().take(n).map(|(_, c)| c).sum::<usize>() as f64 / self.total as f64
    }

    /// Like [`top_share`](Self::top_share) but ranking only concrete moves:
    /// the knight, illegal and failed buckets still count in the
    /// denominator but are never among the top `n`.
    pub fn top_moves_share(&self, n: usize) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let special = [KNIGHT_BUCKET, ILLEGAL_BUCKET, FAILED_BUCKET];
        let covered: usize =
            self.ranked().iter().filter(|(k, _)| !special.contains(k)).take(n).map(|(_, c)| c).sum();
        covered as f64 / self.total as f64
    }
}

/// Bucket name for a move text on `pos`.
pub fn opening_bucket(pos: &Position, text: &str) -> String {
    match check_move(pos, text) {
        Ok(m) if pos.piece_at(m.from).is_some_and(|p| p.kind == PieceKind::Knight) => KNIGHT_BUCKET.to_string(),
        Ok(m) => format_move(pos, m),
        Err(_) => ILLEGAL_BUCKET.to_string(),
    }
}

pub fn opening_move_histogram(policy: &mut dyn Policy, boards: &[Position]) -> Result<OpeningHistogram, MetricsError> {
    let mut h = OpeningHistogram::default();
    let mut failures = 0;
    for pos in boards {
        match policy.choose(pos) {
            Ok(v) => h.record(&opening_bucket(pos, &v.text)),
            Err(_) => {
                failures += 1;
                h.record(FAILED_BUCKET);
            }
        }
    }
    super::check_failures(failures, boards.len())?;
    Ok(h)
}
