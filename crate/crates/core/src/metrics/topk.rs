use log::warn;
use serde::{Deserialize, Serialize};

use super::legal::check_move;
use super::{check_failures, MetricsError};
use crate::engine::{Engine, EngineError, SearchLimit};
use crate::kernel::{Move, Position};
use crate::policy::Policy;

/// Source of reference move lists. Each call is one independent query.
pub trait Oracle {
    fn top_k(&mut self, pos: &Position, k: usize) -> Result<Vec<Move>, EngineError>;
}

/// A UCI engine at a fixed limit.
pub struct EngineOracle {
    pub engine: Engine,
    pub limit: SearchLimit,
}

impl Oracle for EngineOracle {
    fn top_k(&mut self, pos: &Position, k: usize) -> Result<Vec<Move>, EngineError> {
        self.engine.top_k_moves(pos, k, self.limit)
    }
}

type OracleScript = Box<dyn FnMut(&Position, usize) -> Result<Vec<Move>, EngineError> + Send>;

/// Answers from a closure; for fixtures.
pub struct ScriptedOracle(OracleScript);

impl ScriptedOracle {
    pub fn new(script: impl FnMut(&Position, usize) -> Result<Vec<Move>, EngineError> + Send + 'static) -> Self {
        ScriptedOracle(Box::new(script))
    }
}

impl Oracle for ScriptedOracle {
    fn top_k(&mut self, pos: &Position, k: usize) -> Result<Vec<Move>, EngineError> {
        (self.0)(pos, k)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopKEntry {
    pub k: usize,
    pub matched: usize,
    /// Boards with at least `k` legal moves that were actually scored.
    pub eligible: usize,
    /// `matched / eligible`, or 0 when nothing was eligible.
    pub accuracy: f64,
    /// Eligible boards dropped because the oracle failed.
    pub oracle_failures: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TopKReport {
    pub entries: Vec<TopKEntry>,
    pub transport_failures: usize,
}

impl TopKReport {
    pub fn entry(&self, k: usize) -> Option<&TopKEntry> {
        self.entries.iter().find(|e| e.k == k)
    }

    pub fn merge(&mut self, other: &TopKReport) {
        self.transport_failures += other.transport_failures;
        for o in &other.entries {
            match self.entries.iter_mut().find(|e| e.k == o.k) {
                Some(e) => {
                    e.matched += o.matched;
                    e.eligible += o.eligible;
                    e.oracle_failures += o.oracle_failures;
                    e.accuracy = ratio(e.matched, e.eligible);
                }
                None => self.entries.push(o.clone()),
            }
        }
        self.entries.sort_by_key(|e| e.k);
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Scores the policy's move on each board against a separate oracle query
/// for every `k`. A board takes part in the `k` column only when it has at
/// least `k` legal moves; an illegal policy move counts as a miss.
pub fn topk_accuracy(
    policy: &mut dyn Policy,
    boards: &[Position],
    ks: &[usize],
    oracle: &mut dyn Oracle,
) -> Result<TopKReport, MetricsError> {
    let mut entries: Vec<TopKEntry> =
        ks.iter().map(|&k| TopKEntry { k, matched: 0, eligible: 0, accuracy: 0.0, oracle_failures: 0 }).collect();
    let mut transport_failures = 0;
    for pos in boards {
        let legal = pos.legal_moves().len();
        if legal == 0 {
            continue;
        }
        let chosen = match policy.choose(pos) {
            Ok(v) => check_move(pos, &v.text).ok(),
            Err(e) => {
                warn!("policy {} failed on a board: {e}", policy.name());
                transport_failures += 1;
                continue;
            }
        };
        for entry in entries.iter_mut().filter(|e| legal >= e.k) {
            match oracle.top_k(pos, entry.k) {
                Ok(list) => {
                    entry.eligible += 1;
                    if chosen.is_some_and(|m| list.contains(&m)) {
                        entry.matched += 1;
                    }
                }
                Err(e) => {
                    warn!("oracle failed for k={}: {e}; board skipped", entry.k);
                    entry.oracle_failures += 1;
                }
            }
        }
    }
    for e in &mut entries {
        e.accuracy = ratio(e.matched, e.eligible);
    }
    check_failures(transport_failures, boards.len())?;
    Ok(TopKReport { entries, transport_failures })
}
