use std::collections::BTreeMap;

use log::warn;
use serde::{Deserialize, Serialize};

use super::{check_failures, MetricsError};
use crate::kernel::{attacks, Move, PieceKind, Position};
use crate::notation::uci::UciMove;
use crate::policy::Policy;

/// Why a proposed move is not legal. Causes are tested in declaration order
/// and the first that applies is reported.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IllegalCause {
    /// Not UCI move text at all.
    MalformedMove,
    /// The origin square holds no piece of the side to move.
    NoSuchPiece,
    /// The piece cannot make that move even ignoring king safety: wrong
    /// shape, blocked path, bad promotion, unavailable castling.
    PieceGeometry,
    /// A pinned piece leaves its pin line.
    PinViolation,
    /// Any other move that leaves the mover's king attacked: walking into
    /// check, or not answering a check.
    OtherKingExposure,
}

impl IllegalCause {
    pub const ALL: [IllegalCause; 5] = [
        IllegalCause::MalformedMove,
        IllegalCause::NoSuchPiece,
        IllegalCause::PieceGeometry,
        IllegalCause::PinViolation,
        IllegalCause::OtherKingExposure,
    ];
}

/// The kernel move for `text`, or the reason it is illegal in `pos`.
pub fn check_move(pos: &Position, text: &str) -> Result<Move, IllegalCause> {
    let uci: UciMove = text.trim().parse().map_err(|_| IllegalCause::MalformedMove)?;
    let m = uci.to_move(pos);
    match pos.piece_at(m.from) {
        Some(p) if p.color == pos.side_to_move() => {}
        _ => return Err(IllegalCause::NoSuchPiece),
    }
    if pos.is_legal(m) {
        return Ok(m);
    }
    if !pos.pseudo_legal_moves().contains(&m) {
        return Err(IllegalCause::PieceGeometry);
    }
    let is_king = pos.piece_at(m.from).is_some_and(|p| p.kind == PieceKind::King);
    if !is_king && pos.pinned_pieces().contains(m.from) {
        if let Some(king) = pos.board().king_of(pos.side_to_move()) {
            if !attacks::line(king, m.from).contains(m.to) {
                return Err(IllegalCause::PinViolation);
            }
        }
    }
    Err(IllegalCause::OtherKingExposure)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LegalAccuracyReport {
    pub total: usize,
    pub legal: usize,
    pub accuracy: f64,
    pub illegal_causes: BTreeMap<IllegalCause, usize>,
    /// Boards where the policy could not be queried; not in `total`.
    pub transport_failures: usize,
}

impl LegalAccuracyReport {
    pub fn record(&mut self, verdict: Result<(), IllegalCause>) {
        self.total += 1;
        match verdict {
            Ok(()) => self.legal += 1,
            Err(c) => *self.illegal_causes.entry(c).or_default() += 1,
        }
        self.refresh();
    }

    /// Combines reports over disjoint board sets.
    pub fn merge(&mut self, other: &LegalAccuracyReport) {
        self.total += other.total;
        self.legal += other.legal;
        self.transport_failures += other.transport_failures;
        for (&c, &n) in &other.illegal_causes {
            *self.illegal_causes.entry(c).or_default() += n;
        }
        self.refresh();
    }

    fn refresh(&mut self) {
        self.accuracy = if self.total == 0 { 0.0 } else { self.legal as f64 / self.total as f64 };
    }
}

/// Asks the policy once per board and classifies every answer.
pub fn legal_accuracy(policy: &mut dyn Policy, boards: &[Position]) -> Result<LegalAccuracyReport, MetricsError> {
    let mut report = LegalAccuracyReport::default();
    for pos in boards {
        match policy.choose(pos) {
            Ok(v) => report.record(check_move(pos, &v.text).map(|_| ())),
            Err(e) => {
                warn!("policy {} failed on a board: {e}", policy.name());
                report.transport_failures += 1;
            }
        }
    }
    check_failures(report.transport_failures, boards.len())?;
    Ok(report)
}
