use serde::{Deserialize, Serialize};

use super::bitboard::Bitboard;
use super::position::Position;
use super::types::{Color, PieceKind, Variant};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameStatus {
    Ongoing,
    WhiteWins,
    BlackWins,
    Draw,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Checkmate,
    Stalemate,
    Threefold,
    FiftyMove,
    InsufficientMaterial,
    HordeAllCaptured,
    Resignation,
    Adjudicated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GameOutcome {
    pub status: GameStatus,
    pub reason: Option<Termination>,
}

impl GameOutcome {
    pub const ONGOING: GameOutcome = GameOutcome { status: GameStatus::Ongoing, reason: None };

    pub fn win(winner: Color, reason: Termination) -> GameOutcome {
        let status = match winner {
            Color::White => GameStatus::WhiteWins,
            Color::Black => GameStatus::BlackWins,
        };
        GameOutcome { status, reason: Some(reason) }
    }

    pub fn draw(reason: Termination) -> GameOutcome {
        GameOutcome { status: GameStatus::Draw, reason: Some(reason) }
    }

    pub fn is_over(&self) -> bool {
        self.status != GameStatus::Ongoing
    }

    pub fn winner(&self) -> Option<Color> {
        match self.status {
            GameStatus::WhiteWins => Some(Color::White),
            GameStatus::BlackWins => Some(Color::Black),
            _ => None,
        }
    }

    /// PGN result token.
    pub fn result_str(&self) -> &'static str {
        match self.status {
            GameStatus::Ongoing => "*",
            GameStatus::WhiteWins => "1-0",
            GameStatus::BlackWins => "0-1",
            GameStatus::Draw => "1/2-1/2",
        }
    }

    /// Points scored by `color`.
    pub fn score_for(&self, color: Color) -> f64 {
        match (self.status, color) {
            (GameStatus::Draw, _) => 0.5,
            (GameStatus::WhiteWins, Color::White) | (GameStatus::BlackWins, Color::Black) => 1.0,
            _ => 0.0,
        }
    }
}

impl Position {
    /// Terminal-state detection, in precedence order: Horde wipe-out,
    /// checkmate/stalemate, threefold repetition, fifty-move rule,
    /// insufficient material.
    pub fn outcome(&self) -> GameOutcome {
        let b = self.board();
        if self.variant() == Variant::Horde && b.by_color(Color::White).is_empty() {
            return GameOutcome::win(Color::Black, Termination::HordeAllCaptured);
        }
        if self.legal_moves().is_empty() {
            return if self.is_check() {
                GameOutcome::win(!self.side_to_move(), Termination::Checkmate)
            } else {
                GameOutcome::draw(Termination::Stalemate)
            };
        }
        if self.repetition_count() >= 3 {
            return GameOutcome::draw(Termination::Threefold);
        }
        if self.halfmove_clock() >= 100 {
            return GameOutcome::draw(Termination::FiftyMove);
        }
        if self.variant() != Variant::Horde && insufficient_material(self) {
            return GameOutcome::draw(Termination::InsufficientMaterial);
        }
        GameOutcome::ONGOING
    }

    pub fn is_checkmate(&self) -> bool {
        self.is_check() && self.legal_moves().is_empty()
    }
}

/// K vs K, K+minor vs K, and K+B vs K+B with bishops on same-colored squares.
fn insufficient_material(pos: &Position) -> bool {
    let b = pos.board();
    let heavy = b.by_kind(PieceKind::Pawn) | b.by_kind(PieceKind::Rook) | b.by_kind(PieceKind::Queen);
    if heavy.any() {
        return false;
    }
    let minors = |c: Color| b.pieces(c, PieceKind::Knight) | b.pieces(c, PieceKind::Bishop);
    let (w, bl) = (minors(Color::White), minors(Color::Black));
    match (w.count(), bl.count()) {
        (0, 0) | (1, 0) | (0, 1) => true,
        (1, 1) => {
            let bishops = b.by_kind(PieceKind::Bishop);
            if (w | bl) != bishops {
                return false;
            }
            (bishops & Bitboard::LIGHT_SQUARES).count() == 2 || (bishops & Bitboard::DARK_SQUARES).count() == 2
        }
        _ => false,
    }
}
