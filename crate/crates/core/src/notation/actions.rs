//! The fixed 1968-entry action space.
//!
//! The list holds every (from, to) pair reachable with queen or knight
//! geometry plus every pawn promotion with an explicit piece, sorted by UCI
//! text. The order is frozen in `data/actions.txt`.

use std::collections::HashMap;
use std::sync::LazyLock;

use crate::kernel::{attacks, Bitboard, Move, PieceKind, Position, Square};

use super::uci::UciMove;

pub const ACTION_COUNT: usize = 1968;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ActionError {
    #[error("{0} is not in the action space")]
    NotAnAction(UciMove),
    #[error("action index {0} out of range")]
    OutOfRange(usize),
}

struct ActionSpace {
    moves: Vec<UciMove>,
    index: HashMap<UciMove, usize>,
}

static SPACE: LazyLock<ActionSpace> = LazyLock::new(|| {
    let moves = enumerate();
    let index = moves.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    ActionSpace { moves, index }
});

fn enumerate() -> Vec<UciMove> {
    let mut moves = Vec::with_capacity(ACTION_COUNT);
    for from in Square::all() {
        let targets = attacks::queen_attacks(from, Bitboard::EMPTY) | attacks::knight_attacks(from);
        for to in targets {
            moves.push(UciMove { from, to, promotion: None });
        }
    }
    for (from_rank, to_rank) in [(6u8, 7u8), (1, 0)] {
        for file in 0..8u8 {
            let from = Square::from_coords(file, from_rank);
            for df in -1i8..=1 {
                let Some(to) = from.offset(df, to_rank as i8 - from_rank as i8) else { continue };
                for kind in PieceKind::PROMOTIONS {
                    moves.push(UciMove { from, to, promotion: Some(kind) });
                }
            }
        }
    }
    moves.sort_by_cached_key(|m| m.to_string());
    moves
}

/// All actions in index order.
pub fn all_actions() -> &'static [UciMove] {
    &SPACE.moves
}

pub fn encode(m: UciMove) -> Result<usize, ActionError> {
    SPACE.index.get(&m).copied().ok_or(ActionError::NotAnAction(m))
}

pub fn decode(index: usize) -> Result<UciMove, ActionError> {
    SPACE.moves.get(index).copied().ok_or(ActionError::OutOfRange(index))
}

/// Index of a kernel move as it would be written in UCI for `pos`.
pub fn encode_move(pos: &Position, m: Move) -> Result<usize, ActionError> {
    encode(UciMove::from_move(pos, m))
}

/// The action list as text, one UCI move per line.
pub fn actions_text() -> String {
    let mut out = String::with_capacity(ACTION_COUNT * 6);
    for m in all_actions() {
        out.push_str(&m.to_string());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_and_bijection() {
        assert_eq!(all_actions().len(), ACTION_COUNT);
        for (i, &m) in all_actions().iter().enumerate() {
            assert_eq!(encode(m), Ok(i));
            assert_eq!(decode(i), Ok(m));
        }
        assert!(decode(ACTION_COUNT).is_err());
    }

    #[test]
    fn composition() {
        let promotions = all_actions().iter().filter(|m| m.promotion.is_some()).count();
        assert_eq!(promotions, 44 * 4);
        assert!(encode("a1a1".parse().unwrap()).is_err());
        assert!(encode("e2e5q".parse().unwrap()).is_err());
    }

    #[test]
    fn matches_golden_file() {
        assert_eq!(actions_text(), include_str!("../../data/actions.txt"));
        assert_eq!(encode("e2e4".parse().unwrap()), Ok(1031));
    }

    #[test]
    fn sorted_by_text() {
        let text: Vec<String> = all_actions().iter().map(|m| m.to_string()).collect();
        assert!(text.windows(2).all(|w| w[0] < w[1]));
    }
}
