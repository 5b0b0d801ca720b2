use serde::{Deserialize, Serialize};

use crate::kernel::{Bitboard, Color, PieceKind, Position};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OodFlag {
    /// More queens, rooks, bishops or knights than the initial army has.
    MorePieces,
    /// Two or more bishops of one color on squares of the same color.
    SameColorBishops,
}

/// Set of [`OodFlag`]s; serialized as a sorted list.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<OodFlag>", into = "Vec<OodFlag>")]
pub struct OodFlags {
    pub more_pieces: bool,
    pub same_color_bishops: bool,
}

impl OodFlags {
    pub const NONE: OodFlags = OodFlags { more_pieces: false, same_color_bishops: false };

    pub fn is_empty(&self) -> bool {
        !self.more_pieces && !self.same_color_bishops
    }

    pub fn contains(&self, flag: OodFlag) -> bool {
        match flag {
            OodFlag::MorePieces => self.more_pieces,
            OodFlag::SameColorBishops => self.same_color_bishops,
        }
    }

    /// The flag a board is filed under when datasets are split by flag:
    /// MorePieces wins when both are set.
    pub fn primary(&self) -> Option<OodFlag> {
        self.iter().next()
    }

    pub fn iter(&self) -> impl Iterator<Item = OodFlag> + '_ {
        [OodFlag::MorePieces, OodFlag::SameColorBishops].into_iter().filter(|&f| self.contains(f))
    }
}

impl From<Vec<OodFlag>> for OodFlags {
    fn from(list: Vec<OodFlag>) -> OodFlags {
        OodFlags {
            more_pieces: list.contains(&OodFlag::MorePieces),
            same_color_bishops: list.contains(&OodFlag::SameColorBishops),
        }
    }
}

impl From<OodFlags> for Vec<OodFlag> {
    fn from(flags: OodFlags) -> Vec<OodFlag> {
        flags.iter().collect()
    }
}

/// Flags a position by piece counts and bishop square colors. Pawn counts
/// are ignored: more than eight pawns cannot arise in play.
pub fn classify(pos: &Position) -> OodFlags {
    let b = pos.board();
    let mut flags = OodFlags::NONE;
    for color in Color::ALL {
        let n = |k: PieceKind| b.count(color, k);
        if n(PieceKind::Queen) > 1 || n(PieceKind::Rook) > 2 || n(PieceKind::Bishop) > 2 || n(PieceKind::Knight) > 2 {
            flags.more_pieces = true;
        }
        let bishops = b.pieces(color, PieceKind::Bishop);
        if (bishops & Bitboard::LIGHT_SQUARES).count() >= 2 || (bishops & Bitboard::DARK_SQUARES).count() >= 2 {
            flags.same_color_bishops = true;
        }
    }
    flags
}
