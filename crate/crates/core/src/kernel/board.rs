use super::bitboard::Bitboard;
use super::types::{Color, Piece, PieceKind, Square};

/// Piece placement only.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct Board {
    by_color: [Bitboard; 2],
    by_kind: [Bitboard; 6],
}

impl Board {
    pub fn empty() -> Board {
        Board::default()
    }

    pub fn piece_at(&self, sq: Square) -> Option<Piece> {
        let color = if self.by_color[0].contains(sq) {
            Color::White
        } else if self.by_color[1].contains(sq) {
            Color::Black
        } else {
            return None;
        };
        let kind = PieceKind::ALL.into_iter().find(|k| self.by_kind[k.index()].contains(sq))?;
        Some(Piece { color, kind })
    }

    pub fn remove(&mut self, sq: Square) -> Option<Piece> {
        let piece = self.piece_at(sq)?;
        self.by_color[piece.color.index()] = self.by_color[piece.color.index()].without(sq);
        self.by_kind[piece.kind.index()] = self.by_kind[piece.kind.index()].without(sq);
        Some(piece)
    }

    /// Places `piece` on `sq`, replacing whatever stood there.
    pub fn put(&mut self, sq: Square, piece: Piece) {
        self.remove(sq);
        self.by_color[piece.color.index()] = self.by_color[piece.color.index()].with(sq);
        self.by_kind[piece.kind.index()] = self.by_kind[piece.kind.index()].with(sq);
    }

    #[inline]
    pub fn occupied(&self) -> Bitboard {
        self.by_color[0] | self.by_color[1]
    }

    #[inline]
    pub fn by_color(&self, color: Color) -> Bitboard {
        self.by_color[color.index()]
    }

    #[inline]
    pub fn by_kind(&self, kind: PieceKind) -> Bitboard {
        self.by_kind[kind.index()]
    }

    #[inline]
    pub fn pieces(&self, color: Color, kind: PieceKind) -> Bitboard {
        self.by_color[color.index()] & self.by_kind[kind.index()]
    }

    pub fn count(&self, color: Color, kind: PieceKind) -> u32 {
        self.pieces(color, kind).count()
    }

    pub fn king_of(&self, color: Color) -> Option<Square> {
        self.pieces(color, PieceKind::King).first()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Square, Piece)> + '_ {
        self.occupied().into_iter().filter_map(move |sq| self.piece_at(sq).map(|p| (sq, p)))
    }

    /// Left-right mirror image of the placement.
    pub fn mirrored_horizontally(&self) -> Board {
        let mut out = Board::empty();
        for (sq, p) in self.iter() {
            out.put(sq.flip_horizontal(), p);
        }
        out
    }
}
