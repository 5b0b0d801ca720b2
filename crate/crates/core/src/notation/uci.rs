//! UCI move text. Parsing is purely syntactic; mapping onto a kernel move
//! needs the position for castling.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::kernel::{CastleSide, Move, PieceKind, Position, Square, Variant};

/// A move as written in UCI text: two squares and an optional promotion.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UciMove {
    pub from: Square,
    pub to: Square,
    pub promotion: Option<PieceKind>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed UCI move {0:?}")]
pub struct UciParseError(pub String);

impl FromStr for UciMove {
    type Err = UciParseError;

    fn from_str(s: &str) -> Result<UciMove, UciParseError> {
        let err = || UciParseError(s.to_string());
        if !s.is_ascii() || !(s.len() == 4 || s.len() == 5) {
            return Err(err());
        }
        let from = Square::parse(&s[0..2]).ok_or_else(err)?;
        let to = Square::parse(&s[2..4]).ok_or_else(err)?;
        let promotion = match s.as_bytes().get(4) {
            None => None,
            Some(&c) => match PieceKind::from_char(c as char) {
                Some(k) if PieceKind::PROMOTIONS.contains(&k) && c.is_ascii_lowercase() => Some(k),
                _ => return Err(err()),
            },
        };
        Ok(UciMove { from, to, promotion })
    }
}

impl fmt::Display for UciMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.from, self.to)?;
        if let Some(p) = self.promotion {
            write!(f, "{}", p.char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for UciMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for UciMove {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for UciMove {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<UciMove, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

impl UciMove {
    /// The kernel move this text denotes in `pos`. Castling is accepted both
    /// as king-takes-rook and, outside Chess960, as the two-square king
    /// step. The result is not checked for legality.
    pub fn to_move(self, pos: &Position) -> Move {
        let us = pos.side_to_move();
        let back = us.back_rank();
        let is_king = pos.board().pieces(us, PieceKind::King).contains(self.from);
        if is_king && self.promotion.is_none() && self.from.rank() == back && self.to.rank() == back {
            if pos.castling().side_for_file(us, self.to.file()).is_some()
                && pos.board().pieces(us, PieceKind::Rook).contains(self.to)
            {
                return Move::new(self.from, self.to);
            }
            if pos.variant() != Variant::Chess960 && self.from.file() == 4 && self.from.file().abs_diff(self.to.file()) == 2 {
                let side = if self.to.file() > self.from.file() { CastleSide::King } else { CastleSide::Queen };
                if let Some(rook_file) = pos.castling().get(us, side) {
                    return Move::new(self.from, Square::from_coords(rook_file, back));
                }
            }
        }
        Move { from: self.from, to: self.to, promotion: self.promotion }
    }

    /// UCI text for a kernel move in `pos`: two-square king steps for
    /// castling in standard chess and Horde, king-takes-rook in Chess960.
    pub fn from_move(pos: &Position, m: Move) -> UciMove {
        if pos.is_castling(m) && pos.variant() != Variant::Chess960 {
            let side = if m.to.file() > m.from.file() { CastleSide::King } else { CastleSide::Queen };
            let to = Square::from_coords(side.king_target_file(), m.from.rank());
            return UciMove { from: m.from, to, promotion: None };
        }
        UciMove { from: m.from, to: m.to, promotion: m.promotion }
    }
}

/// Parses UCI text into a kernel move for `pos` (syntax only).
pub fn parse_move(pos: &Position, text: &str) -> Result<Move, UciParseError> {
    Ok(text.parse::<UciMove>()?.to_move(pos))
}

/// Parses UCI text and checks it is legal in `pos`.
pub fn parse_legal_move(pos: &Position, text: &str) -> Option<Move> {
    let m = parse_move(pos, text).ok()?;
    pos.is_legal(m).then_some(m)
}

pub fn format_move(pos: &Position, m: Move) -> String {
    UciMove::from_move(pos, m).to_string()
}
