//! Rules kernel for standard chess, Chess960 and Horde.
//!
//! Positions are plain values: every transition returns a new [`Position`]
//! and leaves the receiver untouched, so they can be shared across threads
//! freely.

pub mod attacks;
mod bitboard;
mod board;
mod movegen;
mod outcome;
mod position;
mod types;

pub use bitboard::{Bitboard, SquareIter};
pub use board::Board;
pub use outcome::{GameOutcome, GameStatus, Termination};
pub use position::{CastleSide, CastlingRights, IllegalMove, Move, Position, PositionError, RepetitionKey, Setup};
pub use types::{Color, Piece, PieceKind, Square, UnknownVariant, Variant};
