use std::fmt;


use super::attacks;
use super::bitboard::Bitboard;
use super::board::Board;
use super::types::{Color, Piece, PieceKind, Square, Variant};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CastleSide {
    /// Toward the h-file.
    King,
    /// Toward the a-file.
    Queen,
}

impl CastleSide {
    /// File the king lands on.
    pub const fn king_target_file(self) -> u8 {
        match self {
            CastleSide::King => 6,
            CastleSide::Queen => 2,
        }
    }

    /// File the rook lands on.
    pub const fn rook_target_file(self) -> u8 {
        match self {
            CastleSide::King => 5,
            CastleSide::Queen => 3,
        }
    }
}

/// Castling rights stored as the file of the castling rook, per color and
/// side. This covers both standard chess and Chess960.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct CastlingRights {
    rook_files: [[Option<u8>; 2]; 2],
}

impl CastlingRights {
    pub const fn none() -> CastlingRights {
        CastlingRights { rook_files: [[None; 2]; 2] }
    }

    pub const fn standard() -> CastlingRights {
        CastlingRights { rook_files: [[Some(7), Some(0)], [Some(7), Some(0)]] }
    }

    #[inline]
    pub fn get(&self, color: Color, side: CastleSide) -> Option<u8> {
        self.rook_files[color.index()][side as usize]
    }

    pub fn set(&mut self, color: Color, side: CastleSide, rook_file: Option<u8>) {
        self.rook_files[color.index()][side as usize] = rook_file;
    }

    pub fn is_empty(&self) -> bool {
        self.rook_files.iter().flatten().all(Option::is_none)
    }

    pub fn clear_color(&mut self, color: Color) {
        self.rook_files[color.index()] = [None, None];
    }

    /// Drops any right that uses the rook on `file` for `color`.
    pub fn remove_rook_file(&mut self, color: Color, file: u8) {
        for slot in self.rook_files[color.index()].iter_mut() {
            if *slot == Some(file) {
                *slot = None;
            }
        }
    }

    pub fn side_for_file(&self, color: Color, file: u8) -> Option<CastleSide> {
        [CastleSide::King, CastleSide::Queen].into_iter().find(|&s| self.get(color, s) == Some(file))
    }
}

/// A move in from/to/promotion form. Castling is stored as the king moving
/// onto its own castling rook, which is unambiguous in every variant.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Move {
    pub from: Square,
    pub to: Square,
    pub promotion: Option<PieceKind>,
}

impl Move {
    pub const fn new(from: Square, to: Square) -> Move {
        Move { from, to, promotion: None }
    }

    pub const fn with_promotion(from: Square, to: Square, kind: PieceKind) -> Move {
        Move { from, to, promotion: Some(kind) }
    }
}

impl fmt::Debug for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.from, self.to)?;
        if let Some(p) = self.promotion {
            write!(f, "{}", p.char())?;
        }
        Ok(())
    }
}

/// Structural problems that make a position invalid.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PositionError {
    #[error("{0:?} has no king")]
    MissingKing(Color),
    #[error("{0:?} has more than one king")]
    TooManyKings(Color),
    #[error("{0:?} may not have a king in this variant")]
    UnexpectedKing(Color),
    #[error("pawn on back rank at {0}")]
    PawnOnBackRank(Square),
    #[error("castling rights for {0:?} do not match the king and rook placement")]
    InvalidCastling(Color),
    #[error("en passant square {0} is inconsistent with the placement")]
    InvalidEnPassant(Square),
    #[error("the side not to move is in check")]
    OppositeCheck,
    #[error("fullmove number must be at least 1")]
    InvalidFullmove,
}

/// Raw position data without any validation or game history.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Setup {
    pub board: Board,
    pub turn: Color,
    pub castling: CastlingRights,
    pub ep_square: Option<Square>,
    pub halfmove_clock: u32,
    pub fullmove_number: u32,
    pub variant: Variant,
}

/// Position identity for repetition: placement, side to move, castling
/// rights and whether an en passant capture is actually available.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RepetitionKey {
    board: Board,
    turn: Color,
    castling: CastlingRights,
    ep: Option<Square>,
}

/// Validated game state plus the repetition log of the game it belongs to.
#[derive(Clone, Debug)]
pub struct Position {
    setup: Setup,
    history: Vec<RepetitionKey>,
}

/// Two positions are equal when every FEN-visible field agrees. The
/// repetition log is game context and is not compared.
impl PartialEq for Position {
    fn eq(&self, other: &Position) -> bool {
        self.setup == other.setup
    }
}

impl Eq for Position {}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("illegal move {mv:?}")]
pub struct IllegalMove {
    pub mv: Move,
}

impl Position {
    /// The classical starting position.
    pub fn standard() -> Position {
        let back = [
            PieceKind::Rook,
            PieceKind::Knight,
            PieceKind::Bishop,
            PieceKind::Queen,
            PieceKind::King,
            PieceKind::Bishop,
            PieceKind::Knight,
            PieceKind::Rook,
        ];
        let mut pos = Position::from_back_rank(back, Variant::Standard);
        pos.setup.castling = CastlingRights::standard();
        pos.reset_history();
        pos
    }

    /// The Horde starting position (36 white pawns against a full black army).
    pub fn horde() -> Position {
        let mut board = Board::empty();
        let back = [
            PieceKind::Rook,
            PieceKind::Knight,
            PieceKind::Bishop,
            PieceKind::Queen,
            PieceKind::King,
            PieceKind::Bishop,
            PieceKind::Knight,
            PieceKind::Rook,
        ];
        for file in 0..8u8 {
            board.put(Square::from_coords(file, 7), Piece::new(Color::Black, back[file as usize]));
            board.put(Square::from_coords(file, 6), Piece::new(Color::Black, PieceKind::Pawn));
            for rank in 0..4 {
                board.put(Square::from_coords(file, rank), Piece::new(Color::White, PieceKind::Pawn));
            }
        }
        for file in [1u8, 2, 5, 6] {
            board.put(Square::from_coords(file, 4), Piece::new(Color::White, PieceKind::Pawn));
        }
        let mut castling = CastlingRights::none();
        castling.set(Color::Black, CastleSide::King, Some(7));
        castling.set(Color::Black, CastleSide::Queen, Some(0));
        let setup = Setup {
            board,
            turn: Color::White,
            castling,
            ep_square: None,
            halfmove_clock: 0,
            fullmove_number: 1,
            variant: Variant::Horde,
        };
        Position::from_setup(setup).expect("horde start is valid")
    }

    pub fn startpos(variant: Variant) -> Position {
        match variant {
            Variant::Standard => Position::standard(),
            Variant::Chess960 => {
                let mut p = Position::standard();
                p.setup.variant = Variant::Chess960;
                p.reset_history();
                p
            }
            Variant::Horde => Position::horde(),
        }
    }

    /// A starting position whose white back rank is `back` (files a..h),
    /// mirrored for Black, with pawns on their usual ranks. Castling rights
    /// are granted on both sides when the king stands between the two rooks,
    /// and not at all otherwise.
    ///
    /// # Panics
    /// If `back` does not contain exactly one king.
    pub fn from_back_rank(back: [PieceKind; 8], variant: Variant) -> Position {
        let mut board = Board::empty();
        for (file, &kind) in back.iter().enumerate() {
            let file = file as u8;
            board.put(Square::from_coords(file, 0), Piece::new(Color::White, kind));
            board.put(Square::from_coords(file, 1), Piece::new(Color::White, PieceKind::Pawn));
            board.put(Square::from_coords(file, 6), Piece::new(Color::Black, PieceKind::Pawn));
            board.put(Square::from_coords(file, 7), Piece::new(Color::Black, kind));
        }
        let king = back.iter().position(|&k| k == PieceKind::King).expect("back rank has a king") as u8;
        let rooks: Vec<u8> = (0..8u8).filter(|&f| back[f as usize] == PieceKind::Rook).collect();
        let mut castling = CastlingRights::none();
        let west = rooks.iter().copied().filter(|&f| f < king).collect::<Vec<_>>();
        let east = rooks.iter().copied().filter(|&f| f > king).collect::<Vec<_>>();
        if west.len() == 1 && east.len() == 1 {
            for color in Color::ALL {
                castling.set(color, CastleSide::Queen, Some(west[0]));
                castling.set(color, CastleSide::King, Some(east[0]));
            }
        }
        let setup = Setup {
            board,
            turn: Color::White,
            castling,
            ep_square: None,
            halfmove_clock: 0,
            fullmove_number: 1,
            variant,
        };
        Position::from_setup(setup).expect("back-rank start is valid")
    }

    /// Validates `setup` and starts a fresh repetition log containing it.
    pub fn from_setup(setup: Setup) -> Result<Position, PositionError> {
        validate(&setup)?;
        let mut pos = Position { setup, history: Vec::new() };
        pos.reset_history();
        Ok(pos)
    }

    fn reset_history(&mut self) {
        self.history = vec![self.repetition_key()];
    }

    #[inline]
    pub fn setup(&self) -> &Setup {
        &self.setup
    }

    #[inline]
    pub fn board(&self) -> &Board {
        &self.setup.board
    }

    pub fn piece_at(&self, sq: Square) -> Option<Piece> {
        self.setup.board.piece_at(sq)
    }

    #[inline]
    pub fn side_to_move(&self) -> Color {
        self.setup.turn
    }

    #[inline]
    pub fn castling(&self) -> &CastlingRights {
        &self.setup.castling
    }

    #[inline]
    pub fn en_passant(&self) -> Option<Square> {
        self.setup.ep_square
    }

    #[inline]
    pub fn halfmove_clock(&self) -> u32 {
        self.setup.halfmove_clock
    }

    #[inline]
    pub fn fullmove_number(&self) -> u32 {
        self.setup.fullmove_number
    }

    #[inline]
    pub fn variant(&self) -> Variant {
        self.setup.variant
    }

    pub fn repetition_log(&self) -> &[RepetitionKey] {
        &self.history
    }

    /// How many times the current position has occurred in this game.
    pub fn repetition_count(&self) -> usize {
        let key = self.repetition_key();
        self.history.iter().filter(|&&k| k == key).count()
    }

    pub fn repetition_key(&self) -> RepetitionKey {
        let s = &self.setup;
        let ep = s.ep_square.filter(|_| s.has_legal_ep_capture());
        RepetitionKey { board: s.board, turn: s.turn, castling: s.castling, ep }
    }

    pub fn is_check(&self) -> bool {
        self.setup.in_check(self.setup.turn)
    }

    pub fn legal_moves(&self) -> Vec<Move> {
        self.setup.legal_moves()
    }

    /// Moves that obey piece geometry and occupancy but may leave the own
    /// king in check. Castling is included only when the king neither
    /// starts, passes through nor lands on an attacked square.
    pub fn pseudo_legal_moves(&self) -> Vec<Move> {
        let mut out = Vec::with_capacity(64);
        self.setup.pseudo_legal_moves(&mut out);
        out
    }

    pub fn is_legal(&self, m: Move) -> bool {
        self.legal_moves().contains(&m)
    }

    pub fn is_castling(&self, m: Move) -> bool {
        self.setup.is_castling(m)
    }

    pub fn is_capture(&self, m: Move) -> bool {
        if self.is_castling(m) {
            return false;
        }
        self.setup.board.piece_at(m.to).is_some()
            || (self.setup.board.pieces(self.setup.turn, PieceKind::Pawn).contains(m.from)
                && Some(m.to) == self.setup.ep_square)
    }

    /// Successor position. The receiver is left untouched.
    pub fn apply_move(&self, m: Move) -> Result<Position, IllegalMove> {
        if !self.is_legal(m) {
            return Err(IllegalMove { mv: m });
        }
        Ok(self.apply_unchecked(m))
    }

    /// Successor position without a legality check. `m` must be legal.
    pub fn apply_unchecked(&self, m: Move) -> Position {
        let mut setup = self.setup;
        setup.play(m);
        let mut history = Vec::with_capacity(self.history.len() + 1);
        history.extend_from_slice(&self.history);
        let mut next = Position { setup, history };
        let key = next.repetition_key();
        next.history.push(key);
        next
    }

    /// Squares of side-to-move pieces (kings excluded) with at least one
    /// pseudo-legal move that is rejected only because it uncovers an attack
    /// on their own king.
    pub fn pinned_pieces(&self) -> Bitboard {
        self.setup.pinned_pieces()
    }

    /// Number of leaf nodes of the legal move tree at exactly `depth` plies.
    pub fn perft(&self, depth: u32) -> u64 {
        self.setup.perft(depth)
    }
}

fn validate(s: &Setup) -> Result<(), PositionError> {
    let b = &s.board;
    if s.fullmove_number == 0 {
        return Err(PositionError::InvalidFullmove);
    }
    for color in Color::ALL {
        let kings = b.count(color, PieceKind::King);
        let kingless = s.variant == Variant::Horde && color == Color::White;
        if kingless {
            if kings > 0 {
                return Err(PositionError::UnexpectedKing(color));
            }
        } else if kings == 0 {
            return Err(PositionError::MissingKing(color));
        } else if kings > 1 {
            return Err(PositionError::TooManyKings(color));
        }
    }
    for sq in b.by_kind(PieceKind::Pawn) {
        let color = b.piece_at(sq).map(|p| p.color).unwrap_or(Color::White);
        let horde_first_rank = s.variant == Variant::Horde && color == Color::White && sq.rank() == 0;
        if (sq.rank() == 0 || sq.rank() == 7) && !horde_first_rank {
            return Err(PositionError::PawnOnBackRank(sq));
        }
    }
    for color in Color::ALL {
        validate_castling(s, color)?;
    }
    if let Some(ep) = s.ep_square {
        // After a double push by the side not to move.
        let (ep_rank, dir) = match s.turn {
            Color::White => (5u8, -1i8),
            Color::Black => (2u8, 1i8),
        };
        let pushed = ep.offset(0, dir);
        let origin = ep.offset(0, -dir);
        let ok = ep.rank() == ep_rank
            && b.piece_at(ep).is_none()
            && origin.is_some_and(|o| b.piece_at(o).is_none())
            && pushed.is_some_and(|p| b.piece_at(p) == Some(Piece::new(!s.turn, PieceKind::Pawn)));
        if !ok {
            return Err(PositionError::InvalidEnPassant(ep));
        }
    }
    if s.in_check(!s.turn) {
        return Err(PositionError::OppositeCheck);
    }
    Ok(())
}

fn validate_castling(s: &Setup, color: Color) -> Result<(), PositionError> {
    let c = &s.castling;
    let sides = [CastleSide::King, CastleSide::Queen];
    if sides.iter().all(|&side| c.get(color, side).is_none()) {
        return Ok(());
    }
    let err = PositionError::InvalidCastling(color);
    let back = color.back_rank();
    let king = s.board.king_of(color).ok_or(err.clone())?;
    if king.rank() != back {
        return Err(err);
    }
    let classical = s.variant != Variant::Chess960;
    if classical && king.file() != 4 {
        return Err(err);
    }
    for side in sides {
        let Some(file) = c.get(color, side) else { continue };
        let rook_sq = Square::from_coords(file, back);
        if s.board.piece_at(rook_sq) != Some(Piece::new(color, PieceKind::Rook)) {
            return Err(err);
        }
        let on_side = match side {
            CastleSide::King => file > king.file(),
            CastleSide::Queen => file < king.file(),
        };
        if !on_side {
            return Err(err);
        }
        if classical && file != if side == CastleSide::King { 7 } else { 0 } {
            return Err(err);
        }
    }
    Ok(())
}

impl Setup {
    #[inline]
    pub(crate) fn us(&self) -> Bitboard {
        self.board.by_color(self.turn)
    }

    #[inline]
    pub(crate) fn them(&self) -> Bitboard {
        self.board.by_color(!self.turn)
    }

    /// Pieces of `by` attacking `sq` given the occupancy `occupied`.
    pub(crate) fn attackers_to(&self, sq: Square, by: Color, occupied: Bitboard) -> Bitboard {
        let b = &self.board;
        let theirs = b.by_color(by);
        let rooks = b.by_kind(PieceKind::Rook) | b.by_kind(PieceKind::Queen);
        let bishops = b.by_kind(PieceKind::Bishop) | b.by_kind(PieceKind::Queen);
        theirs
            & ((attacks::knight_attacks(sq) & b.by_kind(PieceKind::Knight))
                | (attacks::king_attacks(sq) & b.by_kind(PieceKind::King))
                | (attacks::pawn_attacks(!by, sq) & b.by_kind(PieceKind::Pawn))
                | (attacks::rook_attacks(sq, occupied) & rooks)
                | (attacks::bishop_attacks(sq, occupied) & bishops))
    }

    pub(crate) fn in_check(&self, color: Color) -> bool {
        match self.board.king_of(color) {
            Some(k) => self.attackers_to(k, !color, self.board.occupied()).any(),
            None => false,
        }
    }

    pub(crate) fn is_castling(&self, m: Move) -> bool {
        let us = self.turn;
        self.board.pieces(us, PieceKind::King).contains(m.from)
            && self.board.pieces(us, PieceKind::Rook).contains(m.to)
            && m.to.rank() == us.back_rank()
            && self.castling.side_for_file(us, m.to.file()).is_some()
    }

    /// Whether the side to move can legally capture en passant.
    pub(crate) fn has_legal_ep_capture(&self) -> bool {
        let Some(ep) = self.ep_square else { return false };
        let candidates = attacks::pawn_attacks(!self.turn, ep) & self.board.pieces(self.turn, PieceKind::Pawn);
        candidates.into_iter().any(|from| {
            let mut next = *self;
            next.play(Move::new(from, ep));
            !next.in_check(self.turn)
        })
    }
}
