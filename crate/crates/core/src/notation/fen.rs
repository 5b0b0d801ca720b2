//! FEN parsing and formatting, including X-FEN/Shredder castling fields for
//! Chess960.

use crate::kernel::{Board, CastleSide, CastlingRights, Color, Piece, PieceKind, Position, PositionError, Setup, Square, Variant};

pub const STANDARD_START: &str = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1";
pub const HORDE_START: &str = "rnbqkbnr/pppppppp/8/1PP2PP1/PPPPPPPP/PPPPPPPP/PPPPPPPP/PPPPPPPP w kq - 0 1";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FenError {
    #[error("expected 4 or 6 fields, found {0}")]
    FieldCount(usize),
    #[error("placement: {0}")]
    Placement(String),
    #[error("side to move: {0:?}")]
    SideToMove(String),
    #[error("castling: {0:?}")]
    Castling(String),
    #[error("en passant: {0:?}")]
    EnPassant(String),
    #[error("halfmove clock: {0:?}")]
    Halfmove(String),
    #[error("fullmove number: {0:?}")]
    Fullmove(String),
    #[error("invalid position: {0}")]
    Semantic(#[from] PositionError),
}

/// Parses a FEN string into a validated position of the given variant.
pub fn parse_fen(text: &str, variant: Variant) -> Result<Position, FenError> {
    let setup = parse_setup(text, variant)?;
    Ok(Position::from_setup(setup)?)
}

/// Parses a FEN whose variant is not known: Standard if valid there, else
/// Chess960 (non-classical castling), else Horde (no white king). Errors
/// report the Standard reading.
pub fn parse_fen_any(text: &str) -> Result<Position, FenError> {
    parse_fen(text, Variant::Standard).or_else(|e| {
        parse_fen(text, Variant::Chess960).or_else(|_| parse_fen(text, Variant::Horde)).map_err(|_| e)
    })
}

/// Parses a FEN string without semantic validation.
pub fn parse_setup(text: &str, variant: Variant) -> Result<Setup, FenError> {
    let fields: Vec<&str> = text.split_ascii_whitespace().collect();
    if fields.len() != 4 && fields.len() != 6 {
        return Err(FenError::FieldCount(fields.len()));
    }
    let board = parse_placement(fields[0])?;
    let turn = match fields[1] {
        "w" => Color::White,
        "b" => Color::Black,
        other => return Err(FenError::SideToMove(other.to_string())),
    };
    let castling = parse_castling(fields[2], &board)?;
    let ep_square = match fields[3] {
        "-" => None,
        s => Some(Square::parse(s).ok_or_else(|| FenError::EnPassant(s.to_string()))?),
    };
    let (halfmove_clock, fullmove_number) = if fields.len() == 6 {
        (
            fields[4].parse().map_err(|_| FenError::Halfmove(fields[4].to_string()))?,
            fields[5].parse().map_err(|_| FenError::Fullmove(fields[5].to_string()))?,
        )
    } else {
        (0, 1)
    };
    Ok(Setup { board, turn, castling, ep_square, halfmove_clock, fullmove_number, variant })
}

fn parse_placement(text: &str) -> Result<Board, FenError> {
    let ranks: Vec<&str> = text.split('/').collect();
    if ranks.len() != 8 {
        return Err(FenError::Placement(format!("expected 8 ranks, found {}", ranks.len())));
    }
    let mut board = Board::empty();
    for (i, row) in ranks.iter().enumerate() {
        let rank = 7 - i as u8;
        let mut file = 0u8;
        for c in row.chars() {
            if let Some(d) = c.to_digit(10) {
                if d == 0 || d > 8 {
                    return Err(FenError::Placement(format!("bad empty-square count {c:?}")));
                }
                file += d as u8;
            } else if let Some(piece) = Piece::from_fen_char(c) {
                if file >= 8 {
                    return Err(FenError::Placement(format!("rank {} is too long", rank + 1)));
                }
                board.put(Square::from_coords(file, rank), piece);
                file += 1;
            } else {
                return Err(FenError::Placement(format!("unexpected character {c:?}")));
            }
            if file > 8 {
                return Err(FenError::Placement(format!("rank {} is too long", rank + 1)));
            }
        }
        if file != 8 {
            return Err(FenError::Placement(format!("rank {} has {} squares", rank + 1, file)));
        }
    }
    Ok(board)
}

fn parse_castling(text: &str, board: &Board) -> Result<CastlingRights, FenError> {
    let mut rights = CastlingRights::none();
    if text == "-" {
        return Ok(rights);
    }
    let err = || FenError::Castling(text.to_string());
    for c in text.chars() {
        let color = if c.is_ascii_uppercase() { Color::White } else { Color::Black };
        let back = color.back_rank();
        let king = board.king_of(color).filter(|k| k.rank() == back).ok_or_else(err)?;
        let rooks: Vec<u8> = board
            .pieces(color, PieceKind::Rook)
            .into_iter()
            .filter(|sq| sq.rank() == back)
            .map(|sq| sq.file())
            .collect();
        let (side, file) = match c.to_ascii_lowercase() {
            'k' => (CastleSide::King, rooks.iter().copied().filter(|&f| f > king.file()).max().ok_or_else(err)?),
            'q' => (CastleSide::Queen, rooks.iter().copied().filter(|&f| f < king.file()).min().ok_or_else(err)?),
            l @ 'a'..='h' => {
                let file = l as u8 - b'a';
                let side = if file > king.file() {
                    CastleSide::King
                } else if file < king.file() {
                    CastleSide::Queen
                } else {
                    return Err(err());
                };
                (side, file)
            }
            _ => return Err(err()),
        };
        if rights.get(color, side).is_some() {
            return Err(err());
        }
        rights.set(color, side, Some(file));
    }
    Ok(rights)
}

/// Canonical FEN. Chess960 castling uses X-FEN: `KQkq` when the right
/// belongs to the outermost rook on that side, the rook's file letter
/// otherwise.
pub fn format_fen(pos: &Position) -> String {
    format_setup(pos.setup())
}

pub fn format_setup(s: &Setup) -> String {
    let mut out = String::with_capacity(90);
    out.push_str(&format_placement(&s.board));
    out.push(' ');
    out.push(s.turn.fen_char());
    out.push(' ');
    out.push_str(&format_castling(s));
    out.push(' ');
    match s.ep_square {
        Some(sq) => out.push_str(&sq.to_string()),
        None => out.push('-'),
    }
    out.push_str(&format!(" {} {}", s.halfmove_clock, s.fullmove_number));
    out
}

pub fn format_placement(board: &Board) -> String {
    let mut out = String::with_capacity(72);
    for rank in (0..8u8).rev() {
        let mut empty = 0;
        for file in 0..8u8 {
            match board.piece_at(Square::from_coords(file, rank)) {
                Some(p) => {
                    if empty > 0 {
                        out.push(char::from(b'0' + empty));
                        empty = 0;
                    }
                    out.push(p.fen_char());
                }
                None => empty += 1,
            }
        }
        if empty > 0 {
            out.push(char::from(b'0' + empty));
        }
        if rank > 0 {
            out.push('/');
        }
    }
    out
}

fn format_castling(s: &Setup) -> String {
    let mut out = String::new();
    for color in Color::ALL {
        let back = color.back_rank();
        let king_file = s.board.king_of(color).map(|k| k.file());
        for side in [CastleSide::King, CastleSide::Queen] {
            let Some(file) = s.castling.get(color, side) else { continue };
            let outermost = s.variant != Variant::Chess960 || {
                let rooks = s.board.pieces(color, PieceKind::Rook).into_iter().filter(|sq| sq.rank() == back).map(|sq| sq.file());
                let beyond = |f: u8| match side {
                    CastleSide::King => f > file,
                    CastleSide::Queen => f < file,
                };
                king_file.is_some() && !rooks.into_iter().any(beyond)
            };
            let c = if outermost {
                match side {
                    CastleSide::King => 'k',
                    CastleSide::Queen => 'q',
                }
            } else {
                (b'a' + file) as char
            };
            out.push(if color == Color::White { c.to_ascii_uppercase() } else { c });
        }
    }
    if out.is_empty() {
        out.push('-');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_start_round_trips_verbatim() {
        let pos = parse_fen(STANDARD_START, Variant::Standard).unwrap();
        assert_eq!(pos, Position::standard());
        assert_eq!(format_fen(&pos), STANDARD_START);
    }

    #[test]
    fn horde_start_round_trips() {
        let pos = parse_fen(HORDE_START, Variant::Horde).unwrap();
        assert_eq!(pos, Position::horde());
        assert_eq!(format_fen(&pos), HORDE_START);
    }

    #[test]
    fn empty_board_has_no_kings() {
        let err = parse_fen("8/8/8/8/8/8/8/8 w - - 0 1", Variant::Standard).unwrap_err();
        assert!(matches!(err, FenError::Semantic(PositionError::MissingKing(_))));
    }

    #[test]
    fn syntax_errors_name_the_field() {
        assert_eq!(parse_fen("8/8/8 w - - 0 1", Variant::Standard).unwrap_err(), FenError::Placement("expected 8 ranks, found 3".into()));
        assert_eq!(parse_fen("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0", Variant::Standard).unwrap_err(), FenError::FieldCount(5));
        assert!(matches!(parse_fen("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR x KQkq - 0 1", Variant::Standard), Err(FenError::SideToMove(_))));
        assert!(matches!(parse_fen("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNX w KQkq - 0 1", Variant::Standard), Err(FenError::Placement(_))));
        assert!(matches!(parse_fen("rnbqkbnr/pppppppp/9/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1", Variant::Standard), Err(FenError::Placement(_))));
        assert!(matches!(parse_fen("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - x 1", Variant::Standard), Err(FenError::Halfmove(_))));
    }

    #[test]
    fn semantic_errors() {
        // two white kings
        assert!(matches!(
            parse_fen("4k3/8/8/8/8/8/8/3KK3 w - - 0 1", Variant::Standard),
            Err(FenError::Semantic(PositionError::TooManyKings(Color::White)))
        ));
        // pawn on first rank in standard chess
        assert!(matches!(
            parse_fen("4k3/8/8/8/8/8/8/P3K3 w - - 0 1", Variant::Standard),
            Err(FenError::Semantic(PositionError::PawnOnBackRank(_)))
        ));
        // side not to move in check
        assert!(matches!(
            parse_fen("4k3/8/8/8/8/8/8/4KR2 w - - 0 1", Variant::Standard).map(|_| ()),
            Ok(())
        ));
        assert!(matches!(
            parse_fen("4k3/8/8/8/8/8/8/4R1K1 w - - 0 1", Variant::Standard),
            Err(FenError::Semantic(PositionError::OppositeCheck))
        ));
    }

    #[test]
    fn chess960_castling_spellings() {
        let shredder = parse_fen("bqnb1rkr/pp3ppp/3ppn2/2p5/5P2/P2P4/NPP1P1PP/BQ1BNRKR w HFhf - 2 9", Variant::Chess960).unwrap();
        let xfen = parse_fen("bqnb1rkr/pp3ppp/3ppn2/2p5/5P2/P2P4/NPP1P1PP/BQ1BNRKR w KQkq - 2 9", Variant::Chess960).unwrap();
        assert_eq!(shredder, xfen);
        assert_eq!(format_fen(&xfen), "bqnb1rkr/pp3ppp/3ppn2/2p5/5P2/P2P4/NPP1P1PP/BQ1BNRKR w KQkq - 2 9");
        // inner rook right needs the file letter
        let inner = parse_fen("2r1kr2/8/8/8/8/8/8/1R2K1R1 w GBfc - 0 1", Variant::Chess960);
        let inner = inner.unwrap();
        assert_eq!(format_fen(&inner), "2r1kr2/8/8/8/8/8/8/1R2K1R1 w KQkq - 0 1");
        let two_rooks = parse_fen("rr2k3/8/8/8/8/8/8/RR2K3 w Bb - 0 1", Variant::Chess960).unwrap();
        assert_eq!(format_fen(&two_rooks), "rr2k3/8/8/8/8/8/8/RR2K3 w Bb - 0 1");
        assert_eq!(parse_fen(&format_fen(&two_rooks), Variant::Chess960).unwrap(), two_rooks);
    }

    #[test]
    fn four_field_fen_defaults_clocks() {
        let pos = parse_fen("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq -", Variant::Standard).unwrap();
        assert_eq!(pos.halfmove_clock(), 0);
        assert_eq!(pos.fullmove_number(), 1);
    }
}
