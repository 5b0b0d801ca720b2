//! Standard algebraic notation.

use crate::kernel::{Move, PieceKind, Position};

/// SAN for a legal move `m` in `pos`, with `+`/`#` suffixes.
pub fn to_san(pos: &Position, m: Move) -> String {
    let mut san = san_body(pos, m);
    let next = pos.apply_unchecked(m);
    if next.is_check() {
        san.push(if next.legal_moves().is_empty() { '#' } else { '+' });
    }
    san
}

fn san_body(pos: &Position, m: Move) -> String {
    if pos.is_castling(m) {
        return if m.to.file() > m.from.file() { "O-O".into() } else { "O-O-O".into() };
    }
    let Some(piece) = pos.piece_at(m.from) else { return format!("{m:?}") };
    let capture = pos.is_capture(m);
    let mut out = String::with_capacity(8);

    if piece.kind == PieceKind::Pawn {
        if capture {
            out.push((b'a' + m.from.file()) as char);
            out.push('x');
        }
        out.push_str(&m.to.to_string());
        if let Some(p) = m.promotion {
            out.push('=');
            out.push(p.char().to_ascii_uppercase());
        }
        return out;
    }

    out.push(piece.kind.char().to_ascii_uppercase());
    let rivals: Vec<Move> = pos
        .legal_moves()
        .into_iter()
        .filter(|o| o.to == m.to && o.from != m.from && !pos.is_castling(*o))
        .filter(|o| pos.piece_at(o.from).map(|p| p.kind) == Some(piece.kind))
        .collect();
    if !rivals.is_empty() {
        let same_file = rivals.iter().any(|o| o.from.file() == m.from.file());
        let same_rank = rivals.iter().any(|o| o.from.rank() == m.from.rank());
        let file = (b'a' + m.from.file()) as char;
        let rank = (b'1' + m.from.rank()) as char;
        if !same_file {
            out.push(file);
        } else if !same_rank {
            out.push(rank);
        } else {
            out.push(file);
            out.push(rank);
        }
    }
    if capture {
        out.push('x');
    }
    out.push_str(&m.to.to_string());
    out
}
