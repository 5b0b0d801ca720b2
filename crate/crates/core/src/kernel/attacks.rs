//! Attack tables. Sliding attacks use plain ray tables: the first blocker on
//! a ray cuts the ray at that square.

use std::sync::LazyLock;

use super::bitboard::Bitboard;
use super::types::{Color, Square};

const KNIGHT_DELTAS: [(i8, i8); 8] = [(1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2)];
const KING_DELTAS: [(i8, i8); 8] = [(0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1)];

/// Ray directions as (file, rank) steps. The first four point toward higher
/// square indices.
const DIRECTIONS: [(i8, i8); 8] = [(0, 1), (1, 0), (1, 1), (-1, 1), (0, -1), (-1, 0), (-1, -1), (1, -1)];
const ROOK_DIRS: [usize; 4] = [0, 1, 4, 5];
const BISHOP_DIRS: [usize; 4] = [2, 3, 6, 7];

struct Tables {
    knight: [Bitboard; 64],
    king: [Bitboard; 64],
    pawn: [[Bitboard; 64]; 2],
    rays: [[Bitboard; 64]; 8],
}

static TABLES: LazyLock<Tables> = LazyLock::new(|| {
    let step_table = |deltas: &[(i8, i8)]| {
        let mut t = [Bitboard::EMPTY; 64];
        for sq in Square::all() {
            t[sq.index()] = deltas.iter().filter_map(|&(df, dr)| sq.offset(df, dr)).collect();
        }
        t
    };
    let mut pawn = [[Bitboard::EMPTY; 64]; 2];
    let mut rays = [[Bitboard::EMPTY; 64]; 8];
    for sq in Square::all() {
        pawn[Color::White.index()][sq.index()] = [(-1, 1), (1, 1)].iter().filter_map(|&(df, dr)| sq.offset(df, dr)).collect();
        pawn[Color::Black.index()][sq.index()] = [(-1, -1), (1, -1)].iter().filter_map(|&(df, dr)| sq.offset(df, dr)).collect();
        for (d, &(df, dr)) in DIRECTIONS.iter().enumerate() {
            let mut bb = Bitboard::EMPTY;
            let mut cur = sq.offset(df, dr);
            while let Some(s) = cur {
                bb = bb.with(s);
                cur = s.offset(df, dr);
            }
            rays[d][sq.index()] = bb;
        }
    }
    Tables { knight: step_table(&KNIGHT_DELTAS), king: step_table(&KING_DELTAS), pawn, rays }
});

#[inline]
pub fn knight_attacks(sq: Square) -> Bitboard {
    TABLES.knight[sq.index()]
}

#[inline]
pub fn king_attacks(sq: Square) -> Bitboard {
    TABLES.king[sq.index()]
}

/// Squares a pawn of `color` on `sq` attacks.
#[inline]
pub fn pawn_attacks(color: Color, sq: Square) -> Bitboard {
    TABLES.pawn[color.index()][sq.index()]
}

#[inline]
fn ray_attacks(dir: usize, sq: Square, occupied: Bitboard) -> Bitboard {
    let ray = TABLES.rays[dir][sq.index()];
    let blockers = ray & occupied;
    let first = if dir < 4 { blockers.first() } else { blockers.last() };
    match first {
        Some(b) => ray ^ TABLES.rays[dir][b.index()],
        None => ray,
    }
}

pub fn rook_attacks(sq: Square, occupied: Bitboard) -> Bitboard {
    ROOK_DIRS.iter().fold(Bitboard::EMPTY, |acc, &d| acc | ray_attacks(d, sq, occupied))
}

pub fn bishop_attacks(sq: Square, occupied: Bitboard) -> Bitboard {
    BISHOP_DIRS.iter().fold(Bitboard::EMPTY, |acc, &d| acc | ray_attacks(d, sq, occupied))
}

#[inline]
pub fn queen_attacks(sq: Square, occupied: Bitboard) -> Bitboard {
    rook_attacks(sq, occupied) | bishop_attacks(sq, occupied)
}

/// Squares strictly between `a` and `b` when they share a rank, file or
/// diagonal; empty otherwise.
pub fn between(a: Square, b: Square) -> Bitboard {
    for d in 0..8 {
        let ray = TABLES.rays[d][a.index()];
        if ray.contains(b) {
            return (ray ^ TABLES.rays[d][b.index()]).without(b);
        }
    }
    Bitboard::EMPTY
}

/// The full line (edge to edge) through `a` and `b`, or empty if they are
/// not aligned.
pub fn line(a: Square, b: Square) -> Bitboard {
    for d in 0..8 {
        if TABLES.rays[d][a.index()].contains(b) {
            let opposite = (d + 4) % 8;
            return TABLES.rays[d][a.index()] | TABLES.rays[opposite][a.index()] | Bitboard::from_square(a);
        }
    }
    Bitboard::EMPTY
}

/// Pseudo-attacks of a queen on an empty board, i.e. the squares a queen
/// geometry move can reach.
pub fn queen_rays(sq: Square) -> Bitboard {
    (0..8).fold(Bitboard::EMPTY, |acc, d| acc | TABLES.rays[d][sq.index()])
}
