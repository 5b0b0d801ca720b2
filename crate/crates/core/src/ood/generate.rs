use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::seeded_rng as rng;
use crate::kernel::{attacks, Board, CastlingRights, Color, Piece, PieceKind, Position, Setup, Square, Variant};

/// White back rank, files a..h. Black mirrors it.
pub type BackRank = [PieceKind; 8];

use PieceKind::{Bishop as B, King as K, Knight as N, Queen as Q, Rook as R};

pub const CLASSICAL_BACK_RANK: BackRank = [R, N, B, Q, K, B, N, R];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("requested {requested} boards but only {available} exist")]
    TooMany { requested: usize, available: usize },
    #[error("invalid range for {what}: {lo}..={hi}")]
    BadRange { what: &'static str, lo: u32, hi: u32 },
}

/// Bishops on opposite square colors and the king strictly between the rooks.
pub fn is_chess960_arrangement(back: &BackRank) -> bool {
    let files = |k: PieceKind| (0..8).filter(move |&f| back[f] == k).collect::<Vec<_>>();
    let (bishops, rooks, kings) = (files(B), files(R), files(K));
    bishops.len() == 2
        && rooks.len() == 2
        && kings.len() == 1
        && files(N).len() == 2
        && files(Q).len() == 1
        && bishops[0] % 2 != bishops[1] % 2
        && rooks[0] < kings[0]
        && kings[0] < rooks[1]
}

/// Back rank for a Chess960 start id in Scharnagl numbering (0..960); the
/// classical arrangement is id 518.
pub fn chess960_back_rank(id: u16) -> Option<BackRank> {
    if id >= 960 {
        return None;
    }
    let mut slots: [Option<PieceKind>; 8] = [None; 8];
    let mut n = id as usize;
    slots[(n % 4) * 2 + 1] = Some(B);
    n /= 4;
    slots[(n % 4) * 2] = Some(B);
    n /= 4;
    let place_nth_free = |slots: &mut [Option<PieceKind>; 8], nth: usize, kind: PieceKind| {
        let f = (0..8).filter(|&f| slots[f].is_none()).nth(nth).expect("free square");
        slots[f] = Some(kind);
    };
    place_nth_free(&mut slots, n % 6, Q);
    n /= 6;
    const KNIGHTS: [(usize, usize); 10] = [(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)];
    let (a, b) = KNIGHTS[n];
    // Place the later knight first so the earlier index stays valid.
    place_nth_free(&mut slots, b, N);
    place_nth_free(&mut slots, a, N);
    for kind in [R, K, R] {
        place_nth_free(&mut slots, 0, kind);
    }
    Some(slots.map(|s| s.expect("all squares filled")))
}

/// Scharnagl id of a Chess960 arrangement.
pub fn chess960_id(back: &BackRank) -> Option<u16> {
    (0..960).find(|&id| chess960_back_rank(id).as_ref() == Some(back))
}

/// All 960 Chess960 back ranks in id order.
pub fn chess960_universe() -> Vec<BackRank> {
    (0..960).map(|id| chess960_back_rank(id).expect("id in range")).collect()
}

/// Every Chess960 starting position exactly once, in a seed-dependent order.
/// Pass `include_classical = false` for the 959 non-classical starts.
pub fn gen_chess960(seed: u64, include_classical: bool) -> impl Iterator<Item = Position> {
    let mut ranks = chess960_universe();
    if !include_classical {
        ranks.retain(|r| *r != CLASSICAL_BACK_RANK);
    }
    ranks.shuffle(&mut rng(seed));
    ranks.into_iter().map(|r| Position::from_back_rank(r, Variant::Chess960))
}

/// All distinct arrangements of {R,R,N,N,B,B,Q,K}, lexicographic by piece
/// order.
pub fn all_back_ranks() -> Vec<BackRank> {
    fn extend(prefix: &mut Vec<PieceKind>, left: &mut [(PieceKind, u8); 5], out: &mut BTreeSet<BackRank>) {
        if prefix.len() == 8 {
            out.insert(prefix.clone().try_into().expect("eight pieces"));
            return;
        }
        for i in 0..left.len() {
            if left[i].1 == 0 {
                continue;
            }
            left[i].1 -= 1;
            prefix.push(left[i].0);
            extend(prefix, left, out);
            prefix.pop();
            left[i].1 += 1;
        }
    }
    let mut out = BTreeSet::new();
    extend(&mut Vec::with_capacity(8), &mut [(R, 2), (N, 2), (B, 2), (Q, 1), (K, 1)], &mut out);
    out.into_iter().collect()
}

/// `n` distinct non-classical starting positions sampled without
/// replacement. Castling rights exist only where the king stands between
/// the rooks; all positions use Chess960 castling semantics.
pub fn gen_all_starting(seed: u64, n: usize) -> Result<Vec<Position>, GenError> {
    let mut universe = all_back_ranks();
    universe.retain(|r| *r != CLASSICAL_BACK_RANK);
    if n > universe.len() {
        return Err(GenError::TooMany { requested: n, available: universe.len() });
    }
    let picked = index::sample(&mut rng(seed), universe.len(), n);
    Ok(picked.into_iter().map(|i| Position::from_back_rank(universe[i], Variant::Chess960)).collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnightsRooksParams {
    pub rooks: RangeInclusive<u32>,
    pub knights: RangeInclusive<u32>,
}

impl Default for KnightsRooksParams {
    fn default() -> Self {
        KnightsRooksParams { rooks: 2..=4, knights: 3..=15 }
    }
}

/// `n` boards with both kings, a handful of white rooks and many white
/// knights on uniformly drawn squares. Boards with adjacent kings or a
/// checked black king are redrawn from scratch.
pub fn gen_knights_rooks(seed: u64, n: usize, params: &KnightsRooksParams) -> Result<Vec<Position>, GenError> {
    for (what, r) in [("rooks", &params.rooks), ("knights", &params.knights)] {
        if r.is_empty() {
            return Err(GenError::BadRange { what, lo: *r.start(), hi: *r.end() });
        }
    }
    if params.rooks.end() + params.knights.end() + 2 > 64 {
        let r = &params.knights;
        return Err(GenError::BadRange { what: "knights", lo: *r.start(), hi: *r.end() });
    }
    let mut rng = rng(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        if let Some(pos) = draw_knights_rooks(&mut rng, params) {
            out.push(pos);
        }
    }
    Ok(out)
}

fn draw_knights_rooks(rng: &mut ChaCha8Rng, params: &KnightsRooksParams) -> Option<Position> {
    let rooks = rng.gen_range(params.rooks.clone()) as usize;
    let knights = rng.gen_range(params.knights.clone()) as usize;
    let squares = index::sample(rng, 64, 2 + rooks + knights).into_vec();
    let sq = |i: usize| Square::from_index(squares[i] as u8);
    let (white_king, black_king) = (sq(0), sq(1));
    if attacks::king_attacks(white_king).contains(black_king) {
        return None;
    }
    let mut board = Board::empty();
    board.put(white_king, Piece::new(Color::White, K));
    board.put(black_king, Piece::new(Color::Black, K));
    for i in 2..2 + rooks {
        board.put(sq(i), Piece::new(Color::White, R));
    }
    for i in 2 + rooks..2 + rooks + knights {
        board.put(sq(i), Piece::new(Color::White, N));
    }
    let setup = Setup {
        board,
        turn: Color::White,
        castling: CastlingRights::none(),
        ep_square: None,
        halfmove_clock: 0,
        fullmove_number: 1,
        variant: Variant::Standard,
    };
    // Rejects a checked black king (the side not to move).
    Position::from_setup(setup).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scharnagl_landmarks() {
        assert_eq!(chess960_back_rank(518), Some(CLASSICAL_BACK_RANK));
        assert_eq!(chess960_back_rank(0), Some([B, B, Q, N, N, R, K, R]));
        assert_eq!(chess960_back_rank(959), Some([R, K, R, N, N, Q, B, B]));
        assert_eq!(chess960_back_rank(960), None);
        assert_eq!(chess960_id(&CLASSICAL_BACK_RANK), Some(518));
    }

    #[test]
    fn deterministic_under_seed() {
        let a: Vec<_> = gen_chess960(9, true).take(5).collect();
        let b: Vec<_> = gen_chess960(9, true).take(5).collect();
        assert_eq!(a, b);
        assert_eq!(gen_knights_rooks(4, 20, &Default::default()), gen_knights_rooks(4, 20, &Default::default()));
    }

    #[test]
    fn too_many_is_an_error() {
        assert_eq!(gen_all_starting(0, 5040), Err(GenError::TooMany { requested: 5040, available: 5039 }));
    }
}
