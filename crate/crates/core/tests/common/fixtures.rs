//! Hand-built fixtures and brute-force oracles shared by the metric,
//! generator and acceptance tests.

use std::collections::{BTreeSet, HashMap};

use oodchess::kernel::{PieceKind, Position, Variant};
use oodchess::metrics::PuzzleCase;
use oodchess::notation::fen::{format_fen, parse_fen};
use oodchess::notation::uci::{format_move, parse_legal_move};
use oodchess::policy::ScriptedPolicy;
use shakmaty::fen::Fen;
use shakmaty::{Color as SColor, Piece as SPiece, Role};

pub fn std_pos(fen: &str) -> Position {
    parse_fen(fen, Variant::Standard).unwrap()
}

/// Ten boards with hand-counted legal moves: 20, 1, 0 (mate), 0 (stalemate),
/// 3, 5, 8, 48, 1, 20.
pub const TOPK_BOARDS: [(&str, usize); 10] = [
    ("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1", 20),
    ("k7/2K5/8/8/8/8/8/1R6 b - - 0 1", 1),
    ("R6k/6pp/8/8/8/8/8/K7 b - - 0 1", 0),
    ("7k/5Q2/6K1/8/8/8/8/8 b - - 0 1", 0),
    ("k7/8/8/8/8/8/8/7K b - - 0 1", 3),
    ("4k3/8/8/8/8/8/8/4K3 b - - 0 1", 5),
    ("8/8/8/3k4/8/8/8/K7 b - - 0 1", 8),
    ("r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1", 48),
    ("k7/2K5/8/8/8/8/8/8 b - - 0 1", 1),
    ("rnbqkbnr/pppppppp/8/8/4P3/8/PPPP1PPP/RNBQKBNR b KQkq - 0 1", 20),
];

/// Legal moves as UCI text, sorted: both the oracle's ranking and the
/// policy's script below refer to positions in this list.
pub fn sorted_moves(pos: &Position) -> Vec<String> {
    let mut v: Vec<String> = pos.legal_moves().into_iter().map(|m| format_move(pos, m)).collect();
    v.sort();
    v
}

pub fn puzzle(id: &str, fen: &str, moves: &str) -> PuzzleCase {
    PuzzleCase { id: id.into(), fen: fen.into(), solution: moves.split_whitespace().map(str::to_string).collect() }
}

/// Hand-made lines in Lichess layout (setup move first).
pub fn puzzles() -> Vec<PuzzleCase> {
    vec![
        // Two rooks: a8 and b8 both mate.
        puzzle("twoRooks", "7k/5ppp/8/8/8/8/8/RR4K1 b - - 0 1", "h8g8 a1a8"),
        puzzle("italian", "rnbqkbnr/pppppppp/8/8/4P3/8/PPPP1PPP/RNBQKBNR b KQkq - 0 1", "e7e5 g1f3 b8c6 f1b5"),
        puzzle("scandi", "rnbqkbnr/pppppppp/8/8/4P3/8/PPPP1PPP/RNBQKBNR b KQkq - 0 1", "d7d5 e4d5 d8d5 b1c3"),
        puzzle("scholar", "r1bqkbnr/pppp1ppp/2n5/4p2Q/2B1P3/8/PPPP1PPP/RNB1K1NR b KQkq - 3 3", "g8f6 h5f7"),
    ]
}

/// Answers every player ply of `cases` with the stored solution, except
/// where `overrides` says otherwise (keyed by FEN).
pub fn verbatim(cases: &[PuzzleCase], overrides: &[(&str, &str)]) -> ScriptedPolicy {
    let mut table = HashMap::new();
    for c in cases {
        let mut pos = std_pos(&c.fen);
        for (i, text) in c.solution.iter().enumerate() {
            if i % 2 == 1 {
                table.insert(format_fen(&pos), text.clone());
            }
            pos = pos.apply_unchecked(parse_legal_move(&pos, text).unwrap());
        }
    }
    for (fen, text) in overrides {
        table.insert(fen.to_string(), text.to_string());
    }
    ScriptedPolicy::from_table("verbatim", table, "0000")
}


/// Hand-labeled classifier fixtures: (FEN, variant, more_pieces,
/// same_color_bishops). Square colors: a1 is dark, so a square is dark when
/// file + rank (both from 0) is even.
pub const OOD_FIXTURES: [(&str, Variant, bool, bool); 50] = [
    ("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1", Variant::Standard, false, false),
    ("rnbqkbnr/pppppppp/8/8/4P3/8/PPPP1PPP/RNBQKBNR b KQkq - 0 1", Variant::Standard, false, false),
    ("r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1", Variant::Standard, false, false),
    ("r1bqkbnr/pppp1ppp/2n5/4p2Q/2B1P3/8/PPPP1PPP/RNB1K1NR b KQkq - 3 3", Variant::Standard, false, false),
    ("r1bq1rk1/pppp1ppp/2n2n2/2b1p3/2B1P3/2N2N2/PPPP1PPP/R1BQ1RK1 w - - 6 6", Variant::Standard, false, false),
    ("rnb1kbnr/pppppppp/8/8/8/8/PPPPPPPP/RNB1KBNR w KQkq - 0 1", Variant::Standard, false, false),
    ("4k3/8/8/8/8/8/8/4K3 w - - 0 1", Variant::Standard, false, false),
    ("8/8/8/4k3/8/8/8/R3K3 w - - 0 1", Variant::Standard, false, false),
    ("4k3/8/8/8/8/8/8/R3K2R w KQ - 0 1", Variant::Standard, false, false),
    ("r3k2r/8/8/8/8/8/8/4K3 b kq - 0 1", Variant::Standard, false, false),
    ("4k3/8/8/8/8/8/8/RR2K3 w - - 0 1", Variant::Standard, false, false),
    ("4k3/8/8/8/8/8/8/RNNQK2R w - - 0 1", Variant::Standard, false, false),
    ("4k3/8/8/8/8/8/8/2B1K3 w - - 0 1", Variant::Standard, false, false),
    ("4kb2/8/8/8/8/8/8/2B1K3 w - - 0 1", Variant::Standard, false, false),
    ("2b1kb2/8/8/8/8/8/8/4K3 w - - 0 1", Variant::Standard, false, false),
    ("4k3/8/8/2b2b2/8/8/8/4K3 w - - 0 1", Variant::Standard, false, false),
    ("bbqnnrkr/pppppppp/8/8/8/8/PPPPPPPP/BBQNNRKR w - - 0 1", Variant::Standard, false, false),
    ("qnrbkrbn/pppppppp/8/8/8/8/PPPPPPPP/QNRBKRBN w - - 0 1", Variant::Standard, false, false),
    ("bbqnnrkr/pppppppp/8/8/8/8/PPPPPPPP/BBQNNRKR w HFhf - 0 1", Variant::Chess960, false, false),
    ("rnbqkbnr/pppppppp/8/1PP2PP1/PPPPPPPP/PPPPPPPP/PPPPPPPP/PPPPPPPP w kq - 0 1", Variant::Horde, false, false),
    // Three queens (the extra-queens archetype).
    ("7k/8/8/8/8/8/8/1QQQ2K1 b - - 0 1", Variant::Standard, true, false),
    ("4k3/8/8/8/8/8/8/QQQ1K3 w - - 0 1", Variant::Standard, true, false),
    ("Q3k3/8/8/8/8/8/8/Q3K3 b - - 0 1", Variant::Standard, true, false),
    ("qq2k3/8/8/8/8/8/8/4K3 w - - 0 1", Variant::Standard, true, false),
    ("4k3/8/8/3Q4/8/8/8/3QK3 w - - 0 1", Variant::Standard, true, false),
    ("k7/8/8/8/8/8/8/KQQQQQQQ b - - 0 1", Variant::Standard, true, false),
    ("rnbqkbnr/ppppppp1/8/8/8/8/PPPPPPP1/RNBQKBNq w Qkq - 0 1", Variant::Standard, true, false),
    ("4k3/8/8/8/8/8/8/RRR1K3 w - - 0 1", Variant::Standard, true, false),
    ("rrr1k3/8/8/8/8/8/8/4K3 w - - 0 1", Variant::Standard, true, false),
    ("r3k2r/8/8/8/3r4/8/8/4K3 w kq - 0 1", Variant::Standard, true, false),
    ("4k3/8/8/8/8/8/8/NNN1K3 w - - 0 1", Variant::Standard, true, false),
    ("nnn1k3/8/8/8/8/8/8/4K3 w - - 0 1", Variant::Standard, true, false),
    ("1n2k1n1/8/8/8/3n4/8/8/4K3 w - - 0 1", Variant::Standard, true, false),
    ("rnbqkbnr/pppppppp/8/8/8/5N2/PPPPPPPP/RNBQKBNR b KQkq - 0 1", Variant::Standard, true, false),
    ("4k3/8/8/8/8/8/NNNN4/RRR1K3 w - - 0 1", Variant::Standard, true, false),
    ("8/7k/8/2N1N3/1N3N2/8/R5R1/4K3 w - - 0 1", Variant::Standard, true, false),
    // Two bishops of one side on one square color (c1 and e3 are dark).
    ("7k/8/8/8/8/4B3/8/2B3K1 b - - 0 1", Variant::Standard, false, true),
    ("4k3/8/8/8/8/4B3/8/2B1K3 w - - 0 1", Variant::Standard, false, true),
    ("2b1k3/8/8/5b2/8/8/8/4K3 w - - 0 1", Variant::Standard, false, true),
    ("4k2B/8/8/8/8/8/8/B3K3 w - - 0 1", Variant::Standard, false, true),
    ("B3k3/8/8/8/8/8/8/4K2B w - - 0 1", Variant::Standard, false, true),
    ("4k3/8/8/2b1b3/8/8/8/4K3 w - - 0 1", Variant::Standard, false, true),
    ("4k3/8/8/2b1b3/8/8/8/4KB2 w - - 0 1", Variant::Standard, false, true),
    ("8/1b6/8/4k3/8/8/8/4K2b w - - 0 1", Variant::Standard, false, true),
    ("bnbqkrnr/pppppppp/8/8/8/8/PPPPPPPP/BNBQKRNR w - - 0 1", Variant::Standard, false, true),
    ("rnbqkbnr/pppppppp/8/8/8/5B2/PPPPPPPP/RN1QKBNR w KQkq - 0 1", Variant::Standard, false, true),
    // Both flags.
    ("4k3/8/8/8/8/4B3/8/2B1KQQ1 w - - 0 1", Variant::Standard, true, true),
    ("4k3/8/8/8/8/8/8/BBB1K3 w - - 0 1", Variant::Standard, true, true),
    ("4k3/8/8/8/8/8/8/2B1KB1B w - - 0 1", Variant::Standard, true, true),
    ("rnbqkbnr/pppppppp/8/8/8/4B3/PPPPPPPP/RNBQKBNR w KQkq - 0 1", Variant::Standard, true, true),
];

/// Brute-force flags straight from the FEN with shakmaty: per side, more
/// queens/rooks/bishops/knights than the initial army, and two bishops on
/// one square color.
pub fn ood_oracle(fen: &str) -> (bool, bool) {
    let board = Fen::from_ascii(fen.as_bytes()).unwrap().into_setup().board;
    let (mut more, mut same) = (false, false);
    for color in [SColor::White, SColor::Black] {
        let n = |role: Role| board.by_piece(SPiece { color, role }).count();
        more |= n(Role::Queen) > 1 || n(Role::Rook) > 2 || n(Role::Bishop) > 2 || n(Role::Knight) > 2;
        let bishops = board.by_piece(SPiece { color, role: Role::Bishop });
        let light = bishops.into_iter().filter(|sq| sq.is_light()).count();
        let dark = bishops.count() - light;
        same |= light >= 2 || dark >= 2;
    }
    (more, same)
}

/// Every arrangement of {R,R,N,N,B,B,Q,K} found by trying all 5^8 ways
/// of filling eight squares with five piece kinds.
pub fn brute_force_back_ranks() -> BTreeSet<[PieceKind; 8]> {
    use PieceKind::*;
    const KINDS: [PieceKind; 5] = [Rook, Knight, Bishop, Queen, King];
    const WANT: [usize; 5] = [2, 2, 2, 1, 1];
    let mut out = BTreeSet::new();
    for code in 0..5usize.pow(8) {
        let mut rank = [King; 8];
        let mut counts = [0usize; 5];
        let mut c = code;
        for slot in &mut rank {
            counts[c % 5] += 1;
            *slot = KINDS[c % 5];
            c /= 5;
        }
        if counts == WANT {
            out.insert(rank);
        }
    }
    out
}

/// The two Chess960 placement rules, checked on a raw arrangement.
pub fn chess960_rules(rank: &[PieceKind; 8]) -> bool {
    let files = |k: PieceKind| (0..8).filter(|&f| rank[f] == k).collect::<Vec<_>>();
    let (b, r, k) = (files(PieceKind::Bishop), files(PieceKind::Rook), files(PieceKind::King)[0]);
    (b[0] + b[1]) % 2 == 1 && r[0] < k && k < r[1]
}
