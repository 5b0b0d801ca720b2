//! Independent move-generation oracles: frozen engine perft counts and
//! ply-by-ply comparison with shakmaty on random playouts.

use std::collections::BTreeSet;

use oodchess::kernel::{Color, GameStatus, PieceKind, Position, Termination, Variant};
use oodchess::notation::fen::{format_fen, parse_fen, parse_setup};
use oodchess::notation::tokens::{detokenize, tokenize_fen};
use oodchess::notation::uci::format_move;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shakmaty::fen::Fen;
use shakmaty::uci::UciMove as OracleUci;
use shakmaty::variant::VariantPosition;
use shakmaty::{CastlingMode, EnPassantMode, Position as _};

// Leaf counts reported by Stockfish 17.1 ("go perft") for the standard and
// Chess960 rows, and by Fairy-Stockfish with UCI_Variant=horde for Horde.
pub const PERFT: &[(Variant, &str, u32, u64)] = &[
    (Variant::Standard, "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1", 5, 4_865_609),
    (Variant::Standard, "r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1", 4, 4_085_603),
    (Variant::Chess960, "bbqnnrkr/pppppppp/8/8/8/8/PPPPPPPP/BBQNNRKR w HFhf - 0 1", 4, 201_143),
    (Variant::Chess960, "rknnbbqr/pppppppp/8/8/8/8/PPPPPPPP/RKNNBBQR w HAha - 0 1", 4, 200_559),
    (Variant::Chess960, "qnrbkrbn/pppppppp/8/8/8/8/PPPPPPPP/QNRBKRBN w FCfc - 0 1", 4, 163_856),
    (Variant::Chess960, "bqnb1rkr/pp3ppp/3ppn2/2p5/5P2/P2P4/NPP1P1PP/BQ1BNRKR w HFhf - 2 9", 4, 326_672),
    (Variant::Chess960, "2r1kr2/8/8/8/8/8/8/1R2K1R1 w GBfc - 0 1", 4, 264_663),
    (Variant::Horde, "rnbqkbnr/pppppppp/8/1PP2PP1/PPPPPPPP/PPPPPPPP/PPPPPPPP/PPPPPPPP w kq - 0 1", 4, 23_310),
    (Variant::Horde, "rnbqkbnr/pppppppp/8/1PP2PP1/PPPPPPPP/PPPPPPPP/PPPPPPPP/PPPPPPPP w kq - 0 1", 5, 265_223),
    (Variant::Horde, "r3k2r/8/8/8/8/8/PPPPPPPP/PPPPPPPP b kq - 0 1", 4, 153_383),
    (Variant::Horde, "4k3/8/8/8/2p5/8/1P6/P7 w - - 0 1", 4, 687),
];

pub fn random_chess960_start(rng: &mut ChaCha8Rng) -> Position {
    use PieceKind::*;
    loop {
        let mut back = [Rook, Rook, Knight, Knight, Bishop, Bishop, Queen, King];
        back.shuffle(rng);
        let files = |k: PieceKind| (0..8).filter(move |&f| back[f] == k);
        let bishops: Vec<usize> = files(Bishop).collect();
        let rooks: Vec<usize> = files(Rook).collect();
        let king = files(King).next().unwrap();
        if bishops[0] % 2 != bishops[1] % 2 && rooks[0] < king && king < rooks[1] {
            return Position::from_back_rank(back, Variant::Chess960);
        }
    }
}

pub fn oracle_variant(variant: Variant) -> (shakmaty::variant::Variant, CastlingMode) {
    match variant {
        Variant::Standard => (shakmaty::variant::Variant::Chess, CastlingMode::Standard),
        Variant::Chess960 => (shakmaty::variant::Variant::Chess, CastlingMode::Chess960),
        Variant::Horde => (shakmaty::variant::Variant::Horde, CastlingMode::Standard),
    }
}

pub fn oracle_position(pos: &Position) -> VariantPosition {
    let (variant, mode) = oracle_variant(pos.variant());
    let setup = Fen::from_ascii(format_fen(pos).as_bytes()).unwrap().into_setup();
    VariantPosition::from_setup(variant, setup, mode).unwrap()
}

/// Plays random games, comparing legal move sets and successor states with
/// the oracle at every ply, until `target` positions have been compared.
pub fn playout_equivalence(variant: Variant, target: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (_, mode) = oracle_variant(variant);
    let mut compared = 0;
    while compared < target {
        let mut pos = match variant {
            Variant::Chess960 => random_chess960_start(&mut rng),
            v => Position::startpos(v),
        };
        let mut oracle = oracle_position(&pos);
        for _ in 0..rng.gen_range(20..160) {
            let ours: BTreeSet<String> = pos.legal_moves().into_iter().map(|m| format_move(&pos, m)).collect();
            let theirs: BTreeSet<String> =
                oracle.legal_moves().iter().map(|m| m.to_uci(mode).to_string()).collect();
            assert_eq!(ours, theirs, "move sets differ at {}", format_fen(&pos));
            compare_state(&pos, &oracle);
            compared += 1;

            let fen = format_fen(&pos);
            assert_eq!(parse_fen(&fen, variant).unwrap(), pos, "FEN round trip {fen}");
            let tokens = tokenize_fen(&fen).unwrap();
            assert_eq!(detokenize(&tokens).unwrap(), fen);

            let moves = pos.legal_moves();
            let Some(&m) = moves.choose(&mut rng) else { break };
            assert!(!moves.iter().any(|o| pos.board().pieces(!pos.side_to_move(), PieceKind::King).contains(o.to)));
            let uci = format_move(&pos, m);
            let om = uci.parse::<OracleUci>().unwrap().to_move(&oracle).unwrap();
            oracle.play_unchecked(om);
            pos = pos.apply_move(m).unwrap();
            if pos.outcome().is_over() {
                break;
            }
        }
    }
}

pub fn compare_state(pos: &Position, oracle: &VariantPosition) {
    let fen = format_fen(pos);
    let theirs = Fen::from_position(oracle, EnPassantMode::Legal).to_string();
    let ours_fields: Vec<&str> = fen.split(' ').collect();
    let their_fields: Vec<&str> = theirs.split(' ').collect();
    assert_eq!(ours_fields[0], their_fields[0], "placement");
    assert_eq!(ours_fields[1], their_fields[1], "turn");
    assert_eq!(ours_fields[4], their_fields[4], "halfmove clock at {fen}");
    assert_eq!(ours_fields[5], their_fields[5], "fullmove number at {fen}");
    let their_setup = parse_setup(&theirs, pos.variant()).unwrap();
    assert_eq!(&their_setup.castling, pos.castling(), "castling rights at {fen} vs {theirs}");

    assert_eq!(pos.is_check(), oracle.is_check(), "check at {fen}");
    let ours = pos.outcome();
    if oracle.is_checkmate() {
        assert_eq!(ours.reason, Some(Termination::Checkmate), "{fen}");
    } else if oracle.is_stalemate() {
        assert_eq!(ours.reason, Some(Termination::Stalemate), "{fen}");
    }
    if pos.variant() == Variant::Horde && oracle.is_variant_end() {
        assert_eq!(ours.status, GameStatus::BlackWins, "{fen}");
        assert_eq!(pos.board().by_color(Color::White).count(), 0);
    }
}

