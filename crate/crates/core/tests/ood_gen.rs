//! Board generators and the OOD classifier against brute-force oracles.

mod common;

use std::collections::BTreeSet;

use common::fixtures::{brute_force_back_ranks, chess960_rules, ood_oracle, OOD_FIXTURES};
use oodchess::kernel::{Color, PieceKind, Position, Variant};
use oodchess::notation::fen::{format_fen, parse_fen};
use oodchess::ood::{
    all_back_ranks, chess960_id, chess960_universe, classify, gen_all_starting, gen_chess960, gen_knights_rooks,
    is_chess960_arrangement, GenError, KnightsRooksParams, OodFlag, CLASSICAL_BACK_RANK,
};
use shakmaty::fen::Fen;
use shakmaty::{CastlingMode, Chess, Color as SColor, Piece as SPiece, Position as _, Role};

fn back_rank_of(pos: &Position, color: Color) -> [PieceKind; 8] {
    let rank = if color == Color::White { 0 } else { 7 };
    std::array::from_fn(|f| {
        let p = pos.piece_at(oodchess::kernel::Square::from_coords(f as u8, rank)).unwrap();
        assert_eq!(p.color, color);
        p.kind
    })
}

#[test]
fn chess960_universe_matches_the_rule_filter() {
    let filtered: BTreeSet<_> = brute_force_back_ranks().into_iter().filter(chess960_rules).collect();
    assert_eq!(filtered.len(), 960);
    let ours: BTreeSet<_> = chess960_universe().into_iter().collect();
    assert_eq!(ours, filtered);
    for (id, rank) in chess960_universe().iter().enumerate() {
        assert!(is_chess960_arrangement(rank));
        assert_eq!(chess960_id(rank), Some(id as u16));
    }
}

#[test]
fn chess960_generator_emits_each_start_once() {
    let started = std::time::Instant::now();
    let all: Vec<Position> = gen_chess960(7, true).collect();
    let fens: BTreeSet<String> = all.iter().map(format_fen).collect();
    assert_eq!((all.len(), fens.len()), (960, 960));
    let without: Vec<Position> = gen_chess960(7, false).collect();
    assert_eq!(without.len(), 959);
    for pos in &all {
        let white = back_rank_of(pos, Color::White);
        assert_eq!(white, back_rank_of(pos, Color::Black), "black mirrors white");
        assert!(chess960_rules(&white));
        assert_eq!(pos.variant(), Variant::Chess960);
    }
    assert!(without.iter().all(|p| back_rank_of(p, Color::White) != CLASSICAL_BACK_RANK));
    assert!(started.elapsed().as_secs_f64() < 1.0);
    assert_ne!(all, gen_chess960(8, true).collect::<Vec<_>>(), "order depends on the seed");
}

#[test]
fn every_back_rank_arrangement_is_enumerated() {
    let oracle = brute_force_back_ranks();
    assert_eq!(oracle.len(), 5040);
    let ours = all_back_ranks();
    assert_eq!(ours.len(), oracle.len());
    assert_eq!(ours.into_iter().collect::<BTreeSet<_>>(), oracle);
}

#[test]
fn all_starting_sample_is_distinct_and_non_classical() {
    let sample = gen_all_starting(3, 1000).unwrap();
    let fens: BTreeSet<String> = sample.iter().map(format_fen).collect();
    assert_eq!(fens.len(), 1000);
    for pos in &sample {
        let rank = back_rank_of(pos, Color::White);
        assert_ne!(rank, CLASSICAL_BACK_RANK);
        let king = rank.iter().position(|&k| k == PieceKind::King).unwrap();
        let rooks: Vec<usize> = (0..8).filter(|&f| rank[f] == PieceKind::Rook).collect();
        let between = rooks[0] < king && king < rooks[1];
        assert_eq!(pos.castling().is_empty(), !between, "{}", format_fen(pos));
        assert_eq!(parse_fen(&format_fen(pos), Variant::Chess960).unwrap(), *pos);
    }
    assert_eq!(sample, gen_all_starting(3, 1000).unwrap());
    assert!(matches!(gen_all_starting(0, 5040), Err(GenError::TooMany { available: 5039, .. })));
}

#[test]
fn knights_and_rooks_samples_are_valid() {
    let started = std::time::Instant::now();
    let boards = gen_knights_rooks(11, 10_000, &KnightsRooksParams::default()).unwrap();
    assert_eq!(boards.len(), 10_000);
    for pos in &boards {
        let fen = format_fen(pos);
        // Building the position rejects a checked side not to move; up to
        // 19 white pieces is too much material for real play, which is the
        // point of these boards.
        let theirs: Chess = Fen::from_ascii(fen.as_bytes())
            .unwrap()
            .into_position(CastlingMode::Standard)
            .or_else(|e| e.ignore_too_much_material())
            .unwrap_or_else(|e| panic!("{fen}: {e}"));
        assert_eq!(theirs.turn(), SColor::White);
        let board = theirs.board();
        let n = |color, role| board.by_piece(SPiece { color, role }).count();
        assert!((2..=4).contains(&n(SColor::White, Role::Rook)), "{fen}");
        assert!((3..=15).contains(&n(SColor::White, Role::Knight)), "{fen}");
        assert_eq!(n(SColor::White, Role::King) + n(SColor::Black, Role::King), 2);
        assert_eq!(board.occupied().count(), 2 + n(SColor::White, Role::Rook) + n(SColor::White, Role::Knight));
        assert!(classify(pos).contains(OodFlag::MorePieces));
    }
    assert!(started.elapsed().as_secs() < 60);

    let params = KnightsRooksParams { rooks: 3..=2, knights: 3..=15 };
    assert!(matches!(gen_knights_rooks(0, 1, &params), Err(GenError::BadRange { what: "rooks", .. })));
}

#[test]
fn classifier_agrees_with_brute_force_on_fixtures() {
    let mut seen = BTreeSet::new();
    for (fen, variant, more, same) in OOD_FIXTURES {
        assert!(seen.insert(fen), "duplicate fixture {fen}");
        assert_eq!(ood_oracle(fen), (more, same), "hand label disagrees with the oracle: {fen}");
        let flags = classify(&parse_fen(fen, variant).unwrap());
        assert_eq!((flags.more_pieces, flags.same_color_bishops), (more, same), "{fen}");
    }
    let counts = |m: bool, s: bool| OOD_FIXTURES.iter().filter(|f| (f.2, f.3) == (m, s)).count();
    assert!(counts(false, false) >= 10 && counts(true, false) >= 10 && counts(false, true) >= 10 && counts(true, true) >= 3);
}
