//! Property-based checks over random playouts and random result sets.

use oodchess::elo::{estimate, Game, DEFAULT_CONFIDENCE};
use oodchess::kernel::{Position, Variant};
use oodchess::notation::fen::{format_fen, parse_fen};
use oodchess::notation::san::to_san;
use oodchess::notation::{decode, detokenize, encode_move, format_move, tokenize_fen, ACTION_COUNT, TOKEN_COUNT};
use oodchess::ood::gen_chess960;
use proptest::prelude::*;
use shakmaty::fen::Fen;
use shakmaty::san::San;
use shakmaty::variant::{Variant as SVariant, VariantPosition};
use shakmaty::CastlingMode;

/// Position reached by following `choices` (each taken modulo the number
/// of legal moves) from the variant's start.
fn playout(variant: Variant, start: u16, choices: &[u16]) -> Position {
    let mut pos = match variant {
        Variant::Chess960 => gen_chess960(u64::from(start), true).next().unwrap(),
        v => Position::startpos(v),
    };
    for &c in choices {
        let moves = pos.legal_moves();
        if moves.is_empty() || pos.outcome().is_over() {
            break;
        }
        pos = pos.apply_unchecked(moves[c as usize % moves.len()]);
    }
    pos
}

fn variant() -> impl Strategy<Value = Variant> {
    prop_oneof![Just(Variant::Standard), Just(Variant::Chess960), Just(Variant::Horde)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn codecs_round_trip(v in variant(), start in 0u16..960, choices in prop::collection::vec(any::<u16>(), 0..120)) {
        let pos = playout(v, start, &choices);
        let fen = format_fen(&pos);
        prop_assert_eq!(&parse_fen(&fen, v).unwrap(), &pos);
        let tokens = tokenize_fen(&fen).unwrap();
        prop_assert_eq!(tokens.len(), TOKEN_COUNT);
        prop_assert_eq!(detokenize(&tokens).unwrap(), fen.clone());

        let mode = if v == Variant::Chess960 { CastlingMode::Chess960 } else { CastlingMode::Standard };
        let sv = if v == Variant::Horde { SVariant::Horde } else { SVariant::Chess };
        let oracle = VariantPosition::from_setup(sv, Fen::from_ascii(fen.as_bytes()).unwrap().into_setup(), mode).unwrap();
        let mut indices = std::collections::BTreeSet::new();
        for m in pos.legal_moves() {
            let index = encode_move(&pos, m).unwrap();
            prop_assert!(index < ACTION_COUNT);
            prop_assert!(indices.insert(index), "two legal moves share action {}", index);
            prop_assert_eq!(decode(index).unwrap().to_move(&pos), m);
            // SAN is read back by an independent parser as the same move.
            let san = to_san(&pos, m);
            let theirs = san.parse::<San>().unwrap().to_move(&oracle).unwrap();
            prop_assert_eq!(theirs.to_uci(mode).to_string(), format_move(&pos, m), "{} on {}", san, fen);
        }
    }

    #[test]
    fn ratings_always_sum_to_zero(results in prop::collection::vec((0usize..4, 0usize..4, 0u8..3), 8..80)) {
        let names = ["a", "b", "c", "d"];
        // A fixed cycle keeps every result set connected.
        let mut games: Vec<Game> = (0..4)
            .map(|i| Game { white: names[i].into(), black: names[(i + 1) % 4].into(), white_score: 0.5 })
            .collect();
        for (w, b, s) in results.into_iter().filter(|(w, b, _)| w != b) {
            games.push(Game { white: names[w].into(), black: names[b].into(), white_score: f64::from(s) / 2.0 });
        }
        let table = estimate(&games, DEFAULT_CONFIDENCE).unwrap();
        let sum: f64 = table.players.iter().map(|p| p.rating).sum();
        prop_assert_eq!(sum, 0.0);
        prop_assert!(table.players.iter().all(|p| p.rating.is_finite() && p.uncertainty > 0.0));
    }
}
