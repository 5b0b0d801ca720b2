//! Independent PGN oracle: replays games with shakmaty.

use std::collections::HashMap;

use oodchess::arena::MatchResult;
use oodchess::kernel::Variant;
use shakmaty::fen::Fen;
use shakmaty::san::SanPlus;
use shakmaty::variant::{Variant as SVariant, VariantPosition};
use shakmaty::{CastlingMode, EnPassantMode, Position as _};

pub struct Replayed {
    pub tags: HashMap<String, String>,
    pub plies: usize,
    pub result: String,
    /// The result the rules give for the final position, if any.
    pub rules: Option<&'static str>,
}

/// Replays PGN text with shakmaty: SAN movetext, SetUp/FEN and Variant tags.
pub fn shakmaty_replay(pgn: &str) -> Replayed {
    let mut tags = HashMap::new();
    let mut movetext = String::new();
    for line in pgn.lines() {
        if let Some(inner) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let (k, v) = inner.split_once(' ').unwrap();
            tags.insert(k.to_string(), v.trim_matches('"').replace("\\\"", "\""));
        } else {
            movetext.push_str(line);
            movetext.push(' ');
        }
    }
    let mut stripped = String::new();
    let mut depth = 0;
    for c in movetext.chars() {
        match c {
            '{' => depth += 1,
            '}' => depth -= 1,
            _ if depth == 0 => stripped.push(c),
            _ => {}
        }
    }
    let variant = match tags.get("Variant").map(String::as_str) {
        Some("Horde") => SVariant::Horde,
        _ => SVariant::Chess,
    };
    let mode = if tags.get("Variant").map(String::as_str) == Some("Chess960") {
        CastlingMode::Chess960
    } else {
        CastlingMode::Standard
    };
    let fen = tags.get("FEN").cloned().unwrap_or_else(|| match variant {
        SVariant::Horde => "rnbqkbnr/pppppppp/8/1PP2PP1/PPPPPPPP/PPPPPPPP/PPPPPPPP/PPPPPPPP w kq - 0 1".into(),
        _ => "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1".into(),
    });
    let setup = Fen::from_ascii(fen.as_bytes()).unwrap().into_setup();
    let mut pos = VariantPosition::from_setup(variant, setup, mode).unwrap();
    let key = |p: &VariantPosition| {
        let f = Fen::from_position(p, EnPassantMode::Legal).to_string();
        f.split(' ').take(4).collect::<Vec<_>>().join(" ")
    };
    let mut seen: HashMap<String, usize> = HashMap::new();
    *seen.entry(key(&pos)).or_default() += 1;
    let mut plies = 0;
    let mut result = String::new();
    for token in stripped.split_whitespace() {
        if ["1-0", "0-1", "1/2-1/2", "*"].contains(&token) {
            result = token.to_string();
            continue;
        }
        if token.ends_with('.') {
            continue;
        }
        let san: SanPlus = token.parse().unwrap_or_else(|e| panic!("{token}: {e}"));
        let m = san.san.to_move(&pos).unwrap_or_else(|e| panic!("{token} at ply {}: {e}", plies + 1));
        pos.play_unchecked(m);
        plies += 1;
        *seen.entry(key(&pos)).or_default() += 1;
    }
    let rules = if let shakmaty::Outcome::Known(o) = pos.variant_outcome() {
        Some(o.as_str())
    } else if pos.is_checkmate() {
        Some(if pos.turn().is_white() { "0-1" } else { "1-0" })
    } else if pos.is_stalemate()
        || seen[&key(&pos)] >= 3
        || pos.halfmoves() >= 100
        || (variant == SVariant::Chess && pos.is_insufficient_material())
    {
        Some("1/2-1/2")
    } else {
        None
    };
    Replayed { tags, plies, result, rules }
}

/// Every invariant one finished game must satisfy.
pub fn check_game(r: &MatchResult) {
    r.validate().unwrap_or_else(|e| panic!("{e}\n{}", r.pgn));
    let ours = shakmaty_replay(&r.pgn);
    assert_eq!(ours.plies, r.plies, "{}", r.pgn);
    assert_eq!(ours.result, r.outcome.result_str());
    assert_eq!(ours.tags["Result"], ours.result);
    assert_eq!(ours.tags["PlyCount"], r.plies.to_string());
    for tag in ["Event", "Site", "Date", "Round", "White", "Black", "Result", "Variant", "Termination"] {
        assert!(ours.tags.contains_key(tag), "{tag} missing from\n{}", r.pgn);
    }
    match ours.tags["Termination"].as_str() {
        "normal" => assert_eq!(ours.rules, Some(ours.result.as_str()), "{}", r.pgn),
        "adjudication" => assert_eq!((ours.rules, ours.result.as_str()), (None, "1/2-1/2")),
        "rules infraction" => {
            assert!(ours.rules.is_none());
            assert!(r.forfeit.is_some());
        }
        t => panic!("unexpected termination {t}"),
    }
    assert_eq!(r.forfeit.is_some(), ours.tags["Termination"] == "rules infraction");
    if r.variant != Variant::Standard {
        assert_eq!(ours.tags["SetUp"], "1");
        assert_eq!(ours.tags["FEN"], r.start_fen);
    }
}
