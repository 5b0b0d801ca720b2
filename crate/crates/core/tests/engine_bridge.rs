//! UCI bridge behaviour against a live engine (external when configured via
//! `OODCHESS_ENGINE` / `OODCHESS_VARIANT_ENGINE`, the bundled reference
//! engine otherwise) and against scripted misbehaving processes.

mod common;

use std::collections::BTreeSet;
use std::time::Duration;

use oodchess::engine::{Engine, EngineConfig, EngineError, EngineKind, SearchLimit};
use oodchess::kernel::{Position, Variant};
use oodchess::notation::fen::parse_fen;
use oodchess::notation::uci::format_move;

const QUICK: SearchLimit = SearchLimit::Depth(8);

fn classic() -> Engine {
    let found = common::classic_engine();
    eprintln!("engine: {}", found.describe());
    Engine::spawn(&found.config).expect("engine starts")
}

#[test]
fn skill_option_is_recorded() {
    let found = common::classic_engine();
    let engine = Engine::spawn(&found.config.clone().with_option("Skill Level", 0)).unwrap();
    assert_eq!(engine.options().get("Skill Level").map(String::as_str), Some("0"));
}

#[test]
fn skill_range_is_enforced() {
    let mut engine = classic();
    engine.set_skill(0).unwrap();
    assert_eq!(engine.options()["Skill Level"], "0");
    assert!(matches!(engine.set_skill(21), Err(EngineError::SkillOutOfRange(21))));
}

#[test]
fn spawn_failure() {
    let err = Engine::spawn(&EngineConfig::new("/does/not/exist", EngineKind::Classic)).err();
    assert!(matches!(err, Some(EngineError::Spawn { .. })));
}

#[test]
fn unique_mate_in_one_is_found() {
    let mut engine = classic();
    // Scholar's mate: only Qxf7 mates.
    let pos = parse_fen("r1bqkb1r/pppp1ppp/2n2n2/4p2Q/2B1P3/8/PPPP1PPP/RNB1K1NR w KQkq - 4 4", Variant::Standard).unwrap();
    let m = engine.best_move(&pos, QUICK).unwrap();
    assert_eq!(format_move(&pos, m), "h5f7");
}

#[test]
fn best_move_from_start_is_legal() {
    let mut engine = classic();
    let pos = Position::standard();
    let m = engine.best_move(&pos, SearchLimit::Depth(12)).unwrap();
    assert!(pos.legal_moves().contains(&m));
}

#[test]
fn repeated_queries_agree_or_stay_in_top3() {
    let mut engine = classic();
    let pos = parse_fen("r1bqkbnr/pppp1ppp/2n5/4p3/4P3/5N2/PPPP1PPP/RNBQKB1R w KQkq - 2 3", Variant::Standard).unwrap();
    engine.new_game().unwrap();
    let a = engine.best_move(&pos, QUICK).unwrap();
    engine.new_game().unwrap();
    let b = engine.best_move(&pos, QUICK).unwrap();
    if a != b {
        let top3 = engine.top_k_moves(&pos, 3, QUICK).unwrap();
        assert!(top3.contains(&a) && top3.contains(&b));
    }
}

#[test]
fn terminal_position_reports_no_move() {
    let mut engine = classic();
    let mated = parse_fen("rnb1kbnr/pppp1ppp/8/4p3/6Pq/5P2/PPPPP2P/RNBQKBNR w KQkq - 1 3", Variant::Standard).unwrap();
    assert!(matches!(engine.best_move(&mated, QUICK), Err(EngineError::NoMove)));
    assert!(!engine.is_poisoned());
}

#[test]
fn top_k_is_capped_by_legal_moves() {
    let mut engine = classic();
    // The black king's only move is a8-a7.
    let pos = parse_fen("k7/2K5/8/8/8/8/8/1R6 b - - 0 1", Variant::Standard).unwrap();
    assert_eq!(pos.legal_moves().len(), 1);
    let moves = engine.top_k_moves(&pos, 3, QUICK).unwrap();
    assert_eq!(moves.len(), 1);
}

#[test]
fn top_ten_from_start_is_distinct_and_legal() {
    let mut engine = classic();
    let pos = Position::standard();
    let moves = engine.top_k_moves(&pos, 10, SearchLimit::Depth(10)).unwrap();
    assert_eq!(moves.len(), 10);
    let distinct: BTreeSet<_> = moves.iter().collect();
    assert_eq!(distinct.len(), 10);
    assert!(moves.iter().all(|m| pos.legal_moves().contains(m)));
    assert!(matches!(engine.top_k_moves(&pos, 0, QUICK), Err(EngineError::BadK(0))));
}

#[test]
fn chess960_castling_comes_back_in_rook_form() {
    let mut engine = classic();
    // Castling with h1 rook is the only way to escape mate threats cheaply;
    // any answer is fine as long as it maps onto a kernel-legal move.
    let pos = parse_fen("bqnb1rkr/pp3ppp/3ppn2/2p5/5P2/P2P4/NPP1P1PP/BQ1BNRKR w HFhf - 2 9", Variant::Chess960).unwrap();
    let moves = engine.top_k_moves(&pos, 5, QUICK).unwrap();
    assert!(moves.iter().all(|m| pos.legal_moves().contains(m)));
}

#[test]
fn classic_engine_refuses_horde() {
    let mut engine = classic();
    let err = engine.best_move(&Position::horde(), QUICK).err();
    assert!(matches!(err, Some(EngineError::UnsupportedVariant(Variant::Horde))));
}

#[test]
fn variant_engine_plays_horde() {
    let found = common::variant_engine();
    eprintln!("variant engine: {}", found.describe());
    let mut engine = Engine::spawn(&found.config).unwrap();
    let pos = Position::horde();
    let m = engine.best_move(&pos, QUICK).unwrap();
    assert!(pos.legal_moves().contains(&m));
    let black = pos.apply_unchecked(m);
    let reply = engine.best_move(&black, QUICK).unwrap();
    assert!(black.legal_moves().contains(&reply));
}

fn script(body: &str) -> EngineConfig {
    let mut cfg = EngineConfig::new("/bin/sh", EngineKind::Classic);
    cfg.args = vec!["-c".into(), body.into()];
    cfg
}

const SILENT_SEARCH: &str =
    r#"while read l; do case "$l" in uci) echo uciok;; isready) echo readyok;; esac; done"#;
const DIES_ON_GO: &str =
    r#"while read l; do case "$l" in uci) echo uciok;; isready) echo readyok;; go*) exit 3;; esac; done"#;

#[test]
fn timeout_poisons_handle() {
    let mut engine = Engine::spawn(&script(SILENT_SEARCH)).unwrap();
    let start = std::time::Instant::now();
    let err = engine.best_move(&Position::standard(), SearchLimit::Movetime(1)).err().unwrap();
    assert!(matches!(err, EngineError::Timeout(_)), "{err}");
    assert!(start.elapsed() < Duration::from_secs(8));
    assert!(engine.is_poisoned());
    assert!(matches!(engine.new_game(), Err(EngineError::Poisoned)));
}

#[test]
fn crash_poisons_handle() {
    let mut engine = Engine::spawn(&script(DIES_ON_GO)).unwrap();
    let err = engine.best_move(&Position::standard(), QUICK).err().unwrap();
    assert!(matches!(err, EngineError::Crashed), "{err}");
    assert!(matches!(engine.best_move(&Position::standard(), QUICK), Err(EngineError::Poisoned)));
}

#[test]
fn illegal_engine_answer_is_rejected() {
    let body = r#"while read l; do case "$l" in uci) echo uciok;; isready) echo readyok;; go*) echo "bestmove e2e5";; esac; done"#;
    let mut engine = Engine::spawn(&script(body)).unwrap();
    let err = engine.best_move(&Position::standard(), QUICK).err().unwrap();
    assert!(matches!(err, EngineError::IllegalMove { .. }), "{err}");
}
