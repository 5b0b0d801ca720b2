//! Small self-contained UCI engine used as a stand-in oracle when no external
//! engine is configured. It plays legal, material-aware chess for all three
//! variants via a shallow alpha-beta search; it is not meant to be strong.
//!
//! Supported: `uci`, `isready`, `ucinewgame`, `setoption` (MultiPV, Skill
//! Level, UCI_Variant, UCI_Chess960), `position fen|startpos [moves …]`,
//! `go depth N`, `go movetime MS`, `go perft N`, `quit`.

use std::io::{self, BufRead, Write};
use std::time::{Duration, Instant};

use oodchess::kernel::{Color, Move, PieceKind, Position, Variant};
use oodchess::notation::fen::parse_fen;
use oodchess::notation::uci::{format_move, parse_legal_move};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MATE: i32 = 100_000;
/// Searches deeper than this are clamped; the engine is a stand-in.
const MAX_DEPTH: u32 = 3;

struct State {
    multipv: usize,
    skill: u32,
    horde: bool,
    chess960: bool,
    pos: Position,
    rng: ChaCha8Rng,
}

impl State {
    fn variant(&self) -> Variant {
        if self.horde {
            Variant::Horde
        } else if self.chess960 {
            Variant::Chess960
        } else {
            Variant::Standard
        }
    }
}

fn main() {
    let stdin = io::stdin();
    let mut out = io::stdout().lock();
    let mut st = State {
        multipv: 1,
        skill: 20,
        horde: false,
        chess960: false,
        pos: Position::standard(),
        rng: ChaCha8Rng::seed_from_u64(0),
    };
    for line in stdin.lock().lines() {
        let Ok(line) = line else { break };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.first().copied() {
            Some("uci") => {
                let _ = writeln!(out, "id name oodchess-refengine");
                let _ = writeln!(out, "id author oodchess");
                let _ = writeln!(out, "option name MultiPV type spin default 1 min 1 max 256");
                let _ = writeln!(out, "option name Skill Level type spin default 20 min 0 max 20");
                let _ = writeln!(out, "option name UCI_Variant type combo default chess var chess var horde");
                let _ = writeln!(out, "option name UCI_Chess960 type check default false");
                let _ = writeln!(out, "uciok");
            }
            Some("isready") => {
                let _ = writeln!(out, "readyok");
            }
            Some("ucinewgame") => st.rng = ChaCha8Rng::seed_from_u64(0),
            Some("setoption") => set_option(&mut st, &tokens),
            Some("position") => {
                if let Some(pos) = parse_position(&tokens, st.variant()) {
                    st.pos = pos;
                }
            }
            Some("go") => go(&mut st, &tokens, &mut out),
            Some("quit") => break,
            _ => {}
        }
        let _ = out.flush();
    }
}

fn set_option(st: &mut State, tokens: &[&str]) {
    let Some(value_at) = tokens.iter().position(|&t| t == "value") else { return };
    let name = tokens[2..value_at].join(" ");
    let value = tokens[value_at + 1..].join(" ");
    match name.as_str() {
        "MultiPV" => st.multipv = value.parse().unwrap_or(1).clamp(1, 256),
        "Skill Level" => st.skill = value.parse().unwrap_or(20).min(20),
        "UCI_Variant" => st.horde = value == "horde",
        "UCI_Chess960" => st.chess960 = value == "true",
        _ => {}
    }
}

fn parse_position(tokens: &[&str], variant: Variant) -> Option<Position> {
    let moves_at = tokens.iter().position(|&t| t == "moves").unwrap_or(tokens.len());
    let mut pos = match tokens.get(1).copied() {
        Some("startpos") => Position::startpos(variant),
        Some("fen") => parse_fen(&tokens[2..moves_at].join(" "), variant).ok()?,
        _ => return None,
    };
    for text in tokens.iter().skip(moves_at + 1) {
        let m = parse_legal_move(&pos, text)?;
        pos = pos.apply_unchecked(m);
    }
    Some(pos)
}

fn go(st: &mut State, tokens: &[&str], out: &mut impl Write) {
    let arg = |key: &str| tokens.iter().position(|&t| t == key).and_then(|i| tokens.get(i + 1)).and_then(|v| v.parse::<u64>().ok());
    if let Some(depth) = arg("perft") {
        let _ = writeln!(out, "Nodes searched: {}", st.pos.perft(depth as u32));
        return;
    }
    let (max_depth, budget) = match (arg("depth"), arg("movetime")) {
        (Some(d), _) => ((d as u32).clamp(1, MAX_DEPTH), None),
        (None, Some(ms)) => (MAX_DEPTH, Some(Duration::from_millis(ms))),
        _ => (MAX_DEPTH, None),
    };
    let pos = st.pos.clone();
    let root = pos.legal_moves();
    if root.is_empty() {
        let _ = writeln!(out, "info depth 0 score mate 0");
        let _ = writeln!(out, "bestmove (none)");
        return;
    }
    let start = Instant::now();
    let noise = (20 - st.skill) as i32 * 25;
    let mut scored: Vec<(i32, Move)> = Vec::new();
    for depth in 1..=max_depth {
        let mut this: Vec<(i32, Move)> = root
            .iter()
            .map(|&m| (-negamax(&pos.apply_unchecked(m), depth - 1, -MATE - 1, MATE + 1, 1), m))
            .collect();
        this.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        scored = this;
        for (i, (score, m)) in scored.iter().take(st.multipv).enumerate() {
            let _ = writeln!(out, "info depth {depth} multipv {} score cp {score} pv {}", i + 1, format_move(&pos, *m));
        }
        if let Some(b) = budget {
            if start.elapsed() * 4 > b {
                break;
            }
        }
    }
    let pick = if noise > 0 {
        let noisy = scored.iter().map(|&(s, m)| (s + st.rng.gen_range(-noise..=noise), m));
        noisy.max_by(|a, b| a.0.cmp(&b.0).then_with(|| b.1.cmp(&a.1))).map(|(_, m)| m)
    } else {
        scored.first().map(|&(_, m)| m)
    };
    let best = pick.expect("root has moves");
    let _ = writeln!(out, "bestmove {}", format_move(&pos, best));
}

fn negamax(pos: &Position, depth: u32, mut alpha: i32, beta: i32, ply: i32) -> i32 {
    if pos.variant() == Variant::Horde && pos.board().by_color(Color::White).is_empty() {
        let white_to_move = pos.side_to_move() == Color::White;
        return if white_to_move { -MATE + ply } else { MATE - ply };
    }
    let mut moves = pos.legal_moves();
    if moves.is_empty() {
        return if pos.is_check() { -MATE + ply } else { 0 };
    }
    if pos.halfmove_clock() >= 100 {
        return 0;
    }
    if depth == 0 {
        return evaluate(pos);
    }
    moves.sort_by_key(|&m| std::cmp::Reverse(pos.piece_at(m.to).map(|p| value(p.kind)).unwrap_or(0)));
    for m in moves {
        let score = -negamax(&pos.apply_unchecked(m), depth - 1, -beta, -alpha, ply + 1);
        if score >= beta {
            return beta;
        }
        alpha = alpha.max(score);
    }
    alpha
}

fn value(kind: PieceKind) -> i32 {
    match kind {
        PieceKind::Pawn => 100,
        PieceKind::Knight => 320,
        PieceKind::Bishop => 330,
        PieceKind::Rook => 500,
        PieceKind::Queen => 900,
        PieceKind::King => 0,
    }
}

/// Material plus a small centralization term, from the mover's view.
fn evaluate(pos: &Position) -> i32 {
    let mut score = 0;
    for (sq, piece) in pos.board().iter() {
        let file_center = 3 - (i32::from(sq.file()) * 2 - 7).abs() / 2;
        let rank_center = 3 - (i32::from(sq.rank()) * 2 - 7).abs() / 2;
        let v = value(piece.kind) + if piece.kind == PieceKind::King { 0 } else { 4 * (file_center + rank_center) };
        score += if piece.color == Color::White { v } else { -v };
    }
    if pos.side_to_move() == Color::White {
        score
    } else {
        -score
    }
}
