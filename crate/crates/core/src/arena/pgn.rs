//! PGN export. Games are written, never read back: validation replays the
//! recorded UCI moves through the kernel instead.

use std::fmt::Write as _;

use crate::kernel::{Color, Move, Position, Variant};
use crate::notation::san::to_san;

/// One game ready for export.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PgnGame {
    /// Tags in output order.
    pub tags: Vec<(String, String)>,
    /// SAN moves, without numbers or annotations.
    pub moves: Vec<String>,
    /// Comments keyed by the number of moves played before them.
    pub comments: Vec<(usize, String)>,
    pub result: String,
}

impl PgnGame {
    pub fn tag(&self, key: &str) -> Option<&str> {
        self.tags.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn set_tag(&mut self, key: &str, value: impl Into<String>) {
        let value = value.into();
        match self.tags.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.tags.push((key.to_string(), value)),
        }
    }
}

/// Value of the `Variant` tag, as Lichess spells it.
pub fn variant_tag(v: Variant) -> &'static str {
    match v {
        Variant::Standard => "Standard",
        Variant::Chess960 => "Chess960",
        Variant::Horde => "Horde",
    }
}

/// SAN for `moves` played from `start`. Every move must be legal.
pub fn san_moves(start: &Position, moves: &[Move]) -> Vec<String> {
    let mut pos = start.clone();
    moves
        .iter()
        .map(|&m| {
            let san = to_san(&pos, m);
            pos = pos.apply_unchecked(m);
            san
        })
        .collect()
}

fn escape(v: &str) -> String {
    v.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Renders tags and movetext, wrapping movetext at 80 columns.
pub fn write_pgn(game: &PgnGame, start: &Position) -> String {
    let mut out = String::new();
    for (k, v) in &game.tags {
        let _ = writeln!(out, "[{k} \"{}\"]", escape(v));
    }
    out.push('\n');

    let comments_at = |i: usize| {
        game.comments.iter().filter(move |(at, _)| *at == i).map(|(_, c)| format!("{{{}}}", c.replace(['{', '}'], "")))
    };
    let mut tokens: Vec<String> = comments_at(0).collect();
    let mut number = start.fullmove_number();
    let mut white = start.side_to_move() == Color::White;
    for (i, san) in game.moves.iter().enumerate() {
        if white {
            tokens.push(format!("{number}."));
        } else if i == 0 || game.comments.iter().any(|(at, _)| *at == i) {
            tokens.push(format!("{number}..."));
        }
        tokens.push(san.clone());
        tokens.extend(comments_at(i + 1));
        if !white {
            number += 1;
        }
        white = !white;
    }
    tokens.push(game.result.clone());

    let mut line = String::new();
    for t in tokens {
        if !line.is_empty() && line.len() + 1 + t.len() > 80 {
            out.push_str(&line);
            out.push('\n');
            line.clear();
        }
        if !line.is_empty() {
            line.push(' ');
        }
        line.push_str(&t);
    }
    out.push_str(&line);
    out.push_str("\n\n");
    out
}
