use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ArenaError;
use crate::kernel::Position;
use crate::notation::uci::parse_legal_move;

/// A small ECO-coded book shipped with the crate.
pub const BUNDLED_ECO: &str = include_str!("../../data/eco.tsv");

/// A named line of UCI moves from the standard start.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Opening {
    pub id: String,
    pub name: String,
    pub moves: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OpeningBook {
    pub openings: Vec<Opening>,
}

impl OpeningBook {
    /// Parses `id<TAB>name<TAB>uci moves` lines; `#` starts a comment line.
    /// Every line must replay legally from the standard start.
    pub fn parse(text: &str) -> Result<OpeningBook, ArenaError> {
        let mut openings = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let bad = |reason: String| ArenaError::Book { line: i + 1, reason };
            let mut cols = line.split('\t');
            let (Some(id), Some(name), Some(moves)) = (cols.next(), cols.next(), cols.next()) else {
                return Err(bad("expected three tab-separated columns".into()));
            };
            let moves: Vec<String> = moves.split_whitespace().map(str::to_string).collect();
            if moves.is_empty() {
                return Err(bad("no moves".into()));
            }
            let mut pos = Position::standard();
            for m in &moves {
                let mv = parse_legal_move(&pos, m).ok_or_else(|| bad(format!("{m} is not legal here")))?;
                pos = pos.apply_unchecked(mv);
            }
            openings.push(Opening { id: id.trim().to_string(), name: name.trim().to_string(), moves });
        }
        if openings.is_empty() {
            return Err(ArenaError::Book { line: 0, reason: "book is empty".into() });
        }
        Ok(OpeningBook { openings })
    }

    pub fn load(path: &Path) -> Result<OpeningBook, ArenaError> {
        OpeningBook::parse(&std::fs::read_to_string(path)?)
    }

    pub fn bundled() -> OpeningBook {
        OpeningBook::parse(BUNDLED_ECO).expect("bundled book is valid")
    }

    pub fn len(&self) -> usize {
        self.openings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.openings.is_empty()
    }
}
