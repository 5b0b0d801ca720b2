use log::warn;
use serde::{Deserialize, Serialize};

use super::legal::{check_move, IllegalCause};
use crate::kernel::{Position, Variant};
use crate::notation::fen::parse_fen;
use crate::notation::uci::{format_move, parse_legal_move};
use crate::policy::Policy;

/// A puzzle in Lichess form: `solution[0]` is the opponent's move that sets
/// the puzzle up, then player and opponent alternate, player first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PuzzleCase {
    pub id: String,
    pub fen: String,
    pub solution: Vec<String>,
}

impl PuzzleCase {
    /// Number of moves the player has to find.
    pub fn player_plies(&self) -> usize {
        self.solution.len() / 2
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PuzzleFailure {
    /// Legal move other than the solution's at a ply without a mate in one.
    Deviation { ply: usize, expected: String, played: String },
    /// A mate in one was available and the move played does not mate.
    MissedMate { ply: usize, played: String },
    Illegal { ply: usize, played: String, cause: IllegalCause },
    Transport { ply: usize, message: String },
    /// The stored solution itself does not replay.
    InvalidPuzzle { message: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PuzzleVerdict {
    pub id: String,
    pub correct: bool,
    pub failure: Option<PuzzleFailure>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PuzzleReport {
    pub total: usize,
    pub solved: usize,
    pub accuracy: f64,
    pub verdicts: Vec<PuzzleVerdict>,
}

impl PuzzleReport {
    pub fn merge(&mut self, other: &PuzzleReport) {
        self.total += other.total;
        self.solved += other.solved;
        self.verdicts.extend(other.verdicts.iter().cloned());
        self.accuracy = if self.total == 0 { 0.0 } else { self.solved as f64 / self.total as f64 };
    }
}

/// True when some legal move checkmates.
pub fn has_mate_in_one(pos: &Position) -> bool {
    pos.legal_moves().into_iter().any(|m| pos.apply_unchecked(m).is_checkmate())
}

/// Replays one puzzle against the policy. Every player ply must match the
/// solution, except that any mating move is accepted where a mate in one
/// exists.
pub fn solve_puzzle(policy: &mut dyn Policy, puzzle: &PuzzleCase) -> PuzzleVerdict {
    let failure = run(policy, puzzle).err();
    PuzzleVerdict { id: puzzle.id.clone(), correct: failure.is_none(), failure }
}

fn run(policy: &mut dyn Policy, puzzle: &PuzzleCase) -> Result<(), PuzzleFailure> {
    let invalid = |message: String| PuzzleFailure::InvalidPuzzle { message };
    let mut pos = parse_fen(&puzzle.fen, Variant::Standard).map_err(|e| invalid(e.to_string()))?;
    if puzzle.solution.len() < 2 {
        return Err(invalid("solution needs a setup move and at least one player move".into()));
    }
    policy.new_game().map_err(|e| PuzzleFailure::Transport { ply: 0, message: e.to_string() })?;
    for (i, text) in puzzle.solution.iter().enumerate() {
        let expected = parse_legal_move(&pos, text).ok_or_else(|| invalid(format!("solution move {i} ({text}) is illegal")))?;
        let player_ply = i % 2 == 1;
        if player_ply {
            let ply = i / 2 + 1;
            let verdict =
                policy.choose(&pos).map_err(|e| PuzzleFailure::Transport { ply, message: e.to_string() })?;
            let played = verdict.text.trim().to_string();
            let m = check_move(&pos, &played).map_err(|cause| PuzzleFailure::Illegal { ply, played: played.clone(), cause })?;
            if has_mate_in_one(&pos) {
                if !pos.apply_unchecked(m).is_checkmate() {
                    return Err(PuzzleFailure::MissedMate { ply, played });
                }
                // Mate ends the game whichever mating move was chosen.
                return Ok(());
            }
            if m != expected {
                return Err(PuzzleFailure::Deviation { ply, expected: format_move(&pos, expected), played });
            }
        }
        pos = pos.apply_unchecked(expected);
    }
    Ok(())
}

pub fn puzzle_sequence_accuracy(policy: &mut dyn Policy, puzzles: &[PuzzleCase]) -> PuzzleReport {
    let mut report = PuzzleReport::default();
    for p in puzzles {
        let verdict = solve_puzzle(policy, p);
        if let Some(PuzzleFailure::InvalidPuzzle { message }) = &verdict.failure {
            warn!("puzzle {} is invalid: {message}", p.id);
        }
        report.total += 1;
        report.solved += usize::from(verdict.correct);
        report.verdicts.push(verdict);
    }
    report.accuracy = if report.total == 0 { 0.0 } else { report.solved as f64 / report.total as f64 };
    report
}
