use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ArenaError, MatchResult, TournamentReport};
use crate::elo::Game;
use crate::kernel::{Color, GameStatus};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PlayerScore {
    pub name: String,
    pub games: usize,
    pub wins: usize,
    pub draws: usize,
    pub losses: usize,
    /// `1·wins + 0.5·draws`.
    pub points: f64,
    /// `points / games`.
    pub score: f64,
    /// Fraction of the player's games that were drawn.
    pub draw_rate: f64,
    pub white_games: usize,
    /// Games this player lost by an illegal, failed or crashed move.
    pub forfeits: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    /// In the order the players were given.
    pub players: Vec<PlayerScore>,
}

impl ScoreTable {
    /// Tallies `results` for `names`; games of unknown players are ignored.
    pub fn from_results(names: &[String], results: &[MatchResult]) -> ScoreTable {
        let mut players: Vec<PlayerScore> =
            names.iter().map(|n| PlayerScore { name: n.clone(), ..Default::default() }).collect();
        for r in results {
            for (color, name) in [(Color::White, &r.white), (Color::Black, &r.black)] {
                let Some(p) = players.iter_mut().find(|p| &p.name == name) else { continue };
                p.games += 1;
                if color == Color::White {
                    p.white_games += 1;
                }
                match (r.outcome.status, r.outcome.winner()) {
                    (GameStatus::Draw, _) => p.draws += 1,
                    (_, Some(w)) if w == color => p.wins += 1,
                    (_, Some(_)) => p.losses += 1,
                    (GameStatus::Ongoing, _) => {}
                    _ => {}
                }
                if r.forfeit.as_ref().is_some_and(|f| f.color == color) {
                    p.forfeits += 1;
                }
            }
        }
        for p in &mut players {
            p.points = p.wins as f64 + 0.5 * p.draws as f64;
            if p.games > 0 {
                p.score = p.points / p.games as f64;
                p.draw_rate = p.draws as f64 / p.games as f64;
            }
        }
        ScoreTable { players }
    }

    pub fn get(&self, name: &str) -> Option<&PlayerScore> {
        self.players.iter().find(|p| p.name == name)
    }

    pub fn to_text(&self) -> String {
        let width = self.players.iter().map(|p| p.name.len()).max().unwrap_or(4).max(6);
        let mut out = format!(
            "{:<width$}  {:>5}  {:>4}  {:>4}  {:>4}  {:>7}  {:>6}  {:>6}  {:>8}\n",
            "player", "games", "W", "D", "L", "points", "score", "draws", "forfeits"
        );
        for p in &self.players {
            let _ = writeln!(
                out,
                "{:<width$}  {:>5}  {:>4}  {:>4}  {:>4}  {:>7.1}  {:>5.1}%  {:>5.1}%  {:>8}",
                p.name,
                p.games,
                p.wins,
                p.draws,
                p.losses,
                p.points,
                100.0 * p.score,
                100.0 * p.draw_rate,
                p.forfeits
            );
        }
        out
    }
}

/// Finished games in the form the rating estimator takes.
pub fn rating_games(results: &[MatchResult]) -> Vec<Game> {
    results
        .iter()
        .filter(|r| r.outcome.is_over())
        .map(|r| Game { white: r.white.clone(), black: r.black.clone(), white_score: r.outcome.score_for(Color::White) })
        .collect()
}

/// Writes `results.jsonl`, `games.pgn` and `scores.txt` into `dir`.
pub fn write_tournament(dir: &Path, report: &TournamentReport) -> Result<(), ArenaError> {
    fs::create_dir_all(dir)?;
    write_results(dir, &report.results)?;
    fs::write(dir.join("scores.txt"), report.scores.to_text())?;
    Ok(())
}

/// Writes the JSONL results and the PGN file; also used for the partial
/// results of an aborted tournament.
pub fn write_results(dir: &Path, results: &[MatchResult]) -> Result<(), ArenaError> {
    fs::create_dir_all(dir)?;
    let mut jsonl = std::io::BufWriter::new(fs::File::create(dir.join("results.jsonl"))?);
    for r in results {
        serde_json::to_writer(&mut jsonl, r).map_err(std::io::Error::from)?;
        jsonl.write_all(b"\n")?;
    }
    jsonl.flush()?;
    let pgn: String = results.iter().map(|r| r.pgn.as_str()).collect();
    fs::write(dir.join("games.pgn"), pgn)?;
    Ok(())
}
