use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::BotError;
use crate::kernel::{Color, GameStatus, Position, Termination, Variant};
use crate::metrics::IllegalCause;
use crate::notation::fen::{format_fen, parse_fen};
use crate::notation::uci::parse_legal_move;

/// The policy move that made the bot resign.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IllegalAttempt {
    /// 1-based ply at which the move was asked for.
    pub ply: usize,
    pub text: String,
    /// `None` when the policy failed to answer at all.
    pub cause: Option<IllegalCause>,
}

/// One completed online game.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OnlineGameLog {
    pub game_id: String,
    pub variant: Variant,
    /// `bullet`, `blitz`, … as reported by the server.
    pub speed: Option<String>,
    pub rated: bool,
    pub our_color: Color,
    pub opponent: String,
    pub opponent_rating: Option<u32>,
    /// `Some(true)` for a human opponent, `Some(false)` for a bot or the
    /// server's AI, `None` if unknown.
    pub opponent_human: Option<bool>,
    pub initial_fen: String,
    /// UCI moves as the server recorded them.
    pub moves: Vec<String>,
    /// Position after `moves`.
    pub final_fen: String,
    /// Server status key: `mate`, `resign`, `draw`, `outoftime`, …
    pub status: String,
    pub winner: Option<Color>,
    /// Set iff the bot resigned because the policy's move was illegal or
    /// missing.
    pub illegal: Option<IllegalAttempt>,
}

impl OnlineGameLog {
    /// `1`, `0.5` or `0` from the bot's side; `None` for aborted games.
    pub fn our_score(&self) -> Option<f64> {
        if matches!(self.status.as_str(), "aborted" | "noStart") {
            return None;
        }
        Some(match self.winner {
            None => 0.5,
            Some(c) if c == self.our_color => 1.0,
            Some(_) => 0.0,
        })
    }

    /// Reporting bucket: the speed for standard games, else the variant.
    pub fn bucket(&self) -> String {
        match self.variant {
            Variant::Standard => capitalize(self.speed.as_deref().unwrap_or("standard")),
            Variant::Chess960 => "Chess960".into(),
            Variant::Horde => "Horde".into(),
        }
    }

    /// Replays the move list and checks it against the stored final
    /// position and, for rule-decided endings, the kernel's verdict.
    pub fn validate(&self) -> Result<Position, String> {
        let start = parse_fen(&self.initial_fen, self.variant).map_err(|e| format!("initial FEN: {e}"))?;
        let mut pos = start;
        for (i, text) in self.moves.iter().enumerate() {
            let m = parse_legal_move(&pos, text).ok_or_else(|| format!("ply {} ({text}) is illegal", i + 1))?;
            pos = pos.apply_unchecked(m);
        }
        let fen = format_fen(&pos);
        if fen != self.final_fen {
            return Err(format!("moves lead to {fen}, log says {}", self.final_fen));
        }
        let rules = pos.outcome();
        let expect = |ok: bool, what: &str| if ok { Ok(()) } else { Err(format!("status {} but {what}", self.status)) };
        match self.status.as_str() {
            "mate" => expect(rules.reason == Some(Termination::Checkmate) && rules.winner() == self.winner, "no such mate"),
            "stalemate" => expect(rules.reason == Some(Termination::Stalemate), "not stalemate"),
            "variantEnd" if self.variant == Variant::Horde => expect(
                rules.reason == Some(Termination::HordeAllCaptured) && self.winner == Some(Color::Black),
                "White still has pieces",
            ),
            _ => Ok(()),
        }?;
        if rules.status == GameStatus::Ongoing && self.status == "mate" {
            return Err("mate claimed in a live position".into());
        }
        if let Some(a) = &self.illegal {
            if a.ply != self.moves.len() + 1 {
                return Err(format!("illegal attempt at ply {} but {} moves were played", a.ply, self.moves.len()));
            }
        }
        Ok(pos)
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
}

/// Append-only JSONL game log; every entry is validated before it is
/// written.
pub struct GameLogWriter {
    path: PathBuf,
    file: File,
}

impl GameLogWriter {
    pub fn open(path: &Path) -> Result<GameLogWriter, BotError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(GameLogWriter { path: path.to_path_buf(), file })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&mut self, log: &OnlineGameLog) -> Result<(), BotError> {
        log.validate().map_err(|reason| BotError::InvalidLog { game: log.game_id.clone(), reason })?;
        let mut line = serde_json::to_string(log).map_err(std::io::Error::from)?;
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.flush()?;
        Ok(())
    }
}

/// Reads and revalidates a game log.
pub fn read_logs(path: &Path) -> Result<Vec<OnlineGameLog>, BotError> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let log: OnlineGameLog =
            serde_json::from_str(&line).map_err(|source| BotError::Decode { line: i + 1, source })?;
        log.validate().map_err(|reason| BotError::InvalidLog { game: log.game_id.clone(), reason })?;
        out.push(log);
    }
    Ok(out)
}

/// Win/draw/loss shares, opponent strength and human share for one bucket.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BucketStats {
    pub games: usize,
    pub win: f64,
    pub draw: f64,
    pub loss: f64,
    pub mean_opponent_rating: Option<f64>,
    /// Among games whose opponent type is known.
    pub human_share: Option<f64>,
    pub illegal_resignations: usize,
}

/// Aggregates completed (non-aborted) games per bucket.
pub fn online_stats(logs: &[OnlineGameLog]) -> BTreeMap<String, BucketStats> {
    let mut groups: BTreeMap<String, Vec<&OnlineGameLog>> = BTreeMap::new();
    for log in logs.iter().filter(|l| l.our_score().is_some()) {
        groups.entry(log.bucket()).or_default().push(log);
    }
    groups
        .into_iter()
        .map(|(bucket, games)| {
            let n = games.len() as f64;
            let share = |s: f64| games.iter().filter(|g| g.our_score() == Some(s)).count() as f64 / n;
            let ratings: Vec<f64> = games.iter().filter_map(|g| g.opponent_rating).map(f64::from).collect();
            let known: Vec<bool> = games.iter().filter_map(|g| g.opponent_human).collect();
            let stats = BucketStats {
                games: games.len(),
                win: share(1.0),
                draw: share(0.5),
                loss: share(0.0),
                mean_opponent_rating: (!ratings.is_empty()).then(|| ratings.iter().sum::<f64>() / ratings.len() as f64),
                human_share: (!known.is_empty())
                    .then(|| known.iter().filter(|&&h| h).count() as f64 / known.len() as f64),
                illegal_resignations: games.iter().filter(|g| g.illegal.is_some()).count(),
            };
            (bucket, stats)
        })
        .collect()
}

/// Buckets as columns, one row per statistic.
pub fn stats_table(stats: &BTreeMap<String, BucketStats>) -> String {
    let mut out = format!("{:<16}", "");
    for b in stats.keys() {
        let _ = write!(out, "{b:>10}");
    }
    out.push('\n');
    let pct = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{:.0}%", 100.0 * v));
    let rows: [(&str, Box<dyn Fn(&BucketStats) -> String>); 7] = [
        ("games", Box::new(|s| s.games.to_string())),
        ("win", Box::new(move |s| pct(Some(s.win)))),
        ("draw", Box::new(move |s| pct(Some(s.draw)))),
        ("loss", Box::new(move |s| pct(Some(s.loss)))),
        ("opponent Elo", Box::new(|s| s.mean_opponent_rating.map_or("-".into(), |r| format!("{r:.0}")))),
        ("human games", Box::new(move |s| pct(s.human_share))),
        ("illegal resigns", Box::new(|s| s.illegal_resignations.to_string())),
    ];
    for (label, f) in rows {
        let _ = write!(out, "{label:<16}");
        for s in stats.values() {
            let _ = write!(out, "{:>10}", f(s));
        }
        out.push('\n');
    }
    out
}
