//! Online bot bridge: exposes any [`Policy`] as a bot on a Lichess-style
//! server and logs every finished game.
//!
//! The event stream runs on the calling thread. Each accepted game gets
//! its own thread with its own policy handle, and finished games go over a
//! channel to a single log writer. Moves the kernel rejects are never
//! sent: the bot resigns instead and the log records the attempt.

mod api;
mod log;

use std::collections::HashSet;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{mpsc, Mutex};
use std::time::Duration;

pub use self::api::{
    ndjson, Account, BotApi, Challenge, Event, GameEvent, GameFull, GameRef, GameState, LichessClient, PlayerRef,
    Stream, VariantRef,
};
pub use self::log::{online_stats, read_logs, stats_table, BucketStats, GameLogWriter, IllegalAttempt, OnlineGameLog};

use crate::kernel::{Color, Position, Variant};
use crate::metrics::check_move;
use crate::notation::fen::{format_fen, parse_fen};
use crate::notation::uci::{format_move, parse_legal_move};
use crate::policy::{Policy, PolicyError};

/// Environment variable holding the API token.
pub const TOKEN_VAR: &str = "LICHESS_BOT_TOKEN";

#[derive(Debug, thiserror::Error)]
pub enum BotError {
    #[error("the server rejected the API token")]
    InvalidToken,
    #[error("server answered {status}: {body}")]
    Http { status: u16, body: String },
    #[error("network: {0}")]
    Network(String),
    #[error("undecodable server message on line {line}: {source}")]
    Decode { line: usize, source: serde_json::Error },
    #[error("server move list does not replay: {0}")]
    Desync(String),
    #[error("game {game} fails validation: {reason}")]
    InvalidLog { game: String, reason: String },
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl BotError {
    /// Errors after which reconnecting cannot help.
    pub fn is_fatal(&self) -> bool {
        matches!(self, BotError::InvalidToken)
    }
}

#[derive(Clone, Debug)]
pub struct BotConfig {
    /// Challenges in other variants are declined.
    pub variants: Vec<Variant>,
    /// Games played at once; further challenges are declined with `later`.
    pub max_games: usize,
    pub initial_backoff: Duration,
    pub max_backoff: Duration,
    /// Stop after this many consecutive failed reconnections; `None`
    /// retries forever.
    pub max_reconnects: Option<usize>,
}

impl Default for BotConfig {
    fn default() -> BotConfig {
        BotConfig {
            variants: Variant::ALL.to_vec(),
            max_games: 1,
            initial_backoff: Duration::from_secs(1),
            max_backoff: Duration::from_secs(60),
            max_reconnects: None,
        }
    }
}

/// Server variant keys for the variants we play.
pub fn variant_from_key(key: &str) -> Option<Variant> {
    match key {
        "standard" => Some(Variant::Standard),
        "chess960" => Some(Variant::Chess960),
        "horde" => Some(Variant::Horde),
        _ => None,
    }
}

/// A policy handle per game.
pub type PolicyFactory<'a> = dyn Fn() -> Result<Box<dyn Policy>, PolicyError> + Sync + 'a;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BotReport {
    pub games: Vec<OnlineGameLog>,
    pub accepted: Vec<String>,
    /// `(challenge id, reason)`.
    pub declined: Vec<(String, String)>,
    /// Event-stream reconnections made.
    pub reconnects: usize,
    /// Games that ended in an error instead of a log entry.
    pub failed_games: Vec<(String, String)>,
}

/// Runs until `stop` is set or reconnection gives up. An invalid token is
/// fatal; any other connection failure is retried with exponential backoff.
pub fn run_bot(
    api: &dyn BotApi,
    policy: &PolicyFactory<'_>,
    config: &BotConfig,
    log: &mut GameLogWriter,
    stop: &AtomicBool,
) -> Result<BotReport, BotError> {
    let me = api.account()?;
    ::log::info!("connected as {}", me.username);
    let report = Mutex::new(BotReport::default());
    let active = AtomicUsize::new(0);
    let running: Mutex<HashSet<String>> = Mutex::new(HashSet::new());
    let (tx, rx) = mpsc::channel::<OnlineGameLog>();

    let outcome = std::thread::scope(|scope| {
        let writer = scope.spawn(|| -> Result<(), BotError> {
            for game in rx {
                log.append(&game)?;
                report.lock().unwrap().games.push(game);
            }
            Ok(())
        });

        let events = || -> Result<(), BotError> {
            let mut backoff = config.initial_backoff;
            let mut failures = 0;
            while !stop.load(Ordering::Relaxed) {
                let mut delivered = false;
                match api.stream_events() {
                    Ok(stream) => {
                        for event in stream {
                            if stop.load(Ordering::Relaxed) {
                                break;
                            }
                            let event = match event {
                                Ok(e) => e,
                                Err(e) if e.is_fatal() => return Err(e),
                                Err(e) => {
                                    ::log::warn!("event stream: {e}");
                                    break;
                                }
                            };
                            delivered = true;
                            match event {
                                Event::Challenge { challenge } => {
                                    let verdict = match variant_from_key(&challenge.variant.key) {
                                        Some(v) if config.variants.contains(&v) => {
                                            if active.load(Ordering::SeqCst) >= config.max_games {
                                                Some("later")
                                            } else {
                                                None
                                            }
                                        }
                                        _ => Some("variant"),
                                    };
                                    let result = match verdict {
                                        Some(reason) => api.decline_challenge(&challenge.id, reason).map(|()| {
                                            report.lock().unwrap().declined.push((challenge.id.clone(), reason.into()))
                                        }),
                                        None => api
                                            .accept_challenge(&challenge.id)
                                            .map(|()| report.lock().unwrap().accepted.push(challenge.id.clone())),
                                    };
                                    match result {
                                        Err(e) if e.is_fatal() => return Err(e),
                                        Err(e) => ::log::warn!("challenge {}: {e}", challenge.id),
                                        Ok(()) => {}
                                    }
                                }
                                Event::GameStart { game } => {
                                    if !running.lock().unwrap().insert(game.id.clone()) {
                                        continue;
                                    }
                                    active.fetch_add(1, Ordering::SeqCst);
                                    let (tx, me, running, active, report) = (tx.clone(), &me, &running, &active, &report);
                                    scope.spawn(move || {
                                        let result = policy()
                                            .map_err(BotError::from)
                                            .and_then(|mut p| play_online(api, &game.id, &me.id, p.as_mut(), config));
                                        match result {
                                            Ok(Some(log)) => {
                                                let _ = tx.send(log);
                                            }
                                            Ok(None) => {}
                                            Err(e) => {
                                                ::log::error!("game {}: {e}", game.id);
                                                report.lock().unwrap().failed_games.push((game.id.clone(), e.to_string()));
                                            }
                                        }
                                        running.lock().unwrap().remove(&game.id);
                                        active.fetch_sub(1, Ordering::SeqCst);
                                    });
                                }
                                _ => {}
                            }
                        }
                    }
                    Err(e) if e.is_fatal() => return Err(e),
                    Err(e) => ::log::warn!("event stream: {e}"),
                }
                if stop.load(Ordering::Relaxed) {
                    break;
                }
                if delivered {
                    backoff = config.initial_backoff;
                    failures = 0;
                } else {
                    failures += 1;
                }
                if config.max_reconnects.is_some_and(|max| failures > max) {
                    ::log::warn!("giving up after {failures} failed reconnections");
                    break;
                }
                report.lock().unwrap().reconnects += 1;
                std::thread::sleep(backoff);
                backoff = (backoff * 2).min(config.max_backoff);
            }
            Ok(())
        };
        let result = events();
        drop(tx);
        // Game threads hold senders; the writer ends once they finish.
        let written = writer.join().expect("log writer panicked");
        result.and(written)
    });
    outcome?;
    Ok(report.into_inner().unwrap())
}

fn color_of(s: &str) -> Option<Color> {
    match s {
        "white" => Some(Color::White),
        "black" => Some(Color::Black),
        _ => None,
    }
}

/// Plays one game to its end. Returns `None` for games we should not have
/// been in (unsupported variant), which are resigned unlogged.
pub fn play_online(
    api: &dyn BotApi,
    game_id: &str,
    my_id: &str,
    policy: &mut dyn Policy,
    config: &BotConfig,
) -> Result<Option<OnlineGameLog>, BotError> {
    let mut full: Option<GameFull> = None;
    let mut start: Option<Position> = None;
    let mut illegal: Option<IllegalAttempt> = None;
    let mut moved_at: Option<usize> = None;
    let mut backoff = config.initial_backoff;
    let mut attempts = 0;
    policy.new_game()?;
    loop {
        let stream = match api.stream_game(game_id) {
            Ok(s) => s,
            Err(e) if e.is_fatal() => return Err(e),
            Err(e) => {
                attempts += 1;
                if config.max_reconnects.is_some_and(|max| attempts > max) {
                    return Err(e);
                }
                std::thread::sleep(backoff);
                backoff = (backoff * 2).min(config.max_backoff);
                continue;
            }
        };
        for event in stream {
            let state = match event {
                Ok(GameEvent::GameFull(g)) => {
                    let Some(variant) = variant_from_key(&g.variant.key).filter(|v| config.variants.contains(v)) else {
                        ::log::warn!("game {game_id} is {}; resigning", g.variant.key);
                        api.resign(game_id)?;
                        return Ok(None);
                    };
                    let pos = if g.initial_fen == "startpos" {
                        Position::startpos(variant)
                    } else {
                        parse_fen(&g.initial_fen, variant).map_err(|e| BotError::Desync(format!("initial FEN: {e}")))?
                    };
                    start = Some(pos);
                    let state = g.state.clone();
                    full = Some(*g);
                    state
                }
                Ok(GameEvent::GameState(s)) => s,
                Ok(GameEvent::Other) => continue,
                Err(e) if e.is_fatal() => return Err(e),
                Err(e) => {
                    ::log::warn!("game {game_id} stream: {e}");
                    break;
                }
            };
            let (Some(g), Some(start)) = (&full, &start) else {
                return Err(BotError::Desync("game state before gameFull".into()));
            };
            let moves: Vec<String> = state.moves.split_whitespace().map(str::to_string).collect();
            let mut pos = start.clone();
            for (i, text) in moves.iter().enumerate() {
                let m = parse_legal_move(&pos, text)
                    .ok_or_else(|| BotError::Desync(format!("server ply {} ({text}) in {}", i + 1, format_fen(&pos))))?;
                pos = pos.apply_unchecked(m);
            }
            let ours = if g.white.id.as_deref() == Some(my_id) { Color::White } else { Color::Black };
            if state.is_over() {
                let opponent = if ours == Color::White { &g.black } else { &g.white };
                return Ok(Some(OnlineGameLog {
                    game_id: game_id.to_string(),
                    variant: start.variant(),
                    speed: g.speed.clone(),
                    rated: g.rated,
                    our_color: ours,
                    opponent: opponent.display(),
                    opponent_rating: opponent.rating,
                    opponent_human: opponent.is_human(),
                    initial_fen: format_fen(start),
                    final_fen: format_fen(&pos),
                    moves,
                    status: state.status.clone(),
                    winner: state.winner.as_deref().and_then(color_of),
                    illegal: illegal.clone(),
                }));
            }
            if pos.side_to_move() != ours || moved_at == Some(moves.len()) || illegal.is_some() {
                continue;
            }
            moved_at = Some(moves.len());
            let answer = policy.choose(&pos);
            let checked = match &answer {
                Ok(v) => check_move(&pos, &v.text).map_err(Some),
                Err(_) => Err(None),
            };
            match checked {
                Ok(m) => match api.make_move(game_id, &format_move(&pos, m)) {
                    Err(e) if e.is_fatal() => return Err(e),
                    Err(e) => {
                        // Ask again on the next state update.
                        ::log::warn!("game {game_id}: move not sent: {e}");
                        moved_at = None;
                    }
                    Ok(()) => {}
                },
                Err(cause) => {
                    let text = match answer {
                        Ok(v) => v.text,
                        Err(e) => format!("<{e}>"),
                    };
                    ::log::warn!("game {game_id}: policy answered {text:?} at ply {}; resigning", moves.len() + 1);
                    illegal = Some(IllegalAttempt { ply: moves.len() + 1, text, cause });
                    api.resign(game_id)?;
                }
            }
        }
        attempts += 1;
        if config.max_reconnects.is_some_and(|max| attempts > max) {
            return Err(BotError::Network(format!("game {game_id} stream ended before the game did")));
        }
        std::thread::sleep(backoff);
        backoff = (backoff * 2).min(config.max_backoff);
    }
}
