//! Round-robin tournaments between engines, policies and baselines.
//!
//! A [`TournamentPlan`] names the players, the variant, how many games
//! each pair plays and where openings come from. [`run_tournament`] plays
//! every game on a worker pool and returns results in a fixed order
//! `(pair, game)` whatever order they finished in, together with the
//! per-player [`ScoreTable`].

mod book;
mod game;
pub mod pgn;
mod scores;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{mpsc, Arc};
use std::time::Duration;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use book::{Opening, OpeningBook, BUNDLED_ECO};
pub use game::{play_game, Forfeit, ForfeitReason, GameSetup, MatchResult};
pub use scores::{rating_games, write_results, write_tournament, PlayerScore, ScoreTable};

use crate::engine::{Engine, EngineConfig, EngineError, EngineKind, SearchLimit};
use crate::kernel::{Position, Variant};
use crate::notation::uci::format_move;
use crate::ood::chess960_back_rank;
use crate::policy::{EnginePolicy, Policy, PolicyEndpoint, PolicyError, RandomLegal, WirePolicy};

/// Ply cap after which a game is adjudicated a draw.
pub const DEFAULT_MAX_PLIES: usize = 400;
/// Per-move time for skill-limited engines when no limit is configured.
pub const DEFAULT_MOVETIME_MS: u64 = 50;
/// Scharnagl number of the classical start.
const CLASSICAL_ID: u16 = 518;

#[derive(Debug, thiserror::Error)]
pub enum ArenaError {
    #[error("invalid tournament plan: {0}")]
    InvalidPlan(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("opening book line {line}: {reason}")]
    Book { line: usize, reason: String },
    #[error("tournament aborted after {} games: {reason}", partial.len())]
    Aborted { partial: Vec<MatchResult>, reason: String },
}

/// Builds a fresh policy for one game; the argument is the game seed.
#[derive(Clone)]
pub struct Factory(pub Arc<dyn Fn(u64) -> Result<Box<dyn Policy>, PolicyError> + Send + Sync>);

impl Factory {
    pub fn new(f: impl Fn(u64) -> Result<Box<dyn Policy>, PolicyError> + Send + Sync + 'static) -> Factory {
        Factory(Arc::new(f))
    }
}

impl fmt::Debug for Factory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Factory(..)")
    }
}

/// What stands behind a player name.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PlayerBacking {
    /// A UCI engine, optionally weakened. Without `depth` or `movetime_ms`
    /// each move gets [`DEFAULT_MOVETIME_MS`].
    Engine {
        path: PathBuf,
        #[serde(default)]
        variant_capable: bool,
        skill: Option<u32>,
        movetime_ms: Option<u64>,
        depth: Option<u32>,
        #[serde(default)]
        options: BTreeMap<String, String>,
    },
    /// A policy server speaking the line protocol.
    Policy {
        endpoint: String,
        #[serde(default = "default_policy_timeout")]
        timeout_ms: u64,
    },
    RandomLegal,
    /// In-process policy; only constructible from code.
    #[serde(skip)]
    Custom(Factory),
}

fn default_policy_timeout() -> u64 {
    30_000
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlayerSpec {
    pub name: String,
    #[serde(flatten)]
    pub backing: PlayerBacking,
}

impl PlayerSpec {
    pub fn random_legal(name: &str) -> PlayerSpec {
        PlayerSpec { name: name.to_string(), backing: PlayerBacking::RandomLegal }
    }

    pub fn engine(name: &str, path: impl Into<PathBuf>, skill: Option<u32>) -> PlayerSpec {
        PlayerSpec {
            name: name.to_string(),
            backing: PlayerBacking::Engine {
                path: path.into(),
                variant_capable: false,
                skill,
                movetime_ms: None,
                depth: None,
                options: BTreeMap::new(),
            },
        }
    }

    pub fn custom(
        name: &str,
        f: impl Fn(u64) -> Result<Box<dyn Policy>, PolicyError> + Send + Sync + 'static,
    ) -> PlayerSpec {
        PlayerSpec { name: name.to_string(), backing: PlayerBacking::Custom(Factory::new(f)) }
    }

    pub fn supports(&self, variant: Variant) -> bool {
        match &self.backing {
            PlayerBacking::Engine { variant_capable, .. } => engine_kind(*variant_capable).supports(variant),
            _ => true,
        }
    }

    /// A fresh, exclusively owned handle for one game.
    pub fn instantiate(&self, variant: Variant, seed: u64) -> Result<Box<dyn Policy>, PolicyError> {
        match &self.backing {
            PlayerBacking::Engine { path, variant_capable, skill, movetime_ms, depth, options } => {
                let mut config = EngineConfig::new(path, engine_kind(*variant_capable));
                config.options = options.clone();
                let mut engine = Engine::spawn(&config)?;
                if let Some(level) = skill {
                    engine.set_skill(*level)?;
                }
                engine.configure_variant(variant)?;
                let limit = match (depth, movetime_ms) {
                    (Some(d), _) => SearchLimit::Depth(*d),
                    (None, ms) => SearchLimit::Movetime(ms.unwrap_or(DEFAULT_MOVETIME_MS)),
                };
                Ok(Box::new(EnginePolicy::new(self.name.clone(), engine, limit)))
            }
            PlayerBacking::Policy { endpoint, timeout_ms } => {
                let endpoint: PolicyEndpoint =
                    endpoint.parse().map_err(|e| PolicyError::Malformed(format!("endpoint {endpoint:?}: {e}")))?;
                Ok(Box::new(WirePolicy::connect(&endpoint, Duration::from_millis(*timeout_ms))?))
            }
            PlayerBacking::RandomLegal => Ok(Box::new(RandomLegal::new(seed))),
            PlayerBacking::Custom(factory) => (factory.0)(seed),
        }
    }
}

fn engine_kind(variant_capable: bool) -> EngineKind {
    if variant_capable {
        EngineKind::VariantCapable
    } else {
        EngineKind::Classic
    }
}

/// Engine that plays the opening moves of Chess960 games.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OraclePrep {
    pub path: PathBuf,
    #[serde(default = "default_prep_plies")]
    pub plies: usize,
    #[serde(default = "default_prep_depth")]
    pub depth: u32,
    #[serde(default = "default_prep_skill")]
    pub skill: u32,
}

fn default_prep_plies() -> usize {
    20
}
fn default_prep_depth() -> u32 {
    20
}
fn default_prep_skill() -> u32 {
    20
}

/// Where each game starts.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum OpeningSource {
    /// The variant's own starting position.
    #[default]
    None,
    /// Lines from an ECO book (the bundled one without `path`), chosen
    /// uniformly per pairing slot.
    Book { path: Option<PathBuf> },
    /// A random non-classical Chess960 start per slot, optionally followed
    /// by oracle moves.
    Chess960 { prep: Option<OraclePrep> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TournamentPlan {
    pub name: String,
    pub variant: Variant,
    pub players: Vec<PlayerSpec>,
    /// Games per pair of players; even, split equally between colors.
    pub games_per_pair: usize,
    #[serde(default)]
    pub openings: OpeningSource,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_plies")]
    pub max_plies: usize,
    /// Parallel games; defaults to the number of logical cores.
    pub workers: Option<usize>,
}

fn default_max_plies() -> usize {
    DEFAULT_MAX_PLIES
}

impl TournamentPlan {
    pub fn validate(&self) -> Result<(), ArenaError> {
        let bad = |m: String| Err(ArenaError::InvalidPlan(m));
        if self.players.len() < 2 {
            return bad(format!("need at least two players, got {}", self.players.len()));
        }
        let mut seen = HashSet::new();
        for p in &self.players {
            if p.name.trim().is_empty() {
                return bad("player names must not be empty".into());
            }
            if !seen.insert(p.name.as_str()) {
                return bad(format!("duplicate player name {:?}", p.name));
            }
            if !p.supports(self.variant) {
                return bad(format!("{} cannot play {}", p.name, self.variant));
            }
        }
        if self.games_per_pair == 0 || self.games_per_pair % 2 != 0 {
            return bad(format!("games_per_pair must be even and positive, got {}", self.games_per_pair));
        }
        if self.max_plies == 0 {
            return bad("max_plies must be positive".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be positive".into());
        }
        match (&self.openings, self.variant) {
            (OpeningSource::Book { .. }, Variant::Standard) | (OpeningSource::None, _) => {}
            (OpeningSource::Chess960 { .. }, Variant::Chess960) => {}
            (src, v) => return bad(format!("opening source {src:?} does not apply to {v}")),
        }
        Ok(())
    }

    /// `(white, black)` player indices for every game, in result order.
    /// Pairs are taken in player order; the lower index has White in the
    /// even games, so each player of a pair gets exactly half the Whites.
    pub fn schedule(&self) -> Vec<(usize, usize, usize, usize)> {
        let n = self.players.len();
        let mut out = Vec::new();
        let mut pair = 0;
        for i in 0..n {
            for j in i + 1..n {
                for g in 0..self.games_per_pair {
                    let (w, b) = if g % 2 == 0 { (i, j) } else { (j, i) };
                    out.push((pair, g, w, b));
                }
                pair += 1;
            }
        }
        out
    }
}

/// Everything a tournament produced.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TournamentReport {
    pub name: String,
    pub variant: Variant,
    pub results: Vec<MatchResult>,
    pub scores: ScoreTable,
}

struct Job {
    pair: usize,
    game: usize,
    white: usize,
    black: usize,
    seed: u64,
    slot: usize,
}

/// A prepared start shared by both games of a pairing slot.
#[derive(Clone, Debug)]
struct SlotStart {
    opening: Option<String>,
    start: Position,
    moves: Vec<String>,
    prep_plies: usize,
}

fn worker_count(plan: &TournamentPlan) -> usize {
    plan.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Plays every scheduled game. Games run in parallel with their own player
/// handles. A game whose player crashed is replayed once with fresh
/// handles; if a player cannot even be started twice in a row the
/// tournament stops and [`ArenaError::Aborted`] carries what finished.
pub fn run_tournament(plan: &TournamentPlan) -> Result<TournamentReport, ArenaError> {
    plan.validate()?;
    let mut rng = crate::seeded_rng(plan.seed);
    let schedule = plan.schedule();
    let slots_per_pair = plan.games_per_pair / 2;
    let n_slots = schedule.iter().map(|&(p, ..)| p).max().map_or(0, |p| p + 1) * slots_per_pair;
    let starts = prepare_starts(plan, n_slots, &mut rng)?;
    let jobs: Vec<Job> = schedule
        .into_iter()
        .map(|(pair, game, white, black)| Job { pair, game, white, black, seed: rng.gen(), slot: pair * slots_per_pair + game / 2 })
        .collect();

    let workers = worker_count(plan).min(jobs.len()).max(1);
    let next = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<Result<MatchResult, String>>();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let (jobs, starts, next, stop) = (&jobs, &starts, &next, &stop);
            scope.spawn(move || loop {
                if stop.load(Ordering::Relaxed) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = jobs.get(i) else { break };
                let outcome = play_job(plan, job, &starts[job.slot]);
                if outcome.is_err() {
                    stop.store(true, Ordering::Relaxed);
                }
                if tx.send(outcome).is_err() {
                    break;
                }
            });
        }
    });
    drop(tx);

    let mut results = Vec::with_capacity(jobs.len());
    let mut failure = None;
    for r in rx {
        match r {
            Ok(m) => results.push(m),
            Err(e) => failure = failure.or(Some(e)),
        }
    }
    results.sort_by_key(|m| (m.pair, m.game));
    if let Some(reason) = failure {
        log::error!("tournament {} aborted: {reason}", plan.name);
        return Err(ArenaError::Aborted { partial: results, reason });
    }
    let names: Vec<String> = plan.players.iter().map(|p| p.name.clone()).collect();
    let scores = ScoreTable::from_results(&names, &results);
    Ok(TournamentReport { name: plan.name.clone(), variant: plan.variant, results, scores })
}

fn play_job(plan: &TournamentPlan, job: &Job, slot: &SlotStart) -> Result<MatchResult, String> {
    let (w, b) = (&plan.players[job.white], &plan.players[job.black]);
    let setup = GameSetup {
        variant: plan.variant,
        start: slot.start.clone(),
        opening: slot.opening.clone(),
        opening_moves: slot.moves.clone(),
        prep_plies: slot.prep_plies,
        max_plies: plan.max_plies,
        event: plan.name.clone(),
        round: format!("{}.{}", job.pair + 1, job.game + 1),
    };
    let mut replayed = false;
    loop {
        let players = w
            .instantiate(plan.variant, job.seed)
            .map_err(|e| (&w.name, e))
            .and_then(|x| b.instantiate(plan.variant, job.seed.wrapping_add(1)).map(|y| (x, y)).map_err(|e| (&b.name, e)));
        let (mut white, mut black) = match players {
            Ok(pair) => pair,
            Err((who, e)) => {
                log::warn!("game {}: could not start {who}: {e}", setup.round);
                if replayed {
                    return Err(format!("game {}: could not start {who} twice: {e}", setup.round));
                }
                replayed = true;
                continue;
            }
        };
        let mut result = play_game(&w.name, white.as_mut(), &b.name, black.as_mut(), &setup);
        result.pair = job.pair;
        result.game = job.game;
        result.replayed = replayed;
        let crashed = matches!(result.forfeit, Some(Forfeit { reason: ForfeitReason::Crashed { .. }, .. }));
        if crashed && !replayed {
            log::warn!("game {} aborted ({:?}); replaying once", setup.round, result.forfeit);
            replayed = true;
            continue;
        }
        return Ok(result);
    }
}

fn prepare_starts(plan: &TournamentPlan, n: usize, rng: &mut impl Rng) -> Result<Vec<SlotStart>, ArenaError> {
    let plain = |start: Position| SlotStart { opening: None, start, moves: Vec::new(), prep_plies: 0 };
    match &plan.openings {
        OpeningSource::None => Ok(vec![plain(Position::startpos(plan.variant)); n]),
        OpeningSource::Book { path } => {
            let book = match path {
                Some(p) => OpeningBook::load(p)?,
                None => OpeningBook::bundled(),
            };
            Ok((0..n)
                .map(|_| {
                    let o = &book.openings[rng.gen_range(0..book.len())];
                    SlotStart {
                        opening: Some(format!("{} {}", o.id, o.name)),
                        start: Position::standard(),
                        moves: o.moves.clone(),
                        prep_plies: 0,
                    }
                })
                .collect())
        }
        OpeningSource::Chess960 { prep } => {
            let ids: Vec<u16> = (0..n)
                .map(|_| loop {
                    let id = rng.gen_range(0..960u16);
                    if id != CLASSICAL_ID {
                        break id;
                    }
                })
                .collect();
            let mut starts: Vec<SlotStart> = ids
                .iter()
                .map(|&id| {
                    let back = chess960_back_rank(id).expect("id below 960");
                    SlotStart {
                        opening: Some(format!("chess960-{id}")),
                        ..plain(Position::from_back_rank(back, Variant::Chess960))
                    }
                })
                .collect();
            if let Some(prep) = prep {
                run_prep(prep, &mut starts, worker_count(plan))?;
            }
            Ok(starts)
        }
    }
}

/// Oracle moves from each start, one oracle engine per worker thread.
fn run_prep(prep: &OraclePrep, starts: &mut [SlotStart], workers: usize) -> Result<(), ArenaError> {
    let workers = workers.min(starts.len()).max(1);
    let chunk = starts.len().div_ceil(workers).max(1);
    std::thread::scope(|scope| {
        let handles: Vec<_> = starts
            .chunks_mut(chunk)
            .map(|part| {
                scope.spawn(move || -> Result<(), EngineError> {
                    let mut engine = Engine::spawn(&EngineConfig::new(&prep.path, EngineKind::Classic))?;
                    engine.set_skill(prep.skill)?;
                    engine.configure_variant(Variant::Chess960)?;
                    for slot in part {
                        engine.new_game()?;
                        let mut pos = slot.start.clone();
                        for _ in 0..prep.plies {
                            if pos.outcome().is_over() {
                                break;
                            }
                            let m = engine.best_move(&pos, SearchLimit::Depth(prep.depth))?;
                            slot.moves.push(format_move(&pos, m));
                            pos = pos.apply_unchecked(m);
                        }
                        slot.prep_plies = slot.moves.len();
                    }
                    Ok(())
                })
            })
            .collect();
        for h in handles {
            h.join().expect("prep worker panicked")?;
        }
        Ok(())
    })
}
