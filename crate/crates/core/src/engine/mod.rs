//! UCI engine supervision.
//!
//! One [`Engine`] owns one child process and one serialized command stream.
//! A reader thread forwards engine output over a channel so every wait can
//! time out; after a timeout or crash the handle is poisoned and refuses
//! further work instead of hanging.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use log::{debug, trace, warn};
use serde::{Deserialize, Serialize};

use crate::kernel::{Move, Position, Variant};
use crate::notation::fen::format_fen;
use crate::notation::uci::parse_legal_move;

pub const HANDSHAKE_TIMEOUT: Duration = Duration::from_secs(10);
/// Upper bound on any single search, whatever the limit.
pub const MAX_SEARCH_TIMEOUT: Duration = Duration::from_secs(120);
pub const MAX_MULTIPV: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    /// Standard chess and Chess960 only.
    Classic,
    /// Understands `UCI_Variant` (e.g. Fairy-Stockfish).
    VariantCapable,
}

impl EngineKind {
    pub fn supports(self, variant: Variant) -> bool {
        self == EngineKind::VariantCapable || variant != Variant::Horde
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchLimit {
    Depth(u32),
    Movetime(u64),
}

impl SearchLimit {
    /// The quality limit used wherever an oracle move is needed.
    pub const ORACLE: SearchLimit = SearchLimit::Depth(20);

    fn go_command(self) -> String {
        match self {
            SearchLimit::Depth(d) => format!("go depth {d}"),
            SearchLimit::Movetime(ms) => format!("go movetime {ms}"),
        }
    }

    /// How long to wait for `bestmove`: six seconds per ply of depth
    /// (so depth 20 gets the full two minutes), or the movetime plus slack.
    pub fn timeout(self) -> Duration {
        let t = match self {
            SearchLimit::Depth(d) => Duration::from_secs(6 * u64::from(d.max(1))),
            SearchLimit::Movetime(ms) => Duration::from_millis(ms) + Duration::from_secs(5),
        };
        t.min(MAX_SEARCH_TIMEOUT)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("failed to start engine {path}: {source}")]
    Spawn { path: String, source: std::io::Error },
    #[error("engine did not complete the UCI handshake within {0:?}")]
    HandshakeTimeout(Duration),
    #[error("engine did not answer within {0:?}")]
    Timeout(Duration),
    #[error("engine process exited or closed its output")]
    Crashed,
    #[error("engine handle is unusable after an earlier failure")]
    Poisoned,
    #[error("engine reported no move (terminal position)")]
    NoMove,
    #[error("engine returned {text:?}, which is not legal in {fen}")]
    IllegalMove { text: String, fen: String },
    #[error("engine does not support {0}")]
    UnsupportedVariant(Variant),
    #[error("skill level {0} outside 0..=20")]
    SkillOutOfRange(u32),
    #[error("k must be in 1..={MAX_MULTIPV}, got {0}")]
    BadK(usize),
    #[error("engine rejected option {name}: {message}")]
    OptionRejected { name: String, message: String },
    #[error("i/o error talking to engine: {0}")]
    Io(#[from] std::io::Error),
}

/// How to launch an engine.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub path: PathBuf,
    #[serde(default)]
    pub args: Vec<String>,
    pub kind: EngineKind,
    /// Options applied right after the handshake, in order.
    #[serde(default)]
    pub options: BTreeMap<String, String>,
}

impl EngineConfig {
    pub fn new(path: impl Into<PathBuf>, kind: EngineKind) -> EngineConfig {
        EngineConfig { path: path.into(), args: Vec::new(), kind, options: BTreeMap::new() }
    }

    pub fn with_option(mut self, name: &str, value: impl ToString) -> EngineConfig {
        self.options.insert(name.to_string(), value.to_string());
        self
    }
}

/// A live engine process.
pub struct Engine {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<String>,
    kind: EngineKind,
    name: Option<String>,
    options: BTreeMap<String, String>,
    declared: Vec<String>,
    variant: Option<Variant>,
    poisoned: bool,
}

impl Engine {
    /// Starts the process, completes `uci`/`isready` and applies the
    /// configured options.
    pub fn spawn(config: &EngineConfig) -> Result<Engine, EngineError> {
        let mut child = Command::new(&config.path)
            .args(&config.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|source| EngineError::Spawn { path: config.path.display().to_string(), source })?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::Builder::new()
            .name("uci-reader".into())
            .spawn(move || {
                for line in BufReader::new(stdout).lines() {
                    let Ok(line) = line else { break };
                    if tx.send(line).is_err() {
                        break;
                    }
                }
            })
            .map_err(EngineError::Io)?;

        let mut engine = Engine {
            child,
            stdin,
            lines: rx,
            kind: config.kind,
            name: None,
            options: BTreeMap::new(),
            declared: Vec::new(),
            variant: None,
            poisoned: false,
        };
        engine.handshake()?;
        for (name, value) in &config.options {
            engine.set_option(name, value)?;
        }
        if !config.options.is_empty() {
            engine.sync(HANDSHAKE_TIMEOUT)?;
        }
        Ok(engine)
    }

    fn handshake(&mut self) -> Result<(), EngineError> {
        self.send("uci")?;
        let deadline = Instant::now() + HANDSHAKE_TIMEOUT;
        loop {
            let line = self.recv_until(deadline).map_err(|e| match e {
                EngineError::Timeout(_) => EngineError::HandshakeTimeout(HANDSHAKE_TIMEOUT),
                e => e,
            })?;
            if let Some(name) = line.strip_prefix("id name ") {
                self.name = Some(name.trim().to_string());
            } else if let Some(rest) = line.strip_prefix("option name ") {
                if let Some(idx) = rest.find(" type ") {
                    self.declared.push(rest[..idx].to_string());
                }
            } else if line.trim() == "uciok" {
                break;
            }
        }
        self.sync(HANDSHAKE_TIMEOUT).map_err(|e| match e {
            EngineError::Timeout(_) => EngineError::HandshakeTimeout(HANDSHAKE_TIMEOUT),
            e => e,
        })
    }

    pub fn kind(&self) -> EngineKind {
        self.kind
    }

    /// Name reported by `id name`.
    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// Options set so far, by name.
    pub fn options(&self) -> &BTreeMap<String, String> {
        &self.options
    }

    pub fn is_poisoned(&self) -> bool {
        self.poisoned
    }

    /// Sends `setoption`. Options the engine never declared are rejected
    /// locally, since UCI engines silently ignore unknown names.
    pub fn set_option(&mut self, name: &str, value: &str) -> Result<(), EngineError> {
        self.check()?;
        if !self.declared.is_empty() && !self.declared.iter().any(|d| d.eq_ignore_ascii_case(name)) {
            return Err(EngineError::OptionRejected { name: name.into(), message: "not declared by the engine".into() });
        }
        if self.options.get(name).map(String::as_str) == Some(value) {
            return Ok(());
        }
        self.send(&format!("setoption name {name} value {value}"))?;
        self.options.insert(name.to_string(), value.to_string());
        Ok(())
    }

    /// Weakens (or restores) the engine; 20 is full strength.
    pub fn set_skill(&mut self, level: u32) -> Result<(), EngineError> {
        if level > 20 {
            return Err(EngineError::SkillOutOfRange(level));
        }
        self.set_option("Skill Level", &level.to_string())?;
        self.sync(HANDSHAKE_TIMEOUT)
    }

    /// Prepares the engine for positions of `variant`.
    pub fn configure_variant(&mut self, variant: Variant) -> Result<(), EngineError> {
        if !self.kind.supports(variant) {
            return Err(EngineError::UnsupportedVariant(variant));
        }
        if self.variant == Some(variant) {
            return Ok(());
        }
        if self.kind == EngineKind::VariantCapable {
            let name = if variant == Variant::Horde { "horde" } else { "chess" };
            self.set_option("UCI_Variant", name)?;
        }
        if self.declared.is_empty() || self.declared.iter().any(|d| d == "UCI_Chess960") {
            self.set_option("UCI_Chess960", if variant == Variant::Chess960 { "true" } else { "false" })?;
        }
        self.variant = Some(variant);
        self.sync(HANDSHAKE_TIMEOUT)
    }

    /// `ucinewgame` followed by `isready`: clears hash and search state.
    pub fn new_game(&mut self) -> Result<(), EngineError> {
        self.check()?;
        self.send("ucinewgame")?;
        self.sync(HANDSHAKE_TIMEOUT)
    }

    /// The engine's choice in `pos`, verified legal by the kernel.
    pub fn best_move(&mut self, pos: &Position, limit: SearchLimit) -> Result<Move, EngineError> {
        self.prepare(pos, 1)?;
        let outcome = self.search(limit)?;
        let text = outcome.best.ok_or(EngineError::NoMove)?;
        self.resolve(pos, &text)
    }

    /// Up to `k` distinct moves in the engine's preference order, from a
    /// fresh MultiPV search. Hash is cleared first so that each query is
    /// independent of earlier ones.
    pub fn top_k_moves(&mut self, pos: &Position, k: usize, limit: SearchLimit) -> Result<Vec<Move>, EngineError> {
        if k == 0 || k > MAX_MULTIPV {
            return Err(EngineError::BadK(k));
        }
        let legal = pos.legal_moves().len();
        if legal == 0 {
            return Err(EngineError::NoMove);
        }
        self.new_game()?;
        self.prepare(pos, k)?;
        let outcome = self.search(limit)?;
        let mut moves = Vec::with_capacity(k);
        for text in outcome.pvs.values() {
            let m = self.resolve(pos, text)?;
            if !moves.contains(&m) {
                moves.push(m);
            }
        }
        if moves.is_empty() {
            if let Some(best) = outcome.best {
                moves.push(self.resolve(pos, &best)?);
            }
        }
        moves.truncate(k.min(legal));
        Ok(moves)
    }

    fn prepare(&mut self, pos: &Position, multipv: usize) -> Result<(), EngineError> {
        self.check()?;
        self.configure_variant(pos.variant())?;
        if self.declared.is_empty() || self.declared.iter().any(|d| d == "MultiPV") {
            self.set_option("MultiPV", &multipv.to_string())?;
        }
        self.send(&format!("position fen {}", format_fen(pos)))
    }

    fn resolve(&self, pos: &Position, text: &str) -> Result<Move, EngineError> {
        parse_legal_move(pos, text).ok_or_else(|| EngineError::IllegalMove { text: text.to_string(), fen: format_fen(pos) })
    }

    fn search(&mut self, limit: SearchLimit) -> Result<SearchOutcome, EngineError> {
        self.send(&limit.go_command())?;
        let timeout = limit.timeout();
        let deadline = Instant::now() + timeout;
        let mut pvs = BTreeMap::new();
        loop {
            let line = self.recv_until(deadline)?;
            if let Some(rest) = line.strip_prefix("bestmove") {
                let best = rest.split_whitespace().next().filter(|m| *m != "(none)" && *m != "0000").map(str::to_string);
                return Ok(SearchOutcome { best, pvs });
            }
            if let Some((idx, first)) = parse_info_pv(&line) {
                pvs.insert(idx, first);
            }
        }
    }

    /// `isready` round trip.
    fn sync(&mut self, timeout: Duration) -> Result<(), EngineError> {
        self.send("isready")?;
        let deadline = Instant::now() + timeout;
        loop {
            if self.recv_until(deadline)?.trim() == "readyok" {
                return Ok(());
            }
        }
    }

    fn check(&self) -> Result<(), EngineError> {
        if self.poisoned {
            Err(EngineError::Poisoned)
        } else {
            Ok(())
        }
    }

    fn send(&mut self, cmd: &str) -> Result<(), EngineError> {
        self.check()?;
        trace!("> {cmd}");
        let res = writeln!(self.stdin, "{cmd}").and_then(|_| self.stdin.flush());
        if res.is_err() {
            self.poisoned = true;
            return Err(EngineError::Crashed);
        }
        Ok(())
    }

    fn recv_until(&mut self, deadline: Instant) -> Result<String, EngineError> {
        let wait = deadline.saturating_duration_since(Instant::now());
        match self.lines.recv_timeout(wait) {
            Ok(line) => {
                trace!("< {line}");
                Ok(line)
            }
            Err(RecvTimeoutError::Timeout) => {
                warn!("engine timed out; poisoning handle");
                self.poisoned = true;
                Err(EngineError::Timeout(wait))
            }
            Err(RecvTimeoutError::Disconnected) => {
                self.poisoned = true;
                Err(EngineError::Crashed)
            }
        }
    }
}

impl Drop for Engine {
    fn drop(&mut self) {
        let _ = writeln!(self.stdin, "quit");
        let _ = self.stdin.flush();
        let deadline = Instant::now() + Duration::from_millis(500);
        while Instant::now() < deadline {
            if let Ok(Some(_)) = self.child.try_wait() {
                return;
            }
            thread::sleep(Duration::from_millis(10));
        }
        debug!("engine ignored quit; killing");
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

struct SearchOutcome {
    best: Option<String>,
    /// First PV move by MultiPV index, from the deepest exact report.
    pvs: BTreeMap<usize, String>,
}

/// `(multipv index, first pv move)` for exact-score `info` lines.
fn parse_info_pv(line: &str) -> Option<(usize, String)> {
    let mut tokens = line.split_whitespace();
    if tokens.next()? != "info" {
        return None;
    }
    let mut multipv = 1;
    while let Some(tok) = tokens.next() {
        match tok {
            "lowerbound" | "upperbound" => return None,
            "multipv" => multipv = tokens.next()?.parse().ok()?,
            "pv" => return tokens.next().map(|m| (multipv, m.to_string())),
            "string" => return None,
            _ => {}
        }
    }
    None
}

/// Engine binary from an environment variable, if it names an existing file.
pub fn engine_from_env(var: &str) -> Option<PathBuf> {
    let path = PathBuf::from(std::env::var_os(var)?);
    path.is_file().then_some(path)
}
