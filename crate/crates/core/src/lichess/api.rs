//! The slice of the Lichess bot API the bot uses, and a blocking HTTP
//! client for it. Streams are newline-delimited JSON; blank lines are
//! keep-alives.

use std::io::{BufRead, BufReader, Read};
use std::time::Duration;

use serde::Deserialize;

use super::BotError;

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
pub struct Account {
    pub id: String,
    pub username: String,
    #[serde(default)]
    pub title: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Deserialize)]
pub struct VariantRef {
    pub key: String,
}

/// A player as the server describes them. AI opponents have no id.
#[derive(Clone, Debug, Default, PartialEq, Eq, Deserialize)]
pub struct PlayerRef {
    #[serde(default)]
    pub id: Option<String>,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub rating: Option<u32>,
    #[serde(default)]
    pub title: Option<String>,
    #[serde(default, rename = "aiLevel")]
    pub ai_level: Option<u8>,
}

impl PlayerRef {
    /// Whether a human is behind this account, when that can be told.
    pub fn is_human(&self) -> Option<bool> {
        if self.ai_level.is_some() {
            return Some(false);
        }
        self.id.as_ref()?;
        Some(self.title.as_deref() != Some("BOT"))
    }

    pub fn display(&self) -> String {
        match (&self.name, &self.id, self.ai_level) {
            (Some(n), _, _) => n.clone(),
            (None, Some(id), _) => id.clone(),
            (None, None, Some(level)) => format!("AI level {level}"),
            _ => "?".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
pub struct Challenge {
    pub id: String,
    #[serde(default)]
    pub challenger: PlayerRef,
    #[serde(default)]
    pub variant: VariantRef,
    #[serde(default)]
    pub speed: Option<String>,
}

/// `gameStart`/`gameFinish` payloads carry `gameId`, and usually `id` too.
#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(try_from = "RawGameRef")]
pub struct GameRef {
    pub id: String,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct RawGameRef {
    game_id: Option<String>,
    id: Option<String>,
}

impl TryFrom<RawGameRef> for GameRef {
    type Error = &'static str;

    fn try_from(raw: RawGameRef) -> Result<GameRef, Self::Error> {
        raw.game_id.or(raw.id).map(|id| GameRef { id }).ok_or("game without an id")
    }
}

/// Account-level events.
#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum Event {
    Challenge { challenge: Challenge },
    ChallengeCanceled { challenge: GameRefOnly },
    ChallengeDeclined { challenge: GameRefOnly },
    GameStart { game: GameRef },
    GameFinish { game: GameRef },
    #[serde(other)]
    Other,
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
pub struct GameRefOnly {
    pub id: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Deserialize)]
pub struct GameState {
    /// Space-separated UCI moves from the initial position.
    #[serde(default)]
    pub moves: String,
    pub status: String,
    #[serde(default)]
    pub winner: Option<String>,
}

impl GameState {
    pub fn is_over(&self) -> bool {
        !matches!(self.status.as_str(), "created" | "started")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GameFull {
    pub id: String,
    pub variant: VariantRef,
    #[serde(default)]
    pub speed: Option<String>,
    #[serde(default)]
    pub rated: bool,
    /// `"startpos"` or a FEN.
    #[serde(default = "startpos")]
    pub initial_fen: String,
    pub white: PlayerRef,
    pub black: PlayerRef,
    pub state: GameState,
}

fn startpos() -> String {
    "startpos".into()
}

/// Per-game events.
#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum GameEvent {
    GameFull(Box<GameFull>),
    GameState(GameState),
    #[serde(other)]
    Other,
}

pub type Stream<T> = Box<dyn Iterator<Item = Result<T, BotError>> + Send>;

/// What the bot needs from the server. Implemented over HTTP by
/// [`LichessClient`]; tests substitute an in-memory server.
pub trait BotApi: Send + Sync {
    fn account(&self) -> Result<Account, BotError>;
    fn stream_events(&self) -> Result<Stream<Event>, BotError>;
    fn accept_challenge(&self, id: &str) -> Result<(), BotError>;
    /// `reason` is one of the server's decline keys, e.g. `variant`, `later`.
    fn decline_challenge(&self, id: &str, reason: &str) -> Result<(), BotError>;
    fn stream_game(&self, id: &str) -> Result<Stream<GameEvent>, BotError>;
    fn make_move(&self, game: &str, uci: &str) -> Result<(), BotError>;
    fn resign(&self, game: &str) -> Result<(), BotError>;
}

/// Parses an NDJSON stream lazily, skipping keep-alive blank lines.
pub fn ndjson<T, R>(reader: R) -> Stream<T>
where
    T: for<'de> Deserialize<'de> + Send + 'static,
    R: Read + Send + 'static,
{
    let lines = BufReader::new(reader).lines().enumerate();
    Box::new(lines.filter_map(|(i, line)| match line {
        Err(e) => Some(Err(BotError::Network(e.to_string()))),
        Ok(l) if l.trim().is_empty() => None,
        Ok(l) => Some(serde_json::from_str(&l).map_err(|source| BotError::Decode { line: i + 1, source })),
    }))
}

/// Blocking client for `https://lichess.org` or a compatible server.
pub struct LichessClient {
    base: String,
    token: String,
    http: reqwest::blocking::Client,
}

/// Timeout for the short, non-streaming calls.
const CALL_TIMEOUT: Duration = Duration::from_secs(15);

impl LichessClient {
    pub const DEFAULT_BASE: &'static str = "https://lichess.org";

    pub fn new(base: &str, token: &str) -> Result<LichessClient, BotError> {
        let http = reqwest::blocking::Client::builder()
            .connect_timeout(Duration::from_secs(10))
            // Streams stay open indefinitely.
            .timeout(None)
            .user_agent(concat!("oodchess-bot/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| BotError::Network(e.to_string()))?;
        Ok(LichessClient { base: base.trim_end_matches('/').to_string(), token: token.to_string(), http })
    }

    fn send(&self, req: reqwest::blocking::RequestBuilder) -> Result<reqwest::blocking::Response, BotError> {
        let resp = req.bearer_auth(&self.token).send().map_err(|e| BotError::Network(e.to_string()))?;
        let status = resp.status();
        if status == reqwest::StatusCode::UNAUTHORIZED {
            return Err(BotError::InvalidToken);
        }
        if !status.is_success() {
            let body = resp.text().unwrap_or_default();
            return Err(BotError::Http { status: status.as_u16(), body });
        }
        Ok(resp)
    }

    fn get(&self, path: &str) -> reqwest::blocking::RequestBuilder {
        self.http.get(format!("{}{path}", self.base))
    }

    fn post(&self, path: &str) -> Result<(), BotError> {
        self.send(self.http.post(format!("{}{path}", self.base)).timeout(CALL_TIMEOUT)).map(drop)
    }
}

impl BotApi for LichessClient {
    fn account(&self) -> Result<Account, BotError> {
        let resp = self.send(self.get("/api/account").timeout(CALL_TIMEOUT))?;
        let body = resp.text().map_err(|e| BotError::Network(e.to_string()))?;
        serde_json::from_str(&body).map_err(|source| BotError::Decode { line: 1, source })
    }

    fn stream_events(&self) -> Result<Stream<Event>, BotError> {
        Ok(ndjson(self.send(self.get("/api/stream/event"))?))
    }

    fn accept_challenge(&self, id: &str) -> Result<(), BotError> {
        self.post(&format!("/api/challenge/{id}/accept"))
    }

    fn decline_challenge(&self, id: &str, reason: &str) -> Result<(), BotError> {
        let req = self
            .http
            .post(format!("{}/api/challenge/{id}/decline", self.base))
            .timeout(CALL_TIMEOUT)
            .header(reqwest::header::CONTENT_TYPE, "application/x-www-form-urlencoded")
            .body(format!("reason={reason}"));
        self.send(req).map(drop)
    }

    fn stream_game(&self, id: &str) -> Result<Stream<GameEvent>, BotError> {
        Ok(ndjson(self.send(self.get(&format!("/api/bot/game/stream/{id}")))?))
    }

    fn make_move(&self, game: &str, uci: &str) -> Result<(), BotError> {
        self.post(&format!("/api/bot/game/{game}/move/{uci}"))
    }

    fn resign(&self, game: &str) -> Result<(), BotError> {
        self.post(&format!("/api/bot/game/{game}/resign"))
    }
}
