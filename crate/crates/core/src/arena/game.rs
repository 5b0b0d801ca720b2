use serde::{Deserialize, Serialize};

use super::pgn::{san_moves, variant_tag, write_pgn, PgnGame};
use crate::engine::EngineError;
use crate::kernel::{Color, GameOutcome, Move, Position, Termination, Variant};
use crate::metrics::{check_move, IllegalCause};
use crate::notation::fen::{format_fen, parse_fen};
use crate::notation::uci::{format_move, parse_legal_move};
use crate::policy::{Policy, PolicyError};

/// Why a player lost by adjudication rather than over the board.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ForfeitReason {
    /// The player answered with a move that is not legal.
    Illegal { text: String, cause: IllegalCause },
    /// The player answered, but with an error instead of a move.
    Failed { message: String },
    /// The player's process or connection went away.
    Crashed { message: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Forfeit {
    /// The side that forfeited.
    pub color: Color,
    pub reason: ForfeitReason,
}

/// How a game is set up; shared by both colors of a pairing slot.
#[derive(Clone, Debug)]
pub struct GameSetup {
    pub variant: Variant,
    pub start: Position,
    /// Book line or Chess960 start identifier.
    pub opening: Option<String>,
    /// Moves played before the players take over (book or oracle prep).
    pub opening_moves: Vec<String>,
    /// How many of `opening_moves` came from the oracle.
    pub prep_plies: usize,
    /// Draw by adjudication once this many plies are on the board,
    /// opening included.
    pub max_plies: usize,
    pub event: String,
    pub round: String,
}

impl GameSetup {
    pub fn new(variant: Variant) -> GameSetup {
        GameSetup {
            variant,
            start: Position::startpos(variant),
            opening: None,
            opening_moves: Vec::new(),
            prep_plies: 0,
            max_plies: super::DEFAULT_MAX_PLIES,
            event: "oodchess".into(),
            round: "1".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub pair: usize,
    pub game: usize,
    pub white: String,
    pub black: String,
    pub variant: Variant,
    pub outcome: GameOutcome,
    pub opening: Option<String>,
    pub start_fen: String,
    /// Every move from `start_fen` in UCI, opening included.
    pub moves: Vec<String>,
    pub opening_plies: usize,
    pub plies: usize,
    /// Set iff a player lost by an illegal or failed move.
    pub forfeit: Option<Forfeit>,
    /// True if this is the second attempt after an aborted game.
    pub replayed: bool,
    pub pgn: String,
}

impl MatchResult {
    /// A result with no moves, for score bookkeeping from known outcomes.
    pub fn bare(white: &str, black: &str, outcome: GameOutcome) -> MatchResult {
        MatchResult {
            pair: 0,
            game: 0,
            white: white.to_string(),
            black: black.to_string(),
            variant: Variant::Standard,
            outcome,
            opening: None,
            start_fen: crate::notation::fen::STANDARD_START.to_string(),
            moves: Vec::new(),
            opening_plies: 0,
            plies: 0,
            forfeit: None,
            replayed: false,
            pgn: String::new(),
        }
    }

    /// Points scored by `name` in this game (0 if they did not play).
    pub fn points_for(&self, name: &str) -> f64 {
        if self.white == name {
            self.outcome.score_for(Color::White)
        } else if self.black == name {
            self.outcome.score_for(Color::Black)
        } else {
            0.0
        }
    }

    /// Replays the recorded moves through the kernel and checks that they
    /// are legal and lead to the recorded outcome: the rules' verdict for a
    /// normal finish, or an unfinished position for an adjudicated one.
    pub fn validate(&self) -> Result<Position, String> {
        let start = parse_fen(&self.start_fen, self.variant).map_err(|e| format!("start FEN: {e}"))?;
        let mut pos = start;
        for (i, text) in self.moves.iter().enumerate() {
            if pos.outcome().is_over() {
                return Err(format!("ply {} ({text}) played after the game ended", i + 1));
            }
            let m = parse_legal_move(&pos, text).ok_or_else(|| format!("ply {} ({text}) is illegal", i + 1))?;
            pos = pos.apply_unchecked(m);
        }
        if self.plies != self.moves.len() {
            return Err(format!("ply count {} but {} moves", self.plies, self.moves.len()));
        }
        let rules = pos.outcome();
        match (&self.forfeit, self.outcome.reason) {
            (Some(f), Some(Termination::Adjudicated)) if !rules.is_over() => {
                if self.outcome.winner() != Some(!f.color) {
                    return Err("forfeit did not go against the forfeiting side".into());
                }
            }
            (None, Some(Termination::Adjudicated)) if !rules.is_over() => {
                if self.outcome != GameOutcome::draw(Termination::Adjudicated) {
                    return Err("only the ply cap is adjudicated without a forfeit".into());
                }
            }
            (None, _) if rules == self.outcome => {}
            _ => return Err(format!("recorded {:?} but the final position gives {:?}", self.outcome, rules)),
        }
        Ok(pos)
    }
}

/// What happened when a player was asked for a move.
enum Turn {
    Move(Move),
    Forfeit(ForfeitReason),
}

fn ask(policy: &mut dyn Policy, pos: &Position) -> Turn {
    match policy.choose(pos) {
        Ok(verdict) => match check_move(pos, &verdict.text) {
            Ok(m) => Turn::Move(m),
            Err(cause) => Turn::Forfeit(ForfeitReason::Illegal { text: verdict.text, cause }),
        },
        Err(e) => Turn::Forfeit(classify_failure(pos, e)),
    }
}

fn classify_failure(pos: &Position, e: PolicyError) -> ForfeitReason {
    match e {
        PolicyError::Engine(EngineError::IllegalMove { text, .. }) => {
            let cause = check_move(pos, &text).err().unwrap_or(IllegalCause::MalformedMove);
            ForfeitReason::Illegal { text, cause }
        }
        PolicyError::Engine(EngineError::NoMove) => ForfeitReason::Failed { message: e.to_string() },
        PolicyError::Engine(_)
        | PolicyError::Transport(_)
        | PolicyError::Timeout(_)
        | PolicyError::Closed
        | PolicyError::Poisoned => ForfeitReason::Crashed { message: e.to_string() },
        other => ForfeitReason::Failed { message: other.to_string() },
    }
}

/// Plays one game. Never fails: a player that crashes, errors or answers
/// with an illegal move loses by adjudication and the result is flagged.
pub fn play_game(
    white_name: &str,
    white: &mut dyn Policy,
    black_name: &str,
    black: &mut dyn Policy,
    setup: &GameSetup,
) -> MatchResult {
    let mut pos = setup.start.clone();
    let mut moves: Vec<Move> = Vec::new();
    for text in &setup.opening_moves {
        let m = parse_legal_move(&pos, text).expect("opening lines are validated when loaded");
        moves.push(m);
        pos = pos.apply_unchecked(m);
    }

    let mut forfeit = match (white.new_game(), black.new_game()) {
        (Err(e), _) => Some(Forfeit { color: Color::White, reason: classify_failure(&pos, e) }),
        (_, Err(e)) => Some(Forfeit { color: Color::Black, reason: classify_failure(&pos, e) }),
        _ => None,
    };
    let outcome = loop {
        if let Some(f) = &forfeit {
            break GameOutcome::win(!f.color, Termination::Adjudicated);
        }
        let over = pos.outcome();
        if over.is_over() {
            break over;
        }
        if moves.len() >= setup.max_plies {
            break GameOutcome::draw(Termination::Adjudicated);
        }
        let color = pos.side_to_move();
        let player: &mut dyn Policy = if color == Color::White { &mut *white } else { &mut *black };
        match ask(player, &pos) {
            Turn::Move(m) => {
                moves.push(m);
                pos = pos.apply_unchecked(m);
            }
            Turn::Forfeit(reason) => {
                log::debug!("{} forfeits at ply {}: {reason:?}", if color == Color::White { white_name } else { black_name }, moves.len() + 1);
                forfeit = Some(Forfeit { color, reason });
            }
        }
    };

    let mut uci = Vec::with_capacity(moves.len());
    let mut replay = setup.start.clone();
    for &m in &moves {
        uci.push(format_move(&replay, m));
        replay = replay.apply_unchecked(m);
    }
    let pgn = render_pgn(white_name, black_name, setup, &moves, &outcome, forfeit.as_ref());
    MatchResult {
        pair: 0,
        game: 0,
        white: white_name.to_string(),
        black: black_name.to_string(),
        variant: setup.variant,
        outcome,
        opening: setup.opening.clone(),
        start_fen: format_fen(&setup.start),
        plies: moves.len(),
        moves: uci,
        opening_plies: setup.opening_moves.len(),
        forfeit,
        replayed: false,
        pgn,
    }
}

fn render_pgn(
    white: &str,
    black: &str,
    setup: &GameSetup,
    moves: &[Move],
    outcome: &GameOutcome,
    forfeit: Option<&Forfeit>,
) -> String {
    let mut game = PgnGame::default();
    for (k, v) in [
        ("Event", setup.event.as_str()),
        ("Site", "?"),
        ("Date", "????.??.??"),
        ("Round", setup.round.as_str()),
        ("White", white),
        ("Black", black),
        ("Result", outcome.result_str()),
        ("Variant", variant_tag(setup.variant)),
    ] {
        game.set_tag(k, v);
    }
    if setup.start != Position::standard() {
        game.set_tag("SetUp", "1");
        game.set_tag("FEN", format_fen(&setup.start));
    }
    if let Some(o) = &setup.opening {
        game.set_tag("Opening", o.as_str());
    }
    let termination = match (forfeit, outcome.reason) {
        (Some(_), _) => "rules infraction",
        (None, Some(Termination::Adjudicated)) => "adjudication",
        _ => "normal",
    };
    game.set_tag("Termination", termination);
    game.set_tag("PlyCount", moves.len().to_string());

    game.moves = san_moves(&setup.start, moves);
    if setup.prep_plies > 0 {
        game.comments.push((setup.prep_plies, format!("end of {}-ply oracle preparation", setup.prep_plies)));
    } else if !setup.opening_moves.is_empty() {
        game.comments.push((setup.opening_moves.len(), "end of book".into()));
    }
    match (forfeit, outcome.reason) {
        (Some(f), _) => {
            let what = match &f.reason {
                ForfeitReason::Illegal { text, cause } => format!("illegal move {text:?} ({cause:?})"),
                ForfeitReason::Failed { message } => format!("no move: {message}"),
                ForfeitReason::Crashed { message } => format!("player crashed: {message}"),
            };
            game.comments.push((moves.len(), format!("{} forfeits: {what}", if f.color == Color::White { "White" } else { "Black" })));
        }
        (None, Some(Termination::Adjudicated)) => {
            game.comments.push((moves.len(), format!("draw adjudicated at the {}-ply limit", setup.max_plies)));
        }
        (None, Some(reason)) => game.comments.push((moves.len(), format!("{reason:?}"))),
        (None, None) => {}
    }
    game.result = outcome.result_str().to_string();
    write_pgn(&game, &setup.start)
}
