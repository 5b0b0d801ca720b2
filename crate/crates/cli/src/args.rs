use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{ArgAction, Args, Parser, Subcommand};
use oodchess::kernel::Variant;
use serde::{Deserialize, Serialize};

/// Out-of-distribution chess evaluation: board generators, move-quality
/// metrics, tournaments, relative Elo and distribution probes.
///
/// Exit codes: 0 ok, 2 usage, 3 config, 4 engine or policy failure,
/// 5 data validation. Engines are found through OODCHESS_ENGINE (standard
/// and Chess960) and OODCHESS_VARIANT_ENGINE (also Horde).
#[derive(Parser, Debug)]
#[command(name = "oodchess", version, max_term_width = 100)]
pub struct Cli {
    /// Directory for artifacts and the run manifest (run.json).
    #[arg(short, long, global = true, default_value = "out")]
    pub out: PathBuf,

    /// Worker threads for tournaments and oracle preparation [default: logical cores].
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// More logging (-v info, -vv debug); RUST_LOG also works.
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Generate starting-board datasets.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Import the Lichess puzzle CSV as a validated puzzle dataset.
    Ingest(IngestArgs),
    /// Split a puzzle dataset into ID/OOD sets, or filter a training corpus.
    Split(SplitArgs),
    /// Evaluate a policy on a dataset.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Run a round-robin tournament from a TOML plan.
    Tournament(TournamentArgs),
    /// Estimate relative Elo from game results.
    Rate(RateArgs),
    /// Inspect policy distributions.
    #[command(subcommand)]
    Probe(ProbeCommand),
    /// Play as a bot on Lichess, or summarize logged online games.
    #[command(subcommand)]
    Bot(BotCommand),
    /// Re-execute the run recorded in a run.json manifest.
    Rerun(RerunArgs),
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenCommand {
    /// All 960 Chess960 starting positions in seeded order.
    Chess960 {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Leave out the classical arrangement (959 positions).
        #[arg(long)]
        exclude_classical: bool,
    },
    /// Distinct non-classical back-rank arrangements, sampled without replacement.
    AllStarts {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long, default_value_t = 1000)]
        n: usize,
    },
    /// Two kings, white rooks and many white knights.
    KnightsRooks {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long, default_value_t = 1000)]
        n: usize,
        /// White rook count range, LO-HI.
        #[arg(long, default_value = "2-4")]
        rooks: CountRange,
        /// White knight count range, LO-HI.
        #[arg(long, default_value = "3-15")]
        knights: CountRange,
    },
}

/// Inclusive count range written `LO-HI` (or a single number).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CountRange {
    pub lo: u32,
    pub hi: u32,
}

impl FromStr for CountRange {
    type Err = String;

    fn from_str(s: &str) -> Result<CountRange, String> {
        let num = |t: &str| t.trim().parse::<u32>().map_err(|_| format!("expected LO-HI, got {s:?}"));
        let (lo, hi) = match s.split_once('-') {
            Some((a, b)) => (num(a)?, num(b)?),
            None => (num(s)?, num(s)?),
        };
        if lo > hi {
            return Err(format!("empty range {s:?}"));
        }
        Ok(CountRange { lo, hi })
    }
}

impl TryFrom<String> for CountRange {
    type Error = String;

    fn try_from(s: String) -> Result<CountRange, String> {
        s.parse()
    }
}

impl From<CountRange> for String {
    fn from(r: CountRange) -> String {
        r.to_string()
    }
}

impl fmt::Display for CountRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.lo, self.hi)
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct IngestArgs {
    /// Lichess puzzle CSV (PuzzleId,FEN,Moves,Rating,...,Themes,...).
    pub csv: PathBuf,
    /// Dataset name.
    #[arg(long, default_value = "puzzles")]
    pub name: String,
}

#[derive(clap::ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitKind {
    /// Puzzle dataset → puzzles_id / puzzles_ood (+ one set per OOD flag).
    Puzzles,
    /// Board corpus → train (flag-free) / removed.
    Corpus,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SplitArgs {
    /// Dataset manifest or JSONL file.
    pub dataset: PathBuf,
    #[arg(long, value_enum, default_value_t = SplitKind::Puzzles)]
    pub kind: SplitKind,
    /// Sample this many ID and this many OOD puzzles instead of keeping all.
    #[arg(long)]
    pub per_side: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Which policy answers, and how engine-backed policies search.
#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct PolicyArgs {
    /// random-legal, uniform, engine[:PATH], variant-engine[:PATH],
    /// tcp://HOST:PORT or stdio:COMMAND.
    #[arg(long)]
    pub policy: String,
    /// Search depth for engine policies (instead of --movetime).
    #[arg(long)]
    pub depth: Option<u32>,
    /// Milliseconds per move for engine policies.
    #[arg(long, default_value_t = 50)]
    pub movetime: u64,
    /// Skill level 0-20 for engine policies.
    #[arg(long)]
    pub skill: Option<u32>,
    /// Per-request timeout for remote policies, in milliseconds.
    #[arg(long, default_value_t = 30_000)]
    pub timeout_ms: u64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct EvalArgs {
    #[command(flatten)]
    pub policy: PolicyArgs,
    /// Dataset manifest or JSONL file.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Seed for randomized policies.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalCommand {
    /// Share of boards on which the policy's move is legal.
    Legal(EvalArgs),
    /// Agreement with an engine's top-K moves.
    Topk(TopkArgs),
    /// Puzzle sequence accuracy on a puzzle dataset.
    Puzzles(EvalArgs),
    /// Histogram of first moves from starting boards.
    Openings(EvalArgs),
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct TopkArgs {
    #[command(flatten)]
    pub eval: EvalArgs,
    /// Oracle engine [default: OODCHESS_VARIANT_ENGINE for Horde, else OODCHESS_ENGINE].
    #[arg(long)]
    pub oracle: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub oracle_depth: u32,
    #[arg(long, value_delimiter = ',', default_value = "1,3,5,10")]
    pub ks: Vec<usize>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct TournamentArgs {
    /// Tournament plan (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the plan's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the plan's games per pair.
    #[arg(long)]
    pub games_per_pair: Option<usize>,
    /// Overrides the plan's ply cap.
    #[arg(long)]
    pub max_plies: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct RateArgs {
    /// results.jsonl files (tournament results or {white, black, white_score} rows).
    #[arg(required = true)]
    pub results: Vec<PathBuf>,
    /// Prior strength; 0 disables the prior.
    #[arg(long, default_value_t = oodchess::elo::DEFAULT_CONFIDENCE)]
    pub confidence: f64,
}

/// Boards given inline or as a dataset.
#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct BoardArgs {
    /// Board FEN; repeatable.
    #[arg(long)]
    pub fen: Vec<String>,
    /// Variant of the --fen boards [default: inferred from the FEN].
    #[arg(long)]
    pub variant: Option<Variant>,
    /// Dataset manifest or JSONL file of boards.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeCommand {
    /// Origin-square heatmap (CSV + PNG) for each board.
    Heatmap {
        #[command(flatten)]
        policy: PolicyArgs,
        #[command(flatten)]
        boards: BoardArgs,
        /// Checkpoint label stored with the heatmaps.
        #[arg(long, default_value = "")]
        label: String,
        /// PNG pixels per square.
        #[arg(long, default_value_t = 48)]
        cell: u32,
    },
    /// Probability mass on legal moves, per board and on average.
    LegalMass {
        #[command(flatten)]
        policy: PolicyArgs,
        #[command(flatten)]
        boards: BoardArgs,
    },
    /// Legality measurements across training checkpoints.
    Dynamics(DynamicsArgs),
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct DynamicsArgs {
    /// Checkpoint list and datasets (TOML); flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// LABEL:STEP:POLICY; repeatable, in training order.
    #[arg(long)]
    pub checkpoint: Vec<String>,
    #[arg(long)]
    pub id_dataset: Option<PathBuf>,
    #[arg(long)]
    pub ood_dataset: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub boards_per_piece: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BotCommand {
    /// Connect with the token in LICHESS_BOT_TOKEN and play.
    Run {
        #[command(flatten)]
        policy: PolicyArgs,
        /// Accepted variants.
        #[arg(long, value_delimiter = ',', default_value = "standard,chess960,horde")]
        variants: Vec<Variant>,
        #[arg(long, default_value_t = 1)]
        max_games: usize,
        /// Give up after this many consecutive failed reconnects [default: never].
        #[arg(long)]
        max_reconnects: Option<usize>,
        #[arg(long, default_value = oodchess::lichess::LichessClient::DEFAULT_BASE)]
        server: String,
        /// Game log (JSONL, appended) [default: <out>/online_games.jsonl].
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Win/draw/loss, opponent rating and human share per bucket.
    Stats {
        /// Game log written by `bot run`.
        log: PathBuf,
    },
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct RerunArgs {
    /// run.json written by an earlier run.
    pub manifest: PathBuf,
}
