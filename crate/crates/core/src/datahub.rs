//! Dataset records, Lichess puzzle ingestion, ID/OOD splitting, training
//! corpus filtering and the JSONL store.
//!
//! Every dataset is a JSONL file next to a manifest that records its name,
//! seed, row count, flag histogram and SHA-256. Loading re-hashes the file,
//! checks the manifest and re-validates every row.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use log::warn;
use rand::seq::index;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::kernel::{Position, Variant};
use crate::metrics::PuzzleCase;
use crate::notation::fen::{format_fen, parse_fen};
use crate::notation::uci::parse_legal_move;
use crate::ood::{classify, OodFlag, OodFlags, Origin};
use crate::seeded_rng;

pub const SCHEMA_VERSION: u32 = 1;
pub const PRODUCER: &str = concat!("oodchess ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{path}:{line}: {source}")]
    Json { path: String, line: usize, source: serde_json::Error },
    #[error("puzzle CSV is missing column(s) {0:?}")]
    HeaderMismatch(Vec<String>),
    #[error("content hash mismatch: manifest says {expected}, file has {actual}")]
    HashMismatch { expected: String, actual: String },
    #[error("manifest says {expected} rows, file has {actual}")]
    CountMismatch { expected: usize, actual: usize },
    #[error("schema version {0} is not supported (expected {SCHEMA_VERSION})")]
    SchemaVersion(u32),
    #[error("row {line} is invalid: {reason}")]
    InvalidRow { line: usize, reason: String },
    #[error("asked for {requested} records but only {available} are available")]
    Insufficient { requested: usize, available: usize },
    #[error("bad manifest {path}: {source}")]
    Manifest { path: String, source: serde_json::Error },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    ChessbenchTest,
    LichessPuzzle,
    Generated,
}

/// One board of an evaluation or training set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoardRecord {
    pub fen: String,
    #[serde(default = "standard")]
    pub variant: Variant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_move: Option<String>,
    pub flags: OodFlags,
    pub origin: Origin,
    pub source: Source,
    pub split: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn standard() -> Variant {
    Variant::Standard
}

impl BoardRecord {
    /// Record for a generated position; flags come from the board.
    pub fn generated(pos: &Position, origin: Origin, split: &str, seed: u64) -> BoardRecord {
        BoardRecord {
            fen: format_fen(pos),
            variant: pos.variant(),
            best_move: None,
            flags: classify(pos),
            origin,
            source: Source::Generated,
            split: split.to_string(),
            seed: Some(seed),
        }
    }

    pub fn position(&self) -> Result<Position, String> {
        parse_fen(&self.fen, self.variant).map_err(|e| e.to_string())
    }
}

/// A Lichess puzzle. `moves[0]` is the opponent's setup move.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PuzzleRecord {
    pub id: String,
    pub fen: String,
    pub moves: Vec<String>,
    #[serde(default)]
    pub themes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rating: Option<u32>,
    /// Union of the flags of every position along the solution line.
    pub flags: OodFlags,
}

impl PuzzleRecord {
    /// Moves the solver has to find.
    pub fn player_plies(&self) -> usize {
        self.moves.len() / 2
    }

    /// The position the solver faces, after the setup move.
    pub fn puzzle_position(&self) -> Result<Position, String> {
        let line = replay(&self.fen, &self.moves)?;
        Ok(line[1].clone())
    }

    pub fn to_case(&self) -> PuzzleCase {
        PuzzleCase { id: self.id.clone(), fen: self.fen.clone(), solution: self.moves.clone() }
    }
}

/// Every position along a move list, starting with the initial one.
pub fn replay(fen: &str, moves: &[String]) -> Result<Vec<Position>, String> {
    let mut pos = parse_fen(fen, Variant::Standard).map_err(|e| e.to_string())?;
    let mut line = vec![pos.clone()];
    for (i, text) in moves.iter().enumerate() {
        let m = parse_legal_move(&pos, text).ok_or_else(|| format!("move {} ({text}) is illegal", i + 1))?;
        pos = pos.apply_unchecked(m);
        line.push(pos.clone());
    }
    Ok(line)
}

/// OOD flags of a whole puzzle line, initial board included.
pub fn line_flags(fen: &str, moves: &[String]) -> Result<OodFlags, String> {
    let mut flags = Vec::new();
    for pos in replay(fen, moves)? {
        flags.extend(classify(&pos).iter());
    }
    Ok(OodFlags::from(flags))
}

/// Rows that could be used and rows that could not, with the reason.
#[derive(Debug, Default)]
pub struct IngestReport {
    pub records: Vec<PuzzleRecord>,
    pub dropped: Vec<(usize, String)>,
}

/// Reads the Lichess puzzle CSV (`PuzzleId,FEN,Moves,Rating,…,Themes,…`).
/// Rows whose solution does not replay are dropped and listed.
pub fn ingest_puzzles(input: impl Read) -> Result<IngestReport, DataError> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let headers = reader.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let missing: Vec<String> =
        ["PuzzleId", "FEN", "Moves"].iter().filter(|n| col(n).is_none()).map(|n| n.to_string()).collect();
    if !missing.is_empty() {
        return Err(DataError::HeaderMismatch(missing));
    }
    let (c_id, c_fen, c_moves) = (col("PuzzleId").unwrap(), col("FEN").unwrap(), col("Moves").unwrap());
    let (c_rating, c_themes) = (col("Rating"), col("Themes"));
    let mut report = IngestReport::default();
    for (i, row) in reader.records().enumerate() {
        let line = i + 2;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                report.dropped.push((line, e.to_string()));
                continue;
            }
        };
        let get = |c: usize| row.get(c).unwrap_or("").trim();
        let id = get(c_id).to_string();
        let fen = get(c_fen).to_string();
        let moves: Vec<String> = get(c_moves).split_whitespace().map(str::to_string).collect();
        if moves.len() < 2 {
            report.dropped.push((line, format!("puzzle {id}: needs a setup move and a solution")));
            continue;
        }
        let flags = match line_flags(&fen, &moves) {
            Ok(f) => f,
            Err(e) => {
                warn!("dropping puzzle {id} (line {line}): {e}");
                report.dropped.push((line, format!("puzzle {id}: {e}")));
                continue;
            }
        };
        let rating = c_rating.and_then(|c| get(c).parse().ok());
        let themes = c_themes.map(|c| get(c).split_whitespace().map(str::to_string).collect()).unwrap_or_default();
        report.records.push(PuzzleRecord { id, fen, moves, themes, rating, flags });
    }
    Ok(report)
}

/// Splits records into (ID, OOD) by their line flags; disjoint and
/// exhaustive, input order preserved.
pub fn partition_id_ood(records: &[PuzzleRecord]) -> (Vec<PuzzleRecord>, Vec<PuzzleRecord>) {
    records.iter().cloned().partition(|r| r.flags.is_empty())
}

/// `per_side` ID and `per_side` OOD puzzles sampled without replacement.
pub fn split_id_ood(
    records: &[PuzzleRecord],
    per_side: usize,
    seed: u64,
) -> Result<(Vec<PuzzleRecord>, Vec<PuzzleRecord>), DataError> {
    let (id, ood) = partition_id_ood(records);
    let mut rng = seeded_rng(seed);
    let mut pick = |pool: Vec<PuzzleRecord>| {
        if pool.len() < per_side {
            return Err(DataError::Insufficient { requested: per_side, available: pool.len() });
        }
        let mut chosen = index::sample(&mut rng, pool.len(), per_side).into_vec();
        chosen.sort_unstable();
        Ok(chosen.into_iter().map(|i| pool[i].clone()).collect())
    };
    Ok((pick(id)?, pick(ood)?))
}

/// OOD records grouped by their primary flag, so that a record with both
/// flags lands in exactly one group.
pub fn group_by_primary_flag(records: &[PuzzleRecord]) -> BTreeMap<OodFlag, Vec<PuzzleRecord>> {
    let mut groups: BTreeMap<OodFlag, Vec<PuzzleRecord>> = BTreeMap::new();
    for r in records {
        if let Some(flag) = r.flags.primary() {
            groups.entry(flag).or_default().push(r.clone());
        }
    }
    groups
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterStats {
    pub total: usize,
    pub removed: usize,
    pub removal_ratio: f64,
    pub removed_by_flag: BTreeMap<String, usize>,
}

/// Drops every board with an OOD flag.
pub fn filter_training_corpus(records: &[BoardRecord]) -> (Vec<BoardRecord>, Vec<BoardRecord>, FilterStats) {
    let (kept, removed): (Vec<_>, Vec<_>) = records.iter().cloned().partition(|r| r.flags.is_empty());
    let stats = FilterStats {
        total: records.len(),
        removed: removed.len(),
        removal_ratio: if records.is_empty() { 0.0 } else { removed.len() as f64 / records.len() as f64 },
        removed_by_flag: flag_histogram(removed.iter().map(|r| r.flags)),
    };
    (kept, removed, stats)
}

/// Mean and standard deviation of solution lengths, counted both with and
/// without the setup move.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthStats {
    pub count: usize,
    pub player_mean: f64,
    pub player_sd: f64,
    pub full_mean: f64,
    pub full_sd: f64,
}

pub fn solution_length_stats(puzzles: &[PuzzleRecord]) -> LengthStats {
    let stats = |xs: Vec<f64>| {
        if xs.is_empty() {
            return (0.0, 0.0);
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        (mean, var.sqrt())
    };
    let (player_mean, player_sd) = stats(puzzles.iter().map(|p| p.player_plies() as f64).collect());
    let (full_mean, full_sd) = stats(puzzles.iter().map(|p| p.moves.len() as f64).collect());
    LengthStats { count: puzzles.len(), player_mean, player_sd, full_mean, full_sd }
}

fn flag_histogram(flags: impl Iterator<Item = OodFlags>) -> BTreeMap<String, usize> {
    let mut h = BTreeMap::new();
    for f in flags {
        if f.is_empty() {
            *h.entry("none".to_string()).or_default() += 1;
        }
        for flag in f.iter() {
            let key = match flag {
                OodFlag::MorePieces => "more_pieces",
                OodFlag::SameColorBishops => "same_color_bishops",
            };
            *h.entry(key.to_string()).or_default() += 1;
        }
    }
    h
}

/// A row type that can live in the store.
pub trait Record: Serialize + DeserializeOwned {
    const KIND: &'static str;
    fn flags(&self) -> OodFlags;
    fn validate(&self) -> Result<(), String>;
}

impl Record for BoardRecord {
    const KIND: &'static str = "boards";

    fn flags(&self) -> OodFlags {
        self.flags
    }

    fn validate(&self) -> Result<(), String> {
        let pos = self.position()?;
        if let Some(m) = &self.best_move {
            parse_legal_move(&pos, m).ok_or_else(|| format!("best move {m} is illegal"))?;
        }
        Ok(())
    }
}

impl Record for PuzzleRecord {
    const KIND: &'static str = "puzzles";

    fn flags(&self) -> OodFlags {
        self.flags
    }

    fn validate(&self) -> Result<(), String> {
        replay(&self.fen, &self.moves).map(|_| ())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub kind: String,
    pub schema_version: u32,
    pub producer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub count: usize,
    pub flags_histogram: BTreeMap<String, usize>,
    /// File name of the data, relative to the manifest.
    pub file: String,
    pub sha256: String,
}

/// `<dir>/<name>.manifest.json`.
pub fn manifest_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.manifest.json"))
}

fn is_manifest(path: &Path) -> bool {
    path.to_string_lossy().ends_with(".manifest.json")
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Serializes records as JSONL.
pub fn to_jsonl<T: Serialize>(records: &[T]) -> Vec<u8> {
    let mut out = Vec::new();
    for r in records {
        serde_json::to_writer(&mut out, r).expect("records serialize");
        out.push(b'\n');
    }
    out
}

/// Writes the records to `<dir>/<name>-<hash prefix>.jsonl`, named by
/// content, plus `<dir>/<name>.manifest.json`; returns the manifest.
pub fn write_dataset<T: Record>(dir: &Path, name: &str, seed: Option<u64>, records: &[T]) -> Result<Manifest, DataError> {
    fs::create_dir_all(dir)?;
    let data = to_jsonl(records);
    let sha256 = sha256_hex(&data);
    let file = format!("{name}-{}.jsonl", &sha256[..12]);
    let manifest = Manifest {
        name: name.to_string(),
        kind: T::KIND.to_string(),
        schema_version: SCHEMA_VERSION,
        producer: PRODUCER.to_string(),
        seed,
        count: records.len(),
        flags_histogram: flag_histogram(records.iter().map(Record::flags)),
        file,
        sha256,
    };
    fs::write(dir.join(&manifest.file), &data)?;
    let mut m = fs::File::create(manifest_path(dir, name))?;
    serde_json::to_writer_pretty(&mut m, &manifest).expect("manifest serializes");
    m.write_all(b"\n")?;
    Ok(manifest)
}

pub fn read_manifest(path: &Path) -> Result<Manifest, DataError> {
    serde_json::from_slice(&fs::read(path)?)
        .map_err(|source| DataError::Manifest { path: path.display().to_string(), source })
}

/// Loads a dataset through its manifest, verifying schema version, content
/// hash, row count and every row.
pub fn load_dataset<T: Record>(manifest: &Path) -> Result<(Manifest, Vec<T>), DataError> {
    let m = read_manifest(manifest)?;
    if m.schema_version != SCHEMA_VERSION {
        return Err(DataError::SchemaVersion(m.schema_version));
    }
    let data_path = manifest.parent().unwrap_or(Path::new(".")).join(&m.file);
    let bytes = fs::read(&data_path)?;
    let actual = sha256_hex(&bytes);
    if actual != m.sha256 {
        return Err(DataError::HashMismatch { expected: m.sha256.clone(), actual });
    }
    let records: Vec<T> = parse_jsonl(&bytes[..], &data_path)?;
    if records.len() != m.count {
        return Err(DataError::CountMismatch { expected: m.count, actual: records.len() });
    }
    Ok((m, records))
}

/// Loads records from a manifest (verified) or a bare JSONL file.
pub fn load_records<T: Record>(path: &Path) -> Result<Vec<T>, DataError> {
    if is_manifest(path) {
        Ok(load_dataset(path)?.1)
    } else {
        read_jsonl(path)
    }
}

/// Reads JSONL without a manifest, still validating each row.
pub fn read_jsonl<T: Record>(path: &Path) -> Result<Vec<T>, DataError> {
    parse_jsonl(BufReader::new(fs::File::open(path)?), path)
}

fn parse_jsonl<T: Record>(input: impl BufRead, path: &Path) -> Result<Vec<T>, DataError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: T = serde_json::from_str(&line)
            .map_err(|source| DataError::Json { path: path.display().to_string(), line: i + 1, source })?;
        rec.validate().map_err(|reason| DataError::InvalidRow { line: i + 1, reason })?;
        out.push(rec);
    }
    Ok(out)
}

/// Boards from a manifest or a bare JSONL file of [`BoardRecord`]s.
pub fn load_boards(path: &Path) -> Result<Vec<Position>, DataError> {
    let records: Vec<BoardRecord> = load_records(path)?;
    records
        .iter()
        .enumerate()
        .map(|(i, r)| r.position().map_err(|reason| DataError::InvalidRow { line: i + 1, reason }))
        .collect()
}
