//! Run bookkeeping: error classes and exit codes, and the run manifest
//! written next to every run's artifacts.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use oodchess::arena::ArenaError;
use oodchess::datahub::DataError;
use oodchess::engine::EngineError;
use oodchess::lichess::BotError;
use oodchess::metrics::MetricsError;
use oodchess::notation::fen::FenError;
use oodchess::ood::GenError;
use oodchess::policy::PolicyError;
use oodchess::probes::ProbeError;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::args::Command;

/// Failure classes with stable exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Config,
    Engine,
    Data,
    Internal,
}

impl ErrorClass {
    pub fn exit_code(self) -> u8 {
        match self {
            ErrorClass::Usage => 2,
            ErrorClass::Config => 3,
            ErrorClass::Engine => 4,
            ErrorClass::Data => 5,
            ErrorClass::Internal => 1,
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            ErrorClass::Usage => "usage",
            ErrorClass::Config => "config",
            ErrorClass::Engine => "engine",
            ErrorClass::Data => "data",
            ErrorClass::Internal => "internal",
        }
    }

    /// The class tagged onto `err` with `.context(class)`, else a guess
    /// from the library error types in its chain.
    pub fn of(err: &anyhow::Error) -> ErrorClass {
        if let Some(class) = err.downcast_ref::<ErrorClass>() {
            return *class;
        }
        for cause in err.chain() {
            if let Some(class) = classify_cause(cause) {
                return class;
            }
        }
        ErrorClass::Internal
    }
}

fn classify_cause(e: &(dyn std::error::Error + 'static)) -> Option<ErrorClass> {
    use ErrorClass::*;
    if e.is::<EngineError>() || e.is::<PolicyError>() {
        return Some(Engine);
    }
    if let Some(a) = e.downcast_ref::<ArenaError>() {
        return Some(match a {
            ArenaError::InvalidPlan(_) | ArenaError::Book { .. } => Config,
            ArenaError::Io(_) => Data,
            _ => Engine,
        });
    }
    if let Some(b) = e.downcast_ref::<BotError>() {
        return Some(match b {
            BotError::InvalidToken => Config,
            BotError::Policy(_) => Engine,
            _ => Data,
        });
    }
    if e.is::<toml::de::Error>() {
        return Some(Config);
    }
    if let Some(p) = e.downcast_ref::<ProbeError>() {
        return Some(match p {
            ProbeError::Policy(_) | ProbeError::Metrics(_) => Engine,
            _ => Data,
        });
    }
    // Too many failed policy requests.
    if e.is::<MetricsError>() {
        return Some(Engine);
    }
    if e.is::<DataError>() || e.is::<FenError>() || e.is::<GenError>() {
        return Some(Data);
    }
    None
}

impl fmt::Display for ErrorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error", self.key())
    }
}

/// What a run executes; persisted in the manifest so it can be replayed.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub workers: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Empty when the artifacts are a pure function of the config and inputs.
    pub nondeterministic: Vec<String>,
    pub engines: Vec<FileHash>,
    pub inputs: Vec<FileHash>,
    /// Paths relative to the output directory.
    pub outputs: Vec<FileHash>,
}

pub const MANIFEST_FILE: &str = "run.json";

/// Collects what a command read and wrote.
pub struct Run {
    pub out: PathBuf,
    pub workers: usize,
    inputs: BTreeSet<PathBuf>,
    outputs: BTreeSet<PathBuf>,
    engines: BTreeSet<PathBuf>,
    nondeterministic: BTreeSet<String>,
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("hashing {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

impl Run {
    pub fn new(out: PathBuf, workers: usize) -> Run {
        Run {
            out,
            workers,
            inputs: BTreeSet::new(),
            outputs: BTreeSet::new(),
            engines: BTreeSet::new(),
            nondeterministic: BTreeSet::new(),
        }
    }

    /// Records an input file; for a dataset manifest also the data file it names.
    pub fn input(&mut self, path: &Path) {
        if let Ok(m) = oodchess::datahub::read_manifest(path) {
            self.inputs.insert(path.parent().unwrap_or(Path::new(".")).join(m.file));
        }
        self.inputs.insert(path.to_path_buf());
    }

    /// Records an artifact written into the output directory.
    pub fn output(&mut self, path: &Path) {
        self.outputs.insert(path.to_path_buf());
    }

    pub fn engine(&mut self, path: &Path) {
        self.engines.insert(path.to_path_buf());
        self.nondeterministic("engine search");
    }

    pub fn nondeterministic(&mut self, why: &str) {
        self.nondeterministic.insert(why.to_string());
    }

    pub fn out_path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    pub fn create_out(&self) -> Result<()> {
        fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))
    }

    /// Writes `name` into the output directory and records it.
    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
        self.create_out()?;
        let path = self.out_path(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.output(&path);
        Ok(path)
    }

    pub fn has_outputs(&self) -> bool {
        !self.outputs.is_empty()
    }

    /// Writes `run.json`. Paths that cannot be hashed (deleted meanwhile)
    /// are skipped.
    pub fn finish(self, config: RunConfig, error: Option<&anyhow::Error>) -> Result<PathBuf> {
        let hash_all = |paths: &BTreeSet<PathBuf>, relative_to: Option<&Path>| -> Vec<FileHash> {
            paths
                .iter()
                .filter(|p| p.is_file())
                .filter_map(|p| {
                    let shown = relative_to.and_then(|base| p.strip_prefix(base).ok()).unwrap_or(p);
                    Some(FileHash { path: shown.display().to_string(), sha256: sha256_file(p).ok()? })
                })
                .collect()
        };
        let manifest = RunManifest {
            tool: "oodchess".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config,
            status: if error.is_some() { "failed" } else { "ok" }.into(),
            error: error.map(describe),
            nondeterministic: self.nondeterministic.iter().cloned().collect(),
            engines: hash_all(&self.engines, None),
            inputs: hash_all(&self.inputs, None),
            outputs: hash_all(&self.outputs, Some(&self.out)),
        };
        self.create_out()?;
        let path = self.out_path(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("{} is not a run manifest", path.display()))
}

/// The error chain joined with `: `, skipping causes whose text the
/// previous message already includes.
pub fn describe(err: &anyhow::Error) -> String {
    let mut parts: Vec<String> = Vec::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if !parts.last().is_some_and(|prev| prev.contains(&text)) {
            parts.push(text);
        }
    }
    parts.join(": ")
}
