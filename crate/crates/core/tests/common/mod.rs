//! Engine discovery and independent oracles shared by the integration tests.
#![allow(dead_code)]

pub mod fixtures;
pub mod movegen;
pub mod pgn;

use std::path::PathBuf;

use oodchess::engine::{engine_from_env, EngineConfig, EngineKind};

/// Which binary a test talks to, for the log.
pub struct Located {
    pub config: EngineConfig,
    pub external: bool,
}

fn reference() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_oodchess-refengine"))
}

/// `$OODCHESS_ENGINE` when set, else the bundled reference engine.
pub fn classic_engine() -> Located {
    match engine_from_env("OODCHESS_ENGINE") {
        Some(p) => Located { config: EngineConfig::new(p, EngineKind::Classic), external: true },
        None => Located { config: EngineConfig::new(reference(), EngineKind::Classic), external: false },
    }
}

/// `$OODCHESS_VARIANT_ENGINE` when set, else the bundled reference engine.
pub fn variant_engine() -> Located {
    match engine_from_env("OODCHESS_VARIANT_ENGINE") {
        Some(p) => Located { config: EngineConfig::new(p, EngineKind::VariantCapable), external: true },
        None => Located { config: EngineConfig::new(reference(), EngineKind::VariantCapable), external: false },
    }
}

impl Located {
    pub fn describe(&self) -> String {
        let origin = if self.external { "external" } else { "bundled reference" };
        format!("{} ({origin})", self.config.path.display())
    }
}
