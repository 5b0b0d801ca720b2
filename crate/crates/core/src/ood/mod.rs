//! Out-of-distribution position labelling and the synthetic board
//! generators: Chess960 starts, arbitrary back-rank starts and
//! Knights & Rooks boards.

mod classify;
mod generate;

pub use classify::{classify, OodFlag, OodFlags};
pub use generate::{
    all_back_ranks, chess960_back_rank, chess960_id, chess960_universe, gen_all_starting, gen_chess960,
    gen_knights_rooks, is_chess960_arrangement, BackRank, GenError, KnightsRooksParams, CLASSICAL_BACK_RANK,
};

use serde::{Deserialize, Serialize};

/// Who produced a board.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    FromGame,
    Chess960Start,
    NonstandardStart,
    KnightsRooks,
}

/// Flags computed from the board plus the producer-recorded origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OodLabel {
    pub flags: OodFlags,
    pub origin: Origin,
}

impl OodLabel {
    /// In-distribution means a board from real play with no flag set.
    pub fn is_in_distribution(&self) -> bool {
        self.origin == Origin::FromGame && self.flags.is_empty()
    }
}
