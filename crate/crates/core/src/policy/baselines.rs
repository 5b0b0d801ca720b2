use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use super::{Policy, PolicyDistribution, PolicyError, PolicyVerdict};
use crate::engine::{Engine, SearchLimit};
use crate::kernel::Position;
use crate::notation::fen::format_fen;
use crate::notation::uci::format_move;
use crate::seeded_rng;

/// Uniformly random legal move, reproducible under a seed.
pub struct RandomLegal {
    rng: ChaCha8Rng,
}

impl RandomLegal {
    pub fn new(seed: u64) -> RandomLegal {
        RandomLegal { rng: seeded_rng(seed) }
    }
}

impl Policy for RandomLegal {
    fn name(&self) -> &str {
        "random-legal"
    }

    fn choose(&mut self, pos: &Position) -> Result<PolicyVerdict, PolicyError> {
        let moves = pos.legal_moves();
        // With no legal move there is nothing sensible to say; the null move
        // is what UCI engines print in that case.
        let text = moves.choose(&mut self.rng).map_or_else(|| "0000".to_string(), |&m| format_move(pos, m));
        Ok(PolicyVerdict::text(text))
    }
}

/// The untrained baseline: equal probability on every action, regardless of
/// the position. Its chosen move is the argmax, i.e. action 0.
pub struct UniformPolicy;

impl Policy for UniformPolicy {
    fn name(&self) -> &str {
        "uniform"
    }

    fn choose(&mut self, _pos: &Position) -> Result<PolicyVerdict, PolicyError> {
        Ok(PolicyVerdict::from_distribution(PolicyDistribution::uniform()))
    }

    fn supports_distribution(&self) -> bool {
        true
    }

    fn distribution(&mut self, _pos: &Position) -> Result<PolicyDistribution, PolicyError> {
        Ok(PolicyDistribution::uniform())
    }
}

/// A UCI engine used as a policy: its best move, no distribution.
pub struct EnginePolicy {
    name: String,
    engine: Engine,
    limit: SearchLimit,
}

impl EnginePolicy {
    pub fn new(name: impl Into<String>, engine: Engine, limit: SearchLimit) -> EnginePolicy {
        EnginePolicy { name: name.into(), engine, limit }
    }

    pub fn engine_mut(&mut self) -> &mut Engine {
        &mut self.engine
    }
}

impl Policy for EnginePolicy {
    fn name(&self) -> &str {
        &self.name
    }

    fn choose(&mut self, pos: &Position) -> Result<PolicyVerdict, PolicyError> {
        // A no-op unless the variant changed since the last call.
        self.engine.configure_variant(pos.variant())?;
        let m = self.engine.best_move(pos, self.limit)?;
        Ok(PolicyVerdict::text(format_move(pos, m)))
    }

    fn new_game(&mut self) -> Result<(), PolicyError> {
        Ok(self.engine.new_game()?)
    }
}

type Script = Box<dyn FnMut(&Position) -> String + Send>;

/// Answers from a closure; for fixtures and tests.
pub struct ScriptedPolicy {
    name: String,
    script: Script,
}

impl ScriptedPolicy {
    pub fn new(name: impl Into<String>, script: impl FnMut(&Position) -> String + Send + 'static) -> ScriptedPolicy {
        ScriptedPolicy { name: name.into(), script: Box::new(script) }
    }

    /// Same text for every position.
    pub fn constant(text: &str) -> ScriptedPolicy {
        let text = text.to_string();
        ScriptedPolicy::new(format!("constant:{text}"), move |_| text.clone())
    }

    /// Looks the position up by FEN; unknown positions get `fallback`.
    pub fn from_table(name: impl Into<String>, table: HashMap<String, String>, fallback: &str) -> ScriptedPolicy {
        let fallback = fallback.to_string();
        ScriptedPolicy::new(name, move |pos| table.get(&format_fen(pos)).cloned().unwrap_or_else(|| fallback.clone()))
    }
}

impl Policy for ScriptedPolicy {
    fn name(&self) -> &str {
        &self.name
    }

    fn choose(&mut self, pos: &Position) -> Result<PolicyVerdict, PolicyError> {
        Ok(PolicyVerdict::text((self.script)(pos)))
    }
}

type DistScript = Box<dyn FnMut(&Position) -> PolicyDistribution + Send>;

/// A distribution-producing closure; the chosen move is its argmax.
pub struct DistributionFn {
    name: String,
    script: DistScript,
}

impl DistributionFn {
    pub fn new(
        name: impl Into<String>,
        script: impl FnMut(&Position) -> PolicyDistribution + Send + 'static,
    ) -> DistributionFn {
        DistributionFn { name: name.into(), script: Box::new(script) }
    }
}

impl Policy for DistributionFn {
    fn name(&self) -> &str {
        &self.name
    }

    fn choose(&mut self, pos: &Position) -> Result<PolicyVerdict, PolicyError> {
        Ok(PolicyVerdict::from_distribution((self.script)(pos)))
    }

    fn supports_distribution(&self) -> bool {
        true
    }

    fn distribution(&mut self, pos: &Position) -> Result<PolicyDistribution, PolicyError> {
        Ok((self.script)(pos))
    }
}
