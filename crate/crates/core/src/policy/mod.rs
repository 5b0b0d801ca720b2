//! Anything that maps a position to a move.
//!
//! The gateway passes policy output through untouched: a verdict carries the
//! move text exactly as the policy produced it, legal or not, so that the
//! metrics downstream see every mistake.

mod baselines;
pub mod wire;

pub use baselines::{DistributionFn, EnginePolicy, RandomLegal, ScriptedPolicy, UniformPolicy};
pub use wire::{PolicyEndpoint, WirePolicy};

use crate::engine::EngineError;
use crate::kernel::Position;
use crate::notation::actions::{decode, ACTION_COUNT};
use crate::notation::uci::{UciMove, UciParseError};

#[derive(Debug, thiserror::Error)]
pub enum PolicyError {
    #[error("policy {0} does not provide action distributions")]
    Unsupported(String),
    #[error("distribution has {0} entries, expected {ACTION_COUNT}")]
    BadLength(usize),
    #[error("distribution has no finite entry")]
    Degenerate,
    #[error("policy transport failed: {0}")]
    Transport(#[from] std::io::Error),
    #[error("policy did not answer within {0:?}")]
    Timeout(std::time::Duration),
    #[error("policy closed the connection")]
    Closed,
    #[error("policy connection is unusable after an earlier failure")]
    Poisoned,
    #[error("malformed policy frame: {0:?}")]
    Malformed(String),
    #[error("policy speaks protocol version {0}, expected 1")]
    VersionMismatch(String),
    #[error("policy error {code}: {message}")]
    Remote { code: String, message: String },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// A full distribution over the action space, stored as the given logits
/// together with their max-shifted exponentials so that sums of
/// probabilities are formed as one division at the end.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyDistribution {
    logits: Vec<f64>,
    weights: Vec<f64>,
    total: f64,
}

impl PolicyDistribution {
    /// Accepts unnormalized log-weights (logits or log-probabilities);
    /// `-inf` entries get zero probability.
    pub fn from_logits(logits: Vec<f64>) -> Result<PolicyDistribution, PolicyError> {
        if logits.len() != ACTION_COUNT {
            return Err(PolicyError::BadLength(logits.len()));
        }
        if logits.iter().any(|x| x.is_nan() || *x == f64::INFINITY) {
            return Err(PolicyError::Degenerate);
        }
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(PolicyError::Degenerate);
        }
        let weights: Vec<f64> = logits.iter().map(|&x| (x - max).exp()).collect();
        let total = weights.iter().sum();
        Ok(PolicyDistribution { logits, weights, total })
    }

    /// From nonnegative probabilities or weights.
    pub fn from_probs(probs: &[f64]) -> Result<PolicyDistribution, PolicyError> {
        if probs.iter().any(|p| *p < 0.0) {
            return Err(PolicyError::Degenerate);
        }
        Self::from_logits(probs.iter().map(|p| p.ln()).collect())
    }

    pub fn uniform() -> PolicyDistribution {
        Self::from_logits(vec![0.0; ACTION_COUNT]).expect("valid")
    }

    /// All mass on one action.
    pub fn one_hot(index: usize) -> PolicyDistribution {
        let mut logits = vec![f64::NEG_INFINITY; ACTION_COUNT];
        logits[index] = 0.0;
        Self::from_logits(logits).expect("valid")
    }

    /// Uniform over a set of actions.
    pub fn uniform_over(indices: impl IntoIterator<Item = usize>) -> Result<PolicyDistribution, PolicyError> {
        let mut logits = vec![f64::NEG_INFINITY; ACTION_COUNT];
        for i in indices {
            *logits.get_mut(i).ok_or(PolicyError::BadLength(i))? = 0.0;
        }
        Self::from_logits(logits)
    }

    pub fn len(&self) -> usize {
        self.logits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.logits.is_empty()
    }

    pub fn prob(&self, index: usize) -> f64 {
        self.weights[index] / self.total
    }

    pub fn log_prob(&self, index: usize) -> f64 {
        self.weights[index].ln() - self.total.ln()
    }

    pub fn probs(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w / self.total).collect()
    }

    pub fn log_probs(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.log_prob(i)).collect()
    }

    /// Probability of a set of actions, summed before normalizing.
    pub fn mass(&self, indices: impl IntoIterator<Item = usize>) -> f64 {
        let w: f64 = indices.into_iter().map(|i| self.weights[i]).sum();
        w / self.total
    }

    /// Highest-probability action; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &w) in self.weights.iter().enumerate() {
            if w > self.weights[best] {
                best = i;
            }
        }
        best
    }

    pub fn argmax_move(&self) -> UciMove {
        decode(self.argmax()).expect("index within action space")
    }

    /// Probabilities sum to one within 1e-6.
    pub fn is_normalized(&self) -> bool {
        (self.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-6
    }
}

/// What a policy answered for one position.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyVerdict {
    /// Move text exactly as produced, possibly malformed or illegal.
    pub text: String,
    pub distribution: Option<PolicyDistribution>,
}

impl PolicyVerdict {
    pub fn text(text: impl Into<String>) -> PolicyVerdict {
        PolicyVerdict { text: text.into(), distribution: None }
    }

    /// Verdict whose move is the distribution's argmax.
    pub fn from_distribution(dist: PolicyDistribution) -> PolicyVerdict {
        PolicyVerdict { text: dist.argmax_move().to_string(), distribution: Some(dist) }
    }

    pub fn uci(&self) -> Result<UciMove, UciParseError> {
        self.text.parse()
    }
}

pub trait Policy: Send {
    fn name(&self) -> &str;

    fn choose(&mut self, pos: &Position) -> Result<PolicyVerdict, PolicyError>;

    fn supports_distribution(&self) -> bool {
        false
    }

    fn distribution(&mut self, _pos: &Position) -> Result<PolicyDistribution, PolicyError> {
        Err(PolicyError::Unsupported(self.name().to_string()))
    }

    /// Called between games; stateless policies ignore it.
    fn new_game(&mut self) -> Result<(), PolicyError> {
        Ok(())
    }
}

impl<P: Policy + ?Sized> Policy for Box<P> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn choose(&mut self, pos: &Position) -> Result<PolicyVerdict, PolicyError> {
        (**self).choose(pos)
    }
    fn supports_distribution(&self) -> bool {
        (**self).supports_distribution()
    }
    fn distribution(&mut self, pos: &Position) -> Result<PolicyDistribution, PolicyError> {
        (**self).distribution(pos)
    }
    fn new_game(&mut self) -> Result<(), PolicyError> {
        (**self).new_game()
    }
}
