//! Sources of randomness: seeded draws and exhaustive enumeration.

use crate::error::{Error, Result};
use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Where strategies get their random choices from.
///
/// Finite choices go through `choose`/`choose_weighted` so that exact mode
/// can enumerate them; bulk sampling needs a real generator.
pub trait Chooser {
    /// Uniform index in `0..n`.
    fn choose(&mut self, n: usize) -> Result<usize>;
    /// Index drawn proportionally to `weights`.
    fn choose_weighted(&mut self, weights: &[f64]) -> Result<usize>;
    /// A generator for draws that cannot be enumerated.
    fn rng(&mut self) -> Result<&mut ChaCha8Rng>;
}

/// Draws from a ChaCha generator.
#[derive(Clone, Debug)]
pub struct SeededChooser(ChaCha8Rng);

impl SeededChooser {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }
}

impl Chooser for SeededChooser {
    fn choose(&mut self, n: usize) -> Result<usize> {
        if n == 0 {
            return Err(Error::Domain("choice among zero options".into()));
        }
        Ok(self.0.random_range(0..n))
    }

    fn choose_weighted(&mut self, weights: &[f64]) -> Result<usize> {
        let dist = WeightedIndex::new(weights).map_err(|e| Error::Domain(format!("bad weights: {e}")))?;
        Ok(dist.sample(&mut self.0))
    }

    fn rng(&mut self) -> Result<&mut ChaCha8Rng> {
        Ok(&mut self.0)
    }
}

#[derive(Clone, Debug)]
struct Step {
    choice: usize,
    /// probabilities of every option at this step
    probs: Vec<f64>,
}

/// Replays a fixed prefix of choices, then always takes the first option
/// with positive probability, recording everything it did.
struct ScriptChooser {
    prefix: Vec<usize>,
    trace: Vec<Step>,
}

impl ScriptChooser {
    fn next(&mut self, probs: Vec<f64>) -> Result<usize> {
        let pos = self.trace.len();
        let choice = match self.prefix.get(pos) {
            Some(&c) => c,
            None => probs
                .iter()
                .position(|&p| p > 0.0)
                .ok_or_else(|| Error::Domain("no option with positive probability".into()))?,
        };
        self.trace.push(Step { choice, probs });
        Ok(choice)
    }
}

impl Chooser for ScriptChooser {
    fn choose(&mut self, n: usize) -> Result<usize> {
        if n == 0 {
            return Err(Error::Domain("choice among zero options".into()));
        }
        self.next(vec![1.0 / n as f64; n])
    }

    fn choose_weighted(&mut self, weights: &[f64]) -> Result<usize> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(Error::Domain("bad weights".into()));
        }
        self.next(weights.iter().map(|w| w / total).collect())
    }

    fn rng(&mut self) -> Result<&mut ChaCha8Rng> {
        Err(Error::NotEnumerable(
            "this strategy samples from a continuous or very large space; use monte carlo mode".into(),
        ))
    }
}

/// Run `f` once for every sequence of choices it can make, returning each
/// outcome with its probability. Fails if `f` needs bulk randomness.
pub fn enumerate_outcomes<T>(f: impl FnMut(&mut dyn Chooser) -> Result<T>) -> Result<Vec<(f64, T)>> {
    enumerate_outcomes_limited(u64::MAX, f)
}

/// As `enumerate_outcomes`, failing with `BudgetExceeded` once more than
/// `budget` outcomes are produced.
pub fn enumerate_outcomes_limited<T>(
    budget: u64,
    mut f: impl FnMut(&mut dyn Chooser) -> Result<T>,
) -> Result<Vec<(f64, T)>> {
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    loop {
        let mut ch = ScriptChooser { prefix, trace: Vec::new() };
        let value = f(&mut ch)?;
        let prob: f64 = ch.trace.iter().map(|s| s.probs[s.choice]).product();
        if out.len() as u64 >= budget {
            return Err(Error::BudgetExceeded { budget });
        }
        out.push((prob, value));
        // advance the deepest step that still has an untried option
        let mut trace = ch.trace;
        loop {
            let Some(step) = trace.pop() else { return Ok(out) };
            if let Some(next) = (step.choice + 1..step.probs.len()).find(|&c| step.probs[c] > 0.0) {
                prefix = trace.iter().map(|s| s.choice).chain([next]).collect();
                break;
            }
        }
    }
}

/// Deterministic seed for sub-stream `index` of `base` (splitmix64 finalizer).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
