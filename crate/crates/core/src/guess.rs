//! Guessing an unknown parameter on a power-of-two grid.

use crate::error::{domain, Result};
use crate::random::Chooser;
use serde::{Deserialize, Serialize};

/// Largest exponent of the unbounded guess distribution.
pub const UNBOUNDED_MAX_EXPONENT: u32 = 128;

/// The distribution a parameter is guessed from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuessMode {
    /// Uniform over `{L, 2L, 4L, .., H}`.
    Bounded { low: f64, high: f64 },
    /// `2^i` with probability proportional to `1 / (i log2(i)^(1+eps))`,
    /// `2 <= i <= 128`.
    Unbounded { eps: f64 },
}

fn is_power_of_two(x: f64) -> bool {
    x > 0.0 && x.is_finite() && x.log2().fract() == 0.0 && 2f64.powi(x.log2() as i32) == x
}

impl GuessMode {
    /// The support and the probability of each value.
    pub fn support(&self) -> Result<Vec<(f64, f64)>> {
        match *self {
            Self::Bounded { low, high } => {
                if !is_power_of_two(low) || !is_power_of_two(high) || low > high {
                    return Err(domain(format!(
                        "bounded guess needs powers of two L <= H, got ({low}, {high})"
                    )));
                }
                let steps = (high / low).log2() as i32;
                let p = 1.0 / (steps + 1) as f64;
                Ok((0..=steps).map(|i| (low * 2f64.powi(i), p)).collect())
            }
            Self::Unbounded { eps } => {
                if !(eps > 0.0) || !eps.is_finite() {
                    return Err(domain(format!("unbounded guess needs eps > 0, got {eps}")));
                }
                let w = unbounded_weights(eps);
                let z: f64 = w.iter().sum();
                Ok((2..=UNBOUNDED_MAX_EXPONENT)
                    .zip(w)
                    .map(|(i, w)| (2f64.powi(i as i32), w / z))
                    .collect())
            }
        }
    }
}

fn unbounded_weights(eps: f64) -> Vec<f64> {
    (2..=UNBOUNDED_MAX_EXPONENT)
        .map(|i| {
            let i = i as f64;
            1.0 / (i * i.log2().powf(1.0 + eps))
        })
        .collect()
}

/// Draw a guess from `mode`.
pub fn guess_parameter(mode: GuessMode, chooser: &mut dyn Chooser) -> Result<f64> {
    let support = mode.support()?;
    let i = match mode {
        GuessMode::Bounded { .. } => chooser.choose(support.len())?,
        GuessMode::Unbounded { eps } => chooser.choose_weighted(&unbounded_weights(eps))?,
    };
    Ok(support[i].0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{enumerate_outcomes, SeededChooser};

    #[test]
    fn bounded_is_uniform() {
        let outs = enumerate_outcomes(|ch| guess_parameter(GuessMode::Bounded { low: 1.0, high: 8.0 }, ch)).unwrap();
        assert_eq!(outs, vec![(0.25, 1.0), (0.25, 2.0), (0.25, 4.0), (0.25, 8.0)]);
        let one = enumerate_outcomes(|ch| guess_parameter(GuessMode::Bounded { low: 4.0, high: 4.0 }, ch)).unwrap();
        assert_eq!(one, vec![(1.0, 4.0)]);
    }

    #[test]
    fn invalid_bounds() {
        let mut ch = SeededChooser::new(1);
        assert!(guess_parameter(GuessMode::Bounded { low: 3.0, high: 8.0 }, &mut ch).is_err());
        assert!(guess_parameter(GuessMode::Bounded { low: 8.0, high: 4.0 }, &mut ch).is_err());
        assert!(guess_parameter(GuessMode::Unbounded { eps: 0.0 }, &mut ch).is_err());
    }

    #[test]
    fn unbounded_support_sums_to_one() {
        let s = GuessMode::Unbounded { eps: 1.0 }.support().unwrap();
        assert_eq!(s.len(), 127);
        assert!((s.iter().map(|x| x.1).sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(s[0].0, 4.0);
    }
}
