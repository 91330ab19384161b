//! Pricing policies behind one stateful interface.
//!
//! Prices come from the ladder `p_i = OPT / 2^i`. Every policy sees only the
//! round index and the unsold inventory, except `p-infinity` which is given
//! the whole instance.

use crate::demand::{demand, TieBreakPolicy};
use crate::error::{Error, Result};
use crate::guess::{guess_parameter, GuessMode};
use crate::instances::Instance;
use crate::num::{ceil_log2, ceil_two_log2, definitely_greater};
use crate::pricing::{GroupPrice, PriceAssignment};
use crate::random::{enumerate_outcomes, Chooser, SeededChooser};
use crate::valuation::Bundle;
use rand_distr::{Binomial, Distribution, Normal};
use serde::Serialize;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

/// What the seller knows before the first buyer arrives.
#[derive(Clone, Debug)]
pub struct PublicInfo {
    /// total number of units
    pub n: u128,
    pub opt_estimate: f64,
    pub m_estimate: usize,
    /// the whole instance; read only by `p-infinity`
    pub full_information: Option<Arc<Instance>>,
    /// buyer behaviour assumed when `p-infinity` simulates the market
    pub tie: TieBreakPolicy,
}

impl PublicInfo {
    pub fn new(n: u128, opt_estimate: f64, m_estimate: usize) -> Result<Self> {
        if !(opt_estimate > 0.0 && opt_estimate.is_finite()) {
            return Err(Error::Config(format!("OPT estimate must be positive, got {opt_estimate}")));
        }
        if m_estimate == 0 {
            return Err(Error::Config("m estimate must be positive".into()));
        }
        Ok(Self { n, opt_estimate, m_estimate, full_information: None, tie: TieBreakPolicy::STRICT })
    }

    /// `n` and `m` read off `inst`.
    pub fn for_instance(inst: &Instance, opt_estimate: f64) -> Result<Self> {
        Self::new(inst.total_units(), opt_estimate, inst.m().max(1))
    }

    pub fn with_full_information(mut self, inst: Arc<Instance>) -> Self {
        self.full_information = Some(inst);
        self
    }

    pub fn with_tie(mut self, tie: TieBreakPolicy) -> Self {
        self.tie = tie;
        self
    }
}

/// `k = ceil(log2 n) + 1`, so that `2^k >= 2n`.
pub fn ladder_k(n: u128) -> u32 {
    ceil_log2(n) + 1
}

/// `[OPT/2, OPT/4, .., OPT/2^count]`.
pub fn ladder(opt: f64, count: u32) -> Vec<f64> {
    (1..=count as i32).map(|i| opt * 2f64.powi(-i)).collect()
}

/// A strategy description, as written on the command line.
#[derive(Clone, Debug, PartialEq)]
pub enum StrategySpec {
    StaticUniform { price: f64 },
    DynamicUniform,
    DynamicMonotone,
    KPhase,
    PInfinity,
    StaticNonuniform,
    Guess { mode: GuessMode, inner: Box<StrategySpec> },
}

impl FromStr for StrategySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("unknown strategy {s:?}"));
        if let Some(rest) = s.strip_prefix("guess:") {
            let close = rest.find(')').ok_or_else(bad)?;
            let (mode, inner) = (&rest[..=close], &rest[close + 1..]);
            let inner = inner.strip_prefix(':').ok_or_else(bad)?;
            let args = |prefix: &str| -> Result<Vec<f64>> {
                mode.strip_prefix(prefix)
                    .and_then(|m| m.strip_suffix(')'))
                    .ok_or_else(bad)?
                    .split(',')
                    .map(|x| x.trim().parse::<f64>().map_err(|_| bad()))
                    .collect()
            };
            let mode = if mode.starts_with("bounded(") {
                match args("bounded(")?[..] {
                    [low, high] => GuessMode::Bounded { low, high },
                    _ => return Err(bad()),
                }
            } else if mode.starts_with("unbounded(") {
                match args("unbounded(")?[..] {
                    [eps] => GuessMode::Unbounded { eps },
                    _ => return Err(bad()),
                }
            } else {
                return Err(bad());
            };
            return Ok(Self::Guess { mode, inner: Box::new(inner.parse()?) });
        }
        if let Some(rest) = s.strip_prefix("static-uniform:") {
            let p = rest.strip_prefix("p=").ok_or_else(bad)?;
            let price: f64 = p.parse().map_err(|_| bad())?;
            if !(price >= 0.0) {
                return Err(Error::Parse(format!("price must be non-negative, got {p}")));
            }
            return Ok(Self::StaticUniform { price });
        }
        Ok(match s {
            "dynamic-uniform" => Self::DynamicUniform,
            "dynamic-monotone" => Self::DynamicMonotone,
            "k-phase" => Self::KPhase,
            "p-infinity" => Self::PInfinity,
            "static-nonuniform" => Self::StaticNonuniform,
            _ => return Err(bad()),
        })
    }
}

impl fmt::Display for StrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::StaticUniform { price } => write!(f, "static-uniform:p={price}"),
            Self::DynamicUniform => f.write_str("dynamic-uniform"),
            Self::DynamicMonotone => f.write_str("dynamic-monotone"),
            Self::KPhase => f.write_str("k-phase"),
            Self::PInfinity => f.write_str("p-infinity"),
            Self::StaticNonuniform => f.write_str("static-nonuniform"),
            Self::Guess { mode: GuessMode::Bounded { low, high }, inner } => write!(f, "guess:bounded({low},{high}):{inner}"),
            Self::Guess { mode: GuessMode::Unbounded { eps }, inner } => write!(f, "guess:unbounded({eps}):{inner}"),
        }
    }
}

impl StrategySpec {
    /// Does this strategy use random choices?
    pub fn is_randomized(&self) -> bool {
        matches!(self, Self::DynamicUniform | Self::StaticNonuniform | Self::Guess { .. })
    }

    pub fn needs_full_information(&self) -> bool {
        match self {
            Self::PInfinity => true,
            Self::Guess { inner, .. } => inner.needs_full_information(),
            _ => false,
        }
    }

    /// Build with a seeded generator.
    pub fn instantiate(&self, info: &PublicInfo, seed: u64) -> Result<StrategyInstance> {
        let mut rng = SeededChooser::new(seed);
        let mut s = self.build(info, &mut rng)?;
        s.rng = Some(rng);
        Ok(s)
    }

    /// Build drawing construction-time choices from `chooser`. The result
    /// has no generator of its own; drive it with `next_prices_with`.
    pub fn instantiate_with(&self, info: &PublicInfo, chooser: &mut dyn Chooser) -> Result<StrategyInstance> {
        self.build(info, chooser)
    }

    fn build(&self, info: &PublicInfo, ch: &mut dyn Chooser) -> Result<StrategyInstance> {
        let opt = info.opt_estimate;
        let mut meta = StrategyMeta { kind: self.to_string(), ..Default::default() };
        let policy = match self {
            Self::StaticUniform { price } => {
                if !(*price >= 0.0) {
                    return Err(Error::Domain(format!("negative price {price}")));
                }
                Policy::Fixed(PriceAssignment::Uniform(*price))
            }
            Self::DynamicUniform => {
                let k = ladder_k(info.n);
                let prices = ladder(opt, k + 1);
                let threshold = ch.choose(prices.len())? + 1;
                meta.k = Some(k);
                meta.threshold_index = Some(threshold);
                Policy::DynamicUniform { prices, threshold }
            }
            Self::DynamicMonotone => {
                let k = ladder_k(info.n);
                if info.m_estimate < k as usize {
                    return Err(Error::Config(format!(
                        "dynamic-monotone needs m >= ceil(log2 n) + 1 = {k}, got m = {}",
                        info.m_estimate
                    )));
                }
                meta.k = Some(k);
                Policy::Monotone { opt, k, m: info.m_estimate }
            }
            Self::KPhase => {
                let k = ladder_k(info.n);
                let phase_len = info.m_estimate / (k as usize + 1);
                if phase_len == 0 {
                    return Err(Error::Config(format!(
                        "k-phase needs m >= k + 1 = {} buyers, got m = {}",
                        k + 1,
                        info.m_estimate
                    )));
                }
                meta.k = Some(k);
                Policy::KPhase { prices: ladder(opt, k + 1), phase_len }
            }
            Self::PInfinity => {
                let (assignment, run) = p_infinity_assignment(info)?;
                meta.k = Some(run.k);
                meta.best_phase = Some(run.best_phase);
                meta.phase_revenues = Some(run.phase_revenues);
                Policy::Fixed(assignment)
            }
            Self::StaticNonuniform => {
                let lad = nonuniform_ladder(info);
                meta.k = Some(lad.k);
                if ch.choose(2)? == 0 {
                    meta.branch = Some("uniform".into());
                    let i = ch.choose(lad.branch_a.len())?;
                    Policy::Fixed(PriceAssignment::Uniform(lad.branch_a[i]))
                } else {
                    meta.branch = Some("per_unit".into());
                    Policy::PerUnit { prices: lad.branch_b, assignment: None }
                }
            }
            Self::Guess { mode, inner } => {
                let x = guess_parameter(*mode, ch)?;
                let mut guessed = info.clone();
                guessed.opt_estimate = x;
                let mut s = inner.build(&guessed, ch)?;
                s.meta.kind = self.to_string();
                s.meta.guessed = Some(x);
                return Ok(s);
            }
        };
        Ok(StrategyInstance { policy, rng: None, meta })
    }
}

/// Parameters drawn when a strategy was built.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StrategyMeta {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold_index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guessed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_phase: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_revenues: Option<Vec<f64>>,
}

#[derive(Clone, Debug)]
enum Policy {
    Fixed(PriceAssignment),
    /// a fresh uniform draw among the first `threshold` prices each round
    DynamicUniform { prices: Vec<f64>, threshold: usize },
    /// `OPT / (2 gamma^t)` with `gamma = 2^(k/m)`
    Monotone { opt: f64, k: u32, m: usize },
    KPhase { prices: Vec<f64>, phase_len: usize },
    /// independent per-unit prices, drawn on the first call
    PerUnit { prices: Vec<f64>, assignment: Option<PriceAssignment> },
}

/// A pricing policy with its own state.
#[derive(Clone, Debug)]
pub struct StrategyInstance {
    policy: Policy,
    rng: Option<SeededChooser>,
    meta: StrategyMeta,
}

impl StrategyInstance {
    pub fn metadata(&self) -> &StrategyMeta {
        &self.meta
    }

    /// Prices for `round` (0-based) given the unsold units.
    pub fn next_prices(&mut self, round: usize, unsold: &Bundle) -> Result<PriceAssignment> {
        match self.rng.take() {
            Some(mut rng) => {
                let r = self.next_prices_with(round, unsold, &mut rng);
                self.rng = Some(rng);
                r
            }
            None => self.next_prices_with(round, unsold, &mut NoChoices),
        }
    }

    /// As `next_prices`, drawing any random choice from `chooser`.
    pub fn next_prices_with(&mut self, round: usize, unsold: &Bundle, chooser: &mut dyn Chooser) -> Result<PriceAssignment> {
        Ok(match &mut self.policy {
            Policy::Fixed(p) => p.clone(),
            Policy::DynamicUniform { prices, threshold } => PriceAssignment::Uniform(prices[chooser.choose(*threshold)?]),
            Policy::Monotone { opt, k, m } => {
                let t = round as f64 + 1.0;
                PriceAssignment::Uniform(*opt * 0.5 * (-(*k as f64) * t / *m as f64).exp2())
            }
            Policy::KPhase { prices, phase_len } => {
                PriceAssignment::Uniform(prices[(round / *phase_len).min(prices.len() - 1)])
            }
            Policy::PerUnit { prices, assignment } => {
                if assignment.is_none() {
                    *assignment = Some(sample_per_unit(prices, unsold, chooser)?);
                }
                assignment.clone().expect("just drawn")
            }
        })
    }
}

struct NoChoices;

impl Chooser for NoChoices {
    fn choose(&mut self, _: usize) -> Result<usize> {
        Err(Error::NotEnumerable("strategy was built without a generator; use next_prices_with".into()))
    }
    fn choose_weighted(&mut self, _: &[f64]) -> Result<usize> {
        self.choose(0)
    }
    fn rng(&mut self) -> Result<&mut rand_chacha::ChaCha8Rng> {
        Err(Error::NotEnumerable("strategy was built without a generator; use next_prices_with".into()))
    }
}

/// Ladders of the static non-uniform strategy.
#[derive(Clone, Debug, PartialEq)]
pub struct NonuniformLadder {
    /// `max(1, ceil(2 log2 n))`
    pub k: u32,
    /// `p_1 .. p_k`
    pub branch_a: Vec<f64>,
    /// `p_i / 2` for `i = 1 .. k+1`
    pub branch_b: Vec<f64>,
}

pub fn nonuniform_ladder(info: &PublicInfo) -> NonuniformLadder {
    let k = ceil_two_log2(info.n).max(1);
    let opt = info.opt_estimate;
    NonuniformLadder {
        k,
        branch_a: ladder(opt, k),
        branch_b: ladder(opt, k + 1).into_iter().map(|p| p / 2.0).collect(),
    }
}

/// Per-unit branch of the static non-uniform strategy on `inventory`.
pub fn sample_branch_b(info: &PublicInfo, inventory: &Bundle, chooser: &mut dyn Chooser) -> Result<PriceAssignment> {
    sample_per_unit(&nonuniform_ladder(info).branch_b, inventory, chooser)
}

/// Each unit independently gets a uniformly random entry of `prices`. Single
/// units use enumerable choices; larger groups draw a multinomial split.
fn sample_per_unit(prices: &[f64], inventory: &Bundle, ch: &mut dyn Chooser) -> Result<PriceAssignment> {
    let l = prices.len();
    let mut out = Vec::with_capacity(inventory.n_groups());
    for &count in inventory.counts() {
        out.push(match count {
            0 => GroupPrice::Unavailable,
            1 => GroupPrice::Price(prices[ch.choose(l)?]),
            _ => {
                let rng = ch.rng()?;
                let mut left = count;
                let mut tiers = Vec::new();
                for (i, &p) in prices.iter().enumerate() {
                    let x = if i + 1 == l { left } else { binomial(left, 1.0 / (l - i) as f64, rng)? };
                    left -= x;
                    if x > 0 {
                        tiers.push((p, x));
                    }
                }
                tiers.sort_by(|a, b| a.0.total_cmp(&b.0));
                if tiers.len() == 1 {
                    GroupPrice::Price(tiers[0].0)
                } else {
                    GroupPrice::Tiered(tiers)
                }
            }
        });
    }
    Ok(PriceAssignment::per_group(out))
}

fn binomial(n: u128, p: f64, rng: &mut rand_chacha::ChaCha8Rng) -> Result<u128> {
    const EXACT_LIMIT: u128 = 1 << 53;
    if n <= EXACT_LIMIT {
        let d = Binomial::new(n as u64, p).map_err(|e| Error::Domain(e.to_string()))?;
        return Ok(d.sample(rng) as u128);
    }
    // the relative spread is below 1e-8 here; a normal draw is exact to f64 precision
    let nf = n as f64;
    let d = Normal::new(nf * p, (nf * p * (1.0 - p)).sqrt()).map_err(|e| Error::Domain(e.to_string()))?;
    Ok((d.sample(rng).round().max(0.0) as u128).min(n))
}

/// The internal k-phase run behind `p-infinity`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseRun {
    pub k: u32,
    pub phase_len: usize,
    pub phase_revenues: Vec<f64>,
    pub best_phase: usize,
    /// unsold units at the start of the best phase
    pub start_set: Bundle,
    pub price: f64,
}

/// Simulate k-phase pricing on identical buyers and price the start set of
/// the best phase at that phase's price, everything else unavailable.
///
/// With fewer than `k + 1` buyers every phase gets one copy of the shared
/// valuation; the replay still matches the chosen phase on the real buyers.
pub fn p_infinity_assignment(info: &PublicInfo) -> Result<(PriceAssignment, PhaseRun)> {
    let inst = info
        .full_information
        .as_ref()
        .ok_or_else(|| Error::Precondition("p-infinity needs the full instance".into()))?;
    if inst.m() == 0 || !inst.identical_buyers() {
        return Err(Error::Precondition("p-infinity needs buyers that share one valuation".into()));
    }
    let v = &inst.buyers()[0].valuation;
    let k = ladder_k(inst.total_units());
    let prices = ladder(info.opt_estimate, k + 1);
    let m = info.m_estimate;
    let phase_len = (m / (k as usize + 1)).max(1);
    let mut unsold = inst.full_bundle();
    let mut phase_revenues = Vec::new();
    let mut starts = Vec::new();
    for (i, &p) in prices.iter().enumerate() {
        let rounds = if i == k as usize { m.saturating_sub(k as usize * phase_len).max(phase_len) } else { phase_len };
        starts.push(unsold.clone());
        let mut rev = 0.0;
        for _ in 0..rounds {
            let pur = demand(v, &unsold, &PriceAssignment::Uniform(p), info.tie)?;
            unsold.subtract(&pur.bundle)?;
            rev += pur.payment;
        }
        phase_revenues.push(rev);
    }
    let mut best = 0;
    for (i, &r) in phase_revenues.iter().enumerate() {
        if definitely_greater(r, phase_revenues[best]) {
            best = i;
        }
    }
    let start = starts.swap_remove(best);
    let p = prices[best];
    let full = inst.full_bundle();
    let assignment = if start == full {
        PriceAssignment::Uniform(p)
    } else {
        PriceAssignment::per_group(
            full.counts()
                .iter()
                .zip(start.counts())
                .map(|(&all, &t)| match t {
                    0 => GroupPrice::Unavailable,
                    t if t == all => GroupPrice::Price(p),
                    t => GroupPrice::Tiered(vec![(p, t), (f64::INFINITY, all - t)]),
                })
                .collect(),
        )
    };
    Ok((assignment, PhaseRun { k, phase_len, phase_revenues, best_phase: best, start_set: start, price: p }))
}

/// Every price sequence the strategy can post over `rounds` rounds while the
/// inventory stays at `unsold`, with its probability.
pub fn enumerate_price_paths(
    spec: &StrategySpec,
    info: &PublicInfo,
    unsold: &Bundle,
    rounds: usize,
) -> Result<Vec<(f64, Vec<PriceAssignment>)>> {
    enumerate_outcomes(|ch| {
        let mut s = spec.instantiate_with(info, ch)?;
        (0..rounds).map(|r| s.next_prices_with(r, unsold, ch)).collect()
    })
}

pub fn static_uniform(p: f64) -> Result<StrategyInstance> {
    StrategySpec::StaticUniform { price: p }.instantiate(&PublicInfo::new(0, 1.0, 1)?, 0)
}

pub fn dynamic_uniform(info: &PublicInfo, seed: u64) -> Result<StrategyInstance> {
    StrategySpec::DynamicUniform.instantiate(info, seed)
}

pub fn dynamic_monotone(info: &PublicInfo) -> Result<StrategyInstance> {
    StrategySpec::DynamicMonotone.instantiate(info, 0)
}

pub fn k_phase_monotone(info: &PublicInfo) -> Result<StrategyInstance> {
    StrategySpec::KPhase.instantiate(info, 0)
}

pub fn p_infinity_from_kphase(info: &PublicInfo) -> Result<StrategyInstance> {
    StrategySpec::PInfinity.instantiate(info, 0)
}

pub fn static_nonuniform_random(info: &PublicInfo, seed: u64) -> Result<StrategyInstance> {
    StrategySpec::StaticNonuniform.instantiate(info, seed)
}

pub fn guess_wrapped(inner: StrategySpec, mode: GuessMode, info: &PublicInfo, seed: u64) -> Result<StrategyInstance> {
    StrategySpec::Guess { mode, inner: Box::new(inner) }.instantiate(info, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_prices(s: &mut StrategyInstance, rounds: usize) -> Vec<f64> {
        let b = Bundle::from_counts(vec![1; 4]);
        (0..rounds)
            .map(|r| match s.next_prices(r, &b).unwrap() {
                PriceAssignment::Uniform(p) => p,
                _ => panic!("expected uniform"),
            })
            .collect()
    }

    #[test]
    fn grammar_round_trips() {
        for s in [
            "static-uniform:p=0.4",
            "dynamic-uniform",
            "dynamic-monotone",
            "k-phase",
            "p-infinity",
            "static-nonuniform",
            "guess:bounded(1,8):dynamic-uniform",
            "guess:unbounded(0.5):k-phase",
        ] {
            let spec: StrategySpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("guess:bounded(1):k-phase".parse::<StrategySpec>().is_err());
        assert!("static-uniform:p=-1".parse::<StrategySpec>().is_err());
    }

    #[test]
    fn dynamic_uniform_ladder() {
        let info = PublicInfo::new(4, 8.0, 2).unwrap();
        let outs = enumerate_outcomes(|ch| Ok(StrategySpec::DynamicUniform.instantiate_with(&info, ch)?.meta)).unwrap();
        assert_eq!(outs.len(), 4);
        assert!(outs.iter().all(|o| o.0 == 0.25 && o.1.k == Some(3)));
        let paths = enumerate_price_paths(&StrategySpec::DynamicUniform, &info, &Bundle::from_counts(vec![1; 4]), 2).unwrap();
        let p44: f64 = paths
            .iter()
            .filter(|(_, ps)| ps.iter().all(|p| *p == PriceAssignment::Uniform(4.0)))
            .map(|x| x.0)
            .sum();
        let want: f64 = (0..4).map(|j| 0.25 / ((j + 1) * (j + 1)) as f64).sum();
        assert!((p44 - want).abs() < 1e-15);
        let support: std::collections::BTreeSet<u64> =
            paths.iter().flat_map(|(_, ps)| ps.iter().map(|p| p.min_price().to_bits())).collect();
        assert_eq!(support.len(), 4);
    }

    #[test]
    fn monotone_schedule() {
        let mut s = dynamic_monotone(&PublicInfo::new(4, 8.0, 3).unwrap()).unwrap();
        assert_eq!(uniform_prices(&mut s, 3), vec![2.0, 1.0, 0.5]);
        let mut s = dynamic_monotone(&PublicInfo::new(4, 8.0, 6).unwrap()).unwrap();
        let p = uniform_prices(&mut s, 6);
        assert!((p[0] - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!(p.windows(2).all(|w| (w[1] / w[0] - 2f64.powf(-0.5)).abs() < 1e-12));
        assert!(matches!(dynamic_monotone(&PublicInfo::new(4, 8.0, 2).unwrap()), Err(Error::Config(_))));
    }

    #[test]
    fn k_phase_schedule() {
        let mut s = k_phase_monotone(&PublicInfo::new(4, 8.0, 8).unwrap()).unwrap();
        assert_eq!(uniform_prices(&mut s, 8), vec![4.0, 4.0, 2.0, 2.0, 1.0, 1.0, 0.5, 0.5]);
        let mut s = k_phase_monotone(&PublicInfo::new(4, 8.0, 4).unwrap()).unwrap();
        assert_eq!(uniform_prices(&mut s, 4), vec![4.0, 2.0, 1.0, 0.5]);
        assert!(matches!(k_phase_monotone(&PublicInfo::new(4, 8.0, 3).unwrap()), Err(Error::Config(_))));
    }

    #[test]
    fn nonuniform_ladders() {
        let lad = nonuniform_ladder(&PublicInfo::new(4, 16.0, 1).unwrap());
        assert_eq!(lad.k, 4);
        assert_eq!(lad.branch_a, vec![8.0, 4.0, 2.0, 1.0]);
        assert_eq!(lad.branch_b, vec![4.0, 2.0, 1.0, 0.5, 0.25]);
        let one = nonuniform_ladder(&PublicInfo::new(1, 16.0, 1).unwrap());
        assert_eq!((one.k, one.branch_a.len(), one.branch_b.len()), (1, 1, 2));
    }

    #[test]
    fn static_emits_same_object() {
        let info = PublicInfo::new(4, 16.0, 1).unwrap();
        for seed in 0..20 {
            let mut s = static_nonuniform_random(&info, seed).unwrap();
            let b = Bundle::from_counts(vec![3, 1, 2]);
            let a = s.next_prices(0, &b).unwrap();
            let c = s.next_prices(1, &Bundle::from_counts(vec![0, 1, 2])).unwrap();
            match (&a, &c) {
                (PriceAssignment::PerGroup(x), PriceAssignment::PerGroup(y)) => assert!(Arc::ptr_eq(x, y)),
                _ => assert_eq!(a, c),
            }
        }
    }

    #[test]
    fn guess_bounded_singleton_matches_inner() {
        let info = PublicInfo::new(4, 8.0, 4).unwrap();
        let g = StrategySpec::Guess { mode: GuessMode::Bounded { low: 8.0, high: 8.0 }, inner: Box::new(StrategySpec::KPhase) };
        let mut a = g.instantiate(&info, 3).unwrap();
        let mut b = k_phase_monotone(&info).unwrap();
        assert_eq!(uniform_prices(&mut a, 4), uniform_prices(&mut b, 4));
        assert_eq!(a.metadata().guessed, Some(8.0));
    }
}
