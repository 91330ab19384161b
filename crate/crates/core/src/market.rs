//! Sequential sales, expected revenue and uniform-price sweeps.

use crate::demand::{demand, uniform_price_events, Purchase, TieBreakPolicy};
use crate::error::{Error, Result};
use crate::instances::Instance;
use crate::num::{approx_eq, definitely_greater, fmt_g17};
use crate::pricing::PriceAssignment;
use crate::random::{derive_seed, enumerate_outcomes_limited, Chooser, SeededChooser};
use crate::strategies::{PublicInfo, StrategyInstance, StrategyMeta, StrategySpec};
use crate::valuation::{Bundle, Valuation};
use itertools::Itertools;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

/// Default cap on exactly enumerated branches.
pub const DEFAULT_BUDGET: u64 = 10_000_000;
/// Largest `m` for exhaustive order search.
pub const MAX_ADVERSARIAL_BUYERS: usize = 8;
/// Largest number of units for sweeps over explicit tables not given by size.
pub const MAX_EXPLICIT_SWEEP_UNITS: u128 = 16;

/// One arrival.
#[derive(Clone, Debug, PartialEq)]
pub struct Round {
    pub buyer_id: String,
    pub prices: PriceAssignment,
    pub purchase: Purchase,
}

/// Record of one sequential sale.
#[derive(Clone, Debug, PartialEq)]
pub struct Transcript {
    pub rounds: Vec<Round>,
    pub total_revenue: f64,
    pub tie: TieBreakPolicy,
    pub seed: Option<u64>,
    pub strategy: StrategyMeta,
}

impl Transcript {
    /// Units sold per group.
    pub fn units_sold(&self, n_groups: usize) -> Bundle {
        let mut b = Bundle::empty(n_groups);
        for r in &self.rounds {
            b.add(&r.purchase.bundle);
        }
        b
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("round,buyer_id,price_mode,price_or_min_price,units_bought,payment,utility,cumulative_revenue\n");
        let mut total = 0.0;
        for (t, r) in self.rounds.iter().enumerate() {
            total += r.purchase.payment;
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                t + 1,
                r.buyer_id,
                r.prices.mode_name(),
                fmt_g17(r.prices.min_price()),
                r.purchase.units(),
                // adding 0.0 maps -0 to 0
                fmt_g17(r.purchase.payment + 0.0),
                fmt_g17(r.purchase.utility + 0.0),
                fmt_g17(total)
            );
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

fn check_order(inst: &Instance, order: &[usize]) -> Result<()> {
    let m = inst.m();
    let mut seen = vec![false; m];
    if order.len() != m || !order.iter().all(|&i| i < m && !std::mem::replace(&mut seen[i], true)) {
        return Err(Error::Domain(format!("order {order:?} is not a permutation of {m} buyers")));
    }
    Ok(())
}

/// Run the buyers of `inst` through `strat` in `order` (buyer indices).
pub fn simulate(inst: &Instance, strat: &mut StrategyInstance, order: &[usize], tie: TieBreakPolicy) -> Result<Transcript> {
    check_order(inst, order)?;
    let mut unsold = inst.full_bundle();
    let mut rounds = Vec::with_capacity(order.len());
    let mut total = 0.0;
    for (t, &b) in order.iter().enumerate() {
        let prices = strat.next_prices(t, &unsold)?;
        let purchase = sell(inst, b, &mut unsold, &prices, tie)?;
        total += purchase.payment;
        rounds.push(Round { buyer_id: inst.buyers()[b].id.clone(), prices, purchase });
    }
    Ok(Transcript { rounds, total_revenue: total, tie, seed: None, strategy: strat.metadata().clone() })
}

fn sell(inst: &Instance, b: usize, unsold: &mut Bundle, prices: &PriceAssignment, tie: TieBreakPolicy) -> Result<Purchase> {
    prices.validate(inst.n_groups())?;
    let purchase = demand(&inst.buyers()[b].valuation, unsold, prices, tie)?;
    unsold.subtract(&purchase.bundle)?;
    Ok(purchase)
}

/// Total revenue along `order`, drawing strategy choices from `ch`.
fn revenue_with(inst: &Instance, strat: &mut StrategyInstance, order: &[usize], tie: TieBreakPolicy, ch: &mut dyn Chooser) -> Result<f64> {
    let mut unsold = inst.full_bundle();
    let mut total = 0.0;
    for (t, &b) in order.iter().enumerate() {
        let prices = strat.next_prices_with(t, &unsold, ch)?;
        total += sell(inst, b, &mut unsold, &prices, tie)?.payment;
    }
    Ok(total)
}

/// How buyers arrive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrderModel {
    /// buyer indices
    Fixed(Vec<usize>),
    UniformRandom,
    AdversarialSearch,
}

impl OrderModel {
    /// `fixed:<ids or indices, comma separated>`, `random` or `adversarial`.
    pub fn parse(s: &str, inst: &Instance) -> Result<Self> {
        match s {
            "random" => Ok(Self::UniformRandom),
            "adversarial" => Ok(Self::AdversarialSearch),
            "identity" | "fixed" => Ok(Self::Fixed((0..inst.m()).collect())),
            _ => {
                let list = s.strip_prefix("fixed:").ok_or_else(|| Error::Parse(format!("unknown order {s:?}")))?;
                let order = list
                    .split(',')
                    .map(|t| {
                        let t = t.trim();
                        inst.buyer_index(t)
                            .or_else(|| t.parse().ok())
                            .ok_or_else(|| Error::Parse(format!("unknown buyer {t:?} in order")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                check_order(inst, &order)?;
                Ok(Self::Fixed(order))
            }
        }
    }
}

/// How expectations are computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalMode {
    Exact,
    MonteCarlo { trials: u64 },
}

impl FromStr for EvalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "exact" {
            return Ok(Self::Exact);
        }
        let trials = s
            .strip_prefix("mc:")
            .and_then(|t| t.parse::<u64>().ok())
            .filter(|&t| t >= 2)
            .ok_or_else(|| Error::Parse(format!("mode must be exact or mc:<trials >= 2>, got {s:?}")))?;
        Ok(Self::MonteCarlo { trials })
    }
}

/// Settings shared by all evaluations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalConfig {
    pub mode: EvalMode,
    pub seed: u64,
    pub tie: TieBreakPolicy,
    pub budget: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { mode: EvalMode::Exact, seed: 0, tie: TieBreakPolicy::STRICT, budget: DEFAULT_BUDGET }
    }
}

impl EvalConfig {
    pub fn exact() -> Self {
        Self::default()
    }

    pub fn monte_carlo(trials: u64, seed: u64) -> Self {
        Self { mode: EvalMode::MonteCarlo { trials }, seed, ..Self::default() }
    }

    pub fn with_tie(mut self, tie: TieBreakPolicy) -> Self {
        self.tie = tie;
        self
    }
}

/// An expected revenue.
#[derive(Clone, Debug, PartialEq)]
pub struct RevenueEstimate {
    pub mean: f64,
    pub mode: EvalMode,
    /// sampling error of the mean; zero in exact mode
    pub std_error: f64,
    /// mean revenue per arrival order that was evaluated
    pub per_order: Vec<(Vec<usize>, f64)>,
}

impl Serialize for RevenueEstimate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(None)?;
        map.serialize_entry("mean", &self.mean)?;
        match self.mode {
            EvalMode::Exact => map.serialize_entry("mode", "exact")?,
            EvalMode::MonteCarlo { trials } => {
                map.serialize_entry("mode", "monte_carlo")?;
                map.serialize_entry("trials", &trials)?;
                map.serialize_entry("std_error", &self.std_error)?;
            }
        }
        map.end()
    }
}

/// Expected revenue of `spec` built from `info` on `inst`.
pub fn expected_revenue(inst: &Instance, spec: &StrategySpec, info: &PublicInfo, order: &OrderModel, cfg: &EvalConfig) -> Result<RevenueEstimate> {
    match order {
        OrderModel::Fixed(o) => {
            check_order(inst, o)?;
            evaluate(inst, spec, info, std::slice::from_ref(o), cfg)
        }
        OrderModel::UniformRandom => match cfg.mode {
            EvalMode::Exact => {
                let perms = all_orders(inst.m(), cfg.budget)?;
                evaluate(inst, spec, info, &perms, cfg)
            }
            EvalMode::MonteCarlo { trials } => monte_carlo(inst, spec, info, None, trials, cfg),
        },
        OrderModel::AdversarialSearch => Ok(adversarial_order(inst, spec, info, cfg)?.1),
    }
}

fn all_orders(m: usize, budget: u64) -> Result<Vec<Vec<usize>>> {
    let count = (1..=m as u64).try_fold(1u64, |a, b| a.checked_mul(b).filter(|&x| x <= budget));
    if count.is_none() {
        return Err(Error::BudgetExceeded { budget });
    }
    Ok((0..m).permutations(m).collect())
}

/// Uniform average over `orders`.
fn evaluate(inst: &Instance, spec: &StrategySpec, info: &PublicInfo, orders: &[Vec<usize>], cfg: &EvalConfig) -> Result<RevenueEstimate> {
    if let (EvalMode::MonteCarlo { trials }, [o]) = (cfg.mode, orders) {
        return monte_carlo(inst, spec, info, Some(o), trials, cfg);
    }
    let per_order = match cfg.mode {
        EvalMode::Exact => {
            let mut left = cfg.budget;
            let mut per = Vec::with_capacity(orders.len());
            for o in orders {
                let (mean, used) = exact_fixed(inst, spec, info, o, cfg.tie, left)?;
                left -= used;
                per.push((o.clone(), mean));
            }
            per
        }
        EvalMode::MonteCarlo { trials } => orders
            .iter()
            .map(|o| Ok((o.clone(), monte_carlo(inst, spec, info, Some(o), trials, cfg)?.mean)))
            .collect::<Result<_>>()?,
    };
    let mean = per_order.iter().map(|x| x.1).sum::<f64>() / per_order.len().max(1) as f64;
    Ok(RevenueEstimate { mean, mode: cfg.mode, std_error: 0.0, per_order })
}

/// Exact mean for one order and the number of branches used.
fn exact_fixed(inst: &Instance, spec: &StrategySpec, info: &PublicInfo, order: &[usize], tie: TieBreakPolicy, budget: u64) -> Result<(f64, u64)> {
    let outs = enumerate_outcomes_limited(budget, |ch| {
        let mut s = spec.instantiate_with(info, ch)?;
        revenue_with(inst, &mut s, order, tie, ch)
    })
    .map_err(|e| match e {
        Error::BudgetExceeded { .. } => Error::BudgetExceeded { budget },
        e => e,
    })?;
    Ok((outs.iter().map(|(p, r)| p * r).sum(), outs.len() as u64))
}

const MC_CHUNK: u64 = 1024;

fn pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var("PRICELAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        b = b.num_threads(n.max(1));
    }
    b.build().map_err(|e| Error::Config(e.to_string()))
}

/// Trial `i` uses seed `derive_seed(base, i)`; a random order is shuffled
/// from a second stream of that seed.
fn monte_carlo(inst: &Instance, spec: &StrategySpec, info: &PublicInfo, order: Option<&[usize]>, trials: u64, cfg: &EvalConfig) -> Result<RevenueEstimate> {
    if trials == 0 {
        return Err(Error::Config("monte carlo needs at least one trial".into()));
    }
    let trial = |i: u64| -> Result<f64> {
        let seed = derive_seed(cfg.seed, i);
        let mut s = spec.instantiate(info, seed)?;
        let owned;
        let o = match order {
            Some(o) => o,
            None => {
                let mut v: Vec<usize> = (0..inst.m()).collect();
                v.shuffle(SeededChooser::new(derive_seed(seed, 1)).rng()?);
                owned = v;
                &owned
            }
        };
        Ok(simulate(inst, &mut s, o, cfg.tie)?.total_revenue)
    };
    let chunks = trials.div_ceil(MC_CHUNK);
    // fixed chunks summed in order keep results independent of thread count
    let sums: Vec<(f64, f64)> = pool()?.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let (mut s, mut s2) = (0.0, 0.0);
                for i in c * MC_CHUNK..((c + 1) * MC_CHUNK).min(trials) {
                    let r = trial(i)?;
                    s += r;
                    s2 += r * r;
                }
                Ok((s, s2))
            })
            .collect::<Result<_>>()
    })?;
    let (s, s2) = sums.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = trials as f64;
    let mean = s / n;
    let var = if trials > 1 { ((s2 - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    let per_order = order.map(|o| vec![(o.to_vec(), mean)]).unwrap_or_default();
    Ok(RevenueEstimate { mean, mode: EvalMode::MonteCarlo { trials }, std_error: (var / n).sqrt(), per_order })
}

/// The arrival order minimizing expected revenue (first in lexicographic
/// order among ties), with its estimate.
pub fn adversarial_order(inst: &Instance, spec: &StrategySpec, info: &PublicInfo, cfg: &EvalConfig) -> Result<(Vec<usize>, RevenueEstimate)> {
    let m = inst.m();
    if m > MAX_ADVERSARIAL_BUYERS {
        return Err(Error::Capacity(format!("adversarial order search needs m <= {MAX_ADVERSARIAL_BUYERS}, got {m}")));
    }
    let mut best: Option<(Vec<usize>, RevenueEstimate)> = None;
    let mut per_order = Vec::new();
    for o in (0..m).permutations(m) {
        let est = evaluate(inst, spec, info, std::slice::from_ref(&o), cfg)?;
        per_order.push((o.clone(), est.mean));
        if best.as_ref().is_none_or(|b| definitely_greater(b.1.mean, est.mean)) {
            best = Some((o, est));
        }
    }
    let (o, mut est) = best.expect("at least one order");
    est.per_order = per_order;
    Ok((o, est))
}

/// One step of a uniform-price sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub price: f64,
    /// revenue when exactly this price is posted
    pub revenue_at: f64,
    /// supremum of the revenue over the prices between the next point and this one
    pub revenue_below: f64,
}

/// Static uniform revenue as a function of the price, for one order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    /// best revenue over all prices that is actually attained
    pub max_revenue: f64,
    pub argmax_price: f64,
    /// supremum over all prices; larger than `max_revenue` only when the
    /// best prices form an open interval
    pub supremum: f64,
    pub curve: Vec<SweepPoint>,
}

/// Exact sweep over every static uniform price for buyers arriving in `order`.
///
/// Between consecutive events the purchases of all buyers are fixed, so the
/// revenue there is linear in the price.
pub fn sweep_uniform_prices(inst: &Instance, order: &[usize], tie: TieBreakPolicy) -> Result<SweepResult> {
    check_order(inst, order)?;
    let general_explicit = inst.buyers().iter().any(|b| matches!(&*b.valuation, Valuation::Explicit(t) if t.by_size().is_none()));
    if general_explicit && inst.total_units() > MAX_EXPLICIT_SWEEP_UNITS {
        return Err(Error::Capacity(format!(
            "sweeps over explicit valuations support at most {MAX_EXPLICIT_SWEEP_UNITS} units, instance has {}",
            inst.total_units()
        )));
    }
    let full = inst.full_bundle();
    let mut cur = 0.0f64;
    for b in inst.buyers() {
        if let Some(&p) = uniform_price_events(&b.valuation, &full)?.first() {
            cur = cur.max(p);
        }
    }
    let mut curve = Vec::new();
    if cur == 0.0 {
        return Ok(SweepResult { max_revenue: 0.0, argmax_price: 0.0, supremum: 0.0, curve });
    }
    while cur > 0.0 {
        let revenue_at = uniform_revenue(inst, order, cur, tie)?;
        // realize the purchases just below `cur`
        let mut unsold = full.clone();
        let mut lo = 0.0f64;
        let mut units = 0u128;
        for &b in order {
            let v = &inst.buyers()[b].valuation;
            let lo_b = uniform_price_events(v, &unsold)?.into_iter().find(|&p| p < cur && !approx_eq(p, cur)).unwrap_or(0.0);
            lo = lo.max(lo_b);
            let pur = demand(v, &unsold, &PriceAssignment::Uniform(0.5 * (lo_b + cur)), tie)?;
            units += pur.units();
            unsold.subtract(&pur.bundle)?;
        }
        curve.push(SweepPoint { price: cur, revenue_at, revenue_below: cur * units as f64 });
        cur = lo;
    }
    curve.push(SweepPoint { price: 0.0, revenue_at: 0.0, revenue_below: 0.0 });
    let mut best = curve[0];
    for pt in &curve {
        if definitely_greater(pt.revenue_at, best.revenue_at) {
            best = *pt;
        }
    }
    let supremum = curve.iter().map(|p| p.revenue_at.max(p.revenue_below)).fold(0.0, f64::max);
    Ok(SweepResult { max_revenue: best.revenue_at, argmax_price: best.price, supremum, curve })
}

/// Revenue of the static uniform price `p` for one order.
pub fn uniform_revenue(inst: &Instance, order: &[usize], p: f64, tie: TieBreakPolicy) -> Result<f64> {
    let mut unsold = inst.full_bundle();
    let prices = PriceAssignment::Uniform(p);
    let mut total = 0.0;
    for &b in order {
        total += sell(inst, b, &mut unsold, &prices, tie)?.payment;
    }
    Ok(total)
}
