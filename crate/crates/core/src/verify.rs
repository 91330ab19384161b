//! Named verification suites with machine-readable reports.

use crate::demand::{breakpoints, demand, demand_bruteforce, h_value, is_supported, utility_from_breakpoints, TieBreakPolicy};
use crate::error::{Error, Result};
use crate::instances::{
    gen_hard_dynamic, gen_random_xos_with, hard_dynamic_f, validate_hard_static, HardDynamicParams, HardStaticParams,
    RandomXosParams,
};
use crate::num::close;
use crate::pricing::{GroupPrice, PriceAssignment};
use crate::random::derive_seed;
use crate::valuation::{Bundle, Component, ExplicitTable, Valuation};
use crate::welfare::{opt_analytic, opt_xos_restricted};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

/// Suites accepted by `run_suite`.
pub const SUITES: &[&str] = &[
    "lemma-oracle",
    "lemma-monotone-demand",
    "lemma-supported-set",
    "lemma-breakpoints",
    "lemma-ladder",
    "group-compression",
    "hard-static-chain",
    "hard-dynamic-rounds",
];

/// Relative tolerance of the numeric checks.
pub const CHECK_TOL: f64 = 1e-9;

const MAX_LISTED_FAILURES: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    /// random cases per lemma suite
    pub seeds: u64,
    pub seed: u64,
    pub k: Option<u32>,
    pub f: Option<u64>,
    pub y: Option<u64>,
    pub m: Option<usize>,
    pub c_scale: Option<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seeds: 500, seed: 0, k: None, f: None, y: None, m: None, c_scale: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: String,
    pub passed: bool,
    pub cases: u64,
    pub failure_count: u64,
    /// the first few failures
    pub failures: Vec<String>,
    pub details: serde_json::Value,
}

#[derive(Default)]
struct Tally {
    cases: u64,
    failure_count: u64,
    failures: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failure_count += 1;
            if self.failures.len() < MAX_LISTED_FAILURES {
                self.failures.push(msg());
            }
        }
    }

    fn report(self, suite: &str, details: serde_json::Value) -> VerifyReport {
        VerifyReport {
            suite: suite.into(),
            passed: self.failure_count == 0,
            cases: self.cases,
            failure_count: self.failure_count,
            failures: self.failures,
            details,
        }
    }
}

pub fn run_suite(name: &str, opts: &VerifyOptions) -> Result<VerifyReport> {
    match name {
        "lemma-oracle" => lemma_oracle(opts),
        "lemma-monotone-demand" => lemma_monotone_demand(opts),
        "lemma-supported-set" => lemma_supported_set(opts),
        "lemma-breakpoints" => lemma_breakpoints(opts),
        "lemma-ladder" => lemma_ladder(opts),
        "group-compression" => group_compression(opts),
        "hard-static-chain" => hard_static_chain(opts),
        "hard-dynamic-rounds" => hard_dynamic_rounds(opts),
        _ => Err(Error::Config(format!("unknown suite {name:?}; known suites: {}", SUITES.join(", ")))),
    }
}

/// A valuation and the units available to it.
#[derive(Clone, Debug, PartialEq)]
pub struct Case {
    pub valuation: Valuation,
    pub available: Bundle,
}

fn random_value(rng: &mut ChaCha8Rng, coarse: bool) -> f64 {
    if coarse {
        rng.random_range(0..=8) as f64 * 0.5
    } else {
        rng.random_range(0.0..4.0)
    }
}

/// A random additive, XOS or explicit valuation with at most `max_units`
/// available units. Half of the cases draw values from a coarse grid so
/// that ties occur.
pub fn random_case(rng: &mut ChaCha8Rng, max_units: u128) -> Case {
    let coarse = rng.random_bool(0.5);
    let kind = rng.random_range(0..3);
    if kind == 2 {
        let n = rng.random_range(1..=max_units.clamp(1, 10) as usize);
        let items: Vec<usize> = (0..n).collect();
        let table = match rng.random_range(0..3) {
            0 => {
                let l = rng.random_range(1..=3);
                let comps: Vec<Vec<f64>> = (0..l).map(|_| (0..n).map(|_| random_value(rng, coarse)).collect()).collect();
                let t = (0..1usize << n)
                    .map(|mask| {
                        comps.iter().map(|c| (0..n).filter(|j| mask >> j & 1 == 1).map(|j| c[j]).sum::<f64>()).fold(0.0, f64::max)
                    })
                    .collect();
                ExplicitTable::from_table(items, t)
            }
            1 => {
                let mut inc: Vec<f64> = (0..n).map(|_| random_value(rng, coarse)).collect();
                inc.sort_by(|a, b| b.total_cmp(a));
                let mut w = vec![0.0];
                for d in inc {
                    w.push(w.last().unwrap() + d);
                }
                ExplicitTable::from_cardinality(items, w)
            }
            _ => {
                let c = random_value(rng, coarse).max(0.5);
                ExplicitTable::from_cardinality(items, (0..=n).map(|s| c * s.div_ceil(2) as f64).collect())
            }
        }
        .expect("monotone subadditive by construction");
        let available = Bundle::from_counts((0..n).map(|_| rng.random_range(0..=1)).collect());
        return Case { valuation: Valuation::Explicit(table), available };
    }
    let n_groups = rng.random_range(1..=6usize);
    let mut left = max_units;
    let mut counts = Vec::with_capacity(n_groups);
    for _ in 0..n_groups {
        let q = rng.random_range(0..=3u128).min(left);
        left -= q;
        counts.push(q);
    }
    let l = if kind == 0 { 1 } else { rng.random_range(2..=4) };
    let comps: Vec<Component> = (0..l)
        .map(|_| {
            let mut entries = Vec::new();
            for g in 0..n_groups {
                if rng.random_bool(0.8) {
                    entries.push((g, random_value(rng, coarse)));
                }
            }
            Component::new(entries).expect("non-negative values")
        })
        .collect();
    let valuation = if kind == 0 {
        Valuation::Additive(comps.into_iter().next().expect("one component"))
    } else {
        Valuation::xos(comps).expect("valid components")
    };
    Case { valuation, available: Bundle::from_counts(counts) }
}

/// A random uniform or per-group price vector for `available`.
pub fn random_prices(rng: &mut ChaCha8Rng, available: &Bundle) -> PriceAssignment {
    let coarse = rng.random_bool(0.5);
    if rng.random_bool(0.4) {
        return PriceAssignment::Uniform(random_value(rng, coarse));
    }
    PriceAssignment::per_group(
        available
            .counts()
            .iter()
            .map(|&q| match rng.random_range(0..6) {
                0 => GroupPrice::Unavailable,
                1 if q >= 2 => {
                    let split = rng.random_range(1..q);
                    let mut a = random_value(rng, coarse);
                    let mut b = if rng.random_bool(0.3) { f64::INFINITY } else { random_value(rng, coarse) };
                    if b < a {
                        std::mem::swap(&mut a, &mut b);
                    }
                    GroupPrice::Tiered(vec![(a, split), (b, q - split)])
                }
                _ => GroupPrice::Price(random_value(rng, coarse)),
            })
            .collect(),
    )
}

fn case_rng(opts: &VerifyOptions, i: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, i))
}

/// Every sub-bundle of `b`.
pub fn sub_bundles(b: &Bundle) -> Vec<Bundle> {
    let mut out = vec![Bundle::empty(b.n_groups())];
    for (g, q) in b.iter() {
        out = out
            .into_iter()
            .flat_map(|s| {
                (0..=q).map(move |x| {
                    let mut t = s.clone();
                    t.set(g, x);
                    t
                })
            })
            .collect();
    }
    out
}

fn lemma_oracle(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut t = Tally::default();
    for i in 0..opts.seeds {
        let mut rng = case_rng(opts, i);
        let case = random_case(&mut rng, 14);
        let prices = random_prices(&mut rng, &case.available);
        let oracle = demand_bruteforce(&case.valuation, &case.available, &prices)?;
        for tie in [TieBreakPolicy::STRICT, TieBreakPolicy::INCLUSIVE] {
            let d = demand(&case.valuation, &case.available, &prices, tie)?;
            let v = case.valuation.value(&d.bundle)?;
            let ok = close(d.utility, oracle.utility, CHECK_TOL)
                && close(v - d.payment, d.utility, CHECK_TOL)
                && d.bundle.is_within(&case.available);
            t.check(ok, || format!("case {i}: demand utility {} vs brute force {}", d.utility, oracle.utility));
        }
    }
    Ok(t.report("lemma-oracle", json!({ "max_units": 14 })))
}

fn lemma_monotone_demand(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut t = Tally::default();
    for i in 0..opts.seeds {
        let mut rng = case_rng(opts, i);
        let case = random_case(&mut rng, 14);
        let coarse = rng.random_bool(0.5);
        let (a, b) = (random_value(&mut rng, coarse), random_value(&mut rng, coarse));
        let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
        for tie in [TieBreakPolicy::STRICT, TieBreakPolicy::INCLUSIVE] {
            let dh = demand(&case.valuation, &case.available, &PriceAssignment::Uniform(hi), tie)?.units();
            let dl = demand(&case.valuation, &case.available, &PriceAssignment::Uniform(lo), tie)?.units();
            t.check(dh <= dl, || format!("case {i}: |D({hi})| = {dh} > |D({lo})| = {dl}"));
        }
    }
    Ok(t.report("lemma-monotone-demand", json!({})))
}

fn lemma_supported_set(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut t = Tally::default();
    let mut supported = 0u64;
    for i in 0..opts.seeds {
        let mut rng = case_rng(opts, i);
        let case = random_case(&mut rng, 12);
        // prices at or below the lowest per-unit value make support likely
        let p = rng.random_range(0.0..2.5);
        for tie in [TieBreakPolicy::STRICT, TieBreakPolicy::INCLUSIVE] {
            if !is_supported(&case.valuation, &case.available, p, tie)? {
                continue;
            }
            supported += 1;
            for sub in sub_bundles(&case.available) {
                let v = case.valuation.value(&sub)?;
                let need = p * sub.total_units() as f64;
                t.check(v >= need || close(v, need, CHECK_TOL), || format!("case {i}: v(b') = {v} < p|b'| = {need}"));
            }
        }
    }
    Ok(t.report("lemma-supported-set", json!({ "supported_cases": supported })))
}

fn lemma_breakpoints(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut t = Tally::default();
    for i in 0..opts.seeds {
        let mut rng = case_rng(opts, i);
        let case = random_case(&mut rng, 14);
        if case.available.is_empty() {
            continue;
        }
        for tie in [TieBreakPolicy::STRICT, TieBreakPolicy::INCLUSIVE] {
            let bps = breakpoints(&case.valuation, &case.available, tie)?;
            let ok = bps.windows(2).all(|w| w[0].price > w[1].price && w[0].size < w[1].size);
            t.check(ok, || format!("case {i}: breakpoints not strictly ordered: {bps:?}"));
            let mut prices: Vec<f64> = (0..100).map(|_| rng.random_range(0.0..4.5)).collect();
            prices.extend(bps.iter().map(|b| b.price));
            for p in prices {
                let u = demand(&case.valuation, &case.available, &PriceAssignment::Uniform(p), tie)?.utility;
                let r = utility_from_breakpoints(&bps, p);
                t.check(close(u, r, CHECK_TOL), || format!("case {i}: u({p}) = {u}, rebuilt {r}"));
            }
        }
    }
    Ok(t.report("lemma-breakpoints", json!({ "prices_per_case": 100 })))
}

fn lemma_ladder(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut t = Tally::default();
    for i in 0..opts.seeds {
        let mut rng = case_rng(opts, i);
        let case = random_case(&mut rng, 14);
        let h = h_value(&case.valuation, &case.available)?;
        let h_up = h * rng.random_range(1.0..3.0) + rng.random_range(0.0..1.0);
        let k = rng.random_range(1..=10);
        for tie in [TieBreakPolicy::STRICT, TieBreakPolicy::INCLUSIVE] {
            let mut sum = 0.0;
            for step in 1..=k {
                let p = h_up * 2f64.powi(-step);
                sum += p * demand(&case.valuation, &case.available, &PriceAssignment::Uniform(p), tie)?.units() as f64;
            }
            let bound = h - case.available.total_units() as f64 * h_up * 2f64.powi(-k);
            t.check(sum >= bound - CHECK_TOL * h.max(1.0), || format!("case {i}: ladder sum {sum} < {bound}"));
        }
    }
    Ok(t.report("lemma-ladder", json!({ "gamma": 2 })))
}

fn group_compression(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut t = Tally::default();
    for i in 0..opts.seeds {
        let mut rng = case_rng(opts, i);
        let params = RandomXosParams {
            n: rng.random_range(1..=4),
            m: 1,
            l: rng.random_range(1..=3),
            units_per_group: rng.random_range(1..=3),
            seed: derive_seed(opts.seed, i),
            ..RandomXosParams::default()
        };
        let inst = gen_random_xos_with(&params)?;
        let full = inst.full_bundle();
        let (expanded, owner) = inst.unit_expanded(14)?;
        let coarse = rng.random_bool(0.5);
        let group_prices: Vec<GroupPrice> = (0..inst.n_groups())
            .map(|_| if rng.random_bool(0.15) { GroupPrice::Unavailable } else { GroupPrice::Price(random_value(&mut rng, coarse)) })
            .collect();
        let unit_prices: Vec<GroupPrice> = owner.iter().map(|&g| group_prices[g].clone()).collect();
        for tie in [TieBreakPolicy::STRICT, TieBreakPolicy::INCLUSIVE] {
            let a = demand(&inst.buyers()[0].valuation, &full, &PriceAssignment::per_group(group_prices.clone()), tie)?;
            let b = demand(&expanded.buyers()[0].valuation, &expanded.full_bundle(), &PriceAssignment::per_group(unit_prices.clone()), tie)?;
            let mut folded = Bundle::empty(inst.n_groups());
            for (u, &g) in owner.iter().enumerate() {
                folded.set(g, folded.get(g) + b.bundle.get(u));
            }
            let ok = close(a.utility, b.utility, CHECK_TOL) && folded == a.bundle;
            t.check(ok, || format!("case {i}: grouped {:?} vs expanded {:?}", a.bundle, folded));
        }
    }
    Ok(t.report("group-compression", json!({ "max_units": 12 })))
}

fn hard_static_chain(opts: &VerifyOptions) -> Result<VerifyReport> {
    let k = opts.k.ok_or_else(|| Error::Config("hard-static-chain needs --k".into()))?;
    let mut p = HardStaticParams::two_buyer(k);
    if let Some(c) = opts.c_scale {
        p.c_scale = c;
    }
    let report = validate_hard_static(&p)?;
    let mut t = Tally::default();
    for row in &report.rows {
        t.check(row.holds, || {
            format!("i = {}: c_(i+1) = {:e}, a_i = {:e}, b_i = {:e}, c_i = {:e}", row.i, row.c_next, row.a, row.b, row.c)
        });
    }
    Ok(t.report("hard-static-chain", serde_json::to_value(&report)?))
}

/// Bracket `j` of the hard dynamic instance is `(f(j+1), f(j)]`.
pub fn bracket_prices(p: &HardDynamicParams, j: u32) -> Vec<f64> {
    let (hi, lo) = (hard_dynamic_f(p, j), hard_dynamic_f(p, j + 1));
    vec![hi, 0.5 * (hi + lo), lo * (1.0 + 1e-9)]
}

/// Round claims on the hard dynamic instance, by direct simulation.
pub fn hard_dynamic_rounds_report(p: &HardDynamicParams) -> Result<VerifyReport> {
    let inst = gen_hard_dynamic(p)?;
    let (f, y, m) = (p.f as f64, p.y as f64, p.m as f64);
    let mut t = Tally::default();
    let full = inst.full_bundle();
    let tie = TieBreakPolicy::STRICT;
    let buy = |b: usize, avail: &Bundle, price: f64| demand(&inst.buyers()[b].valuation, avail, &PriceAssignment::Uniform(price), tie);
    let mut worst_a: f64 = 0.0;
    let mut worst_b: f64 = 0.0;
    // (b) failures split by whether the first price was the top endpoint f(j)
    let mut b_fail_top = 0u64;
    let mut b_fail_interior = 0u64;
    for j in 0..=p.k {
        let cap_a = 2.0 * (1.0 + m / y) * (j + 1) as f64 * f;
        for &price in &bracket_prices(p, j) {
            for first in 0..inst.m() {
                // (a) a single round on a fresh instance
                let pur = buy(first, &full, price)?;
                worst_a = worst_a.max(pur.payment / cap_a);
                t.check(pur.payment <= cap_a * (1.0 + CHECK_TOL), || {
                    format!("(a) j={j} p={price} buyer {first}: revenue {} > {cap_a}", pur.payment)
                });
                // (b) any later buyer facing a price of the same bracket
                let at_top = price == hard_dynamic_f(p, j);
                let mut left = full.clone();
                left.subtract(&pur.bundle)?;
                for &again in &bracket_prices(p, j) {
                    for later in (0..inst.m()).filter(|&l| l != first) {
                        let pay = buy(later, &left, again)?.payment;
                        worst_b = worst_b.max(pay / (2.0 * f));
                        if pay > 2.0 * f * (1.0 + CHECK_TOL) {
                            *if at_top { &mut b_fail_top } else { &mut b_fail_interior } += 1;
                        }
                        t.check(pay <= 2.0 * f * (1.0 + CHECK_TOL), || {
                            format!("(b) j={j} p={price} then {again}: buyer {later} pays {pay} > {}", 2.0 * f)
                        });
                    }
                }
            }
        }
    }
    // (c) above f(0) nothing sells, in any round
    let f0 = hard_dynamic_f(p, 0);
    for price in [f0 * (1.0 + 1e-9), 2.0 * f0] {
        let mut left = full.clone();
        for b in 0..inst.m() {
            let pur = buy(b, &left, price)?;
            left.subtract(&pur.bundle)?;
            t.check(pur.units() == 0, || format!("(c) p={price}: buyer {b} bought {} units", pur.units()));
        }
    }
    // (d) the reference welfare
    let want = m * f * ((p.k + 1) * (p.k + 2)) as f64 / 2.0;
    let known = inst.known_opt().unwrap_or(f64::NAN);
    let analytic = opt_analytic(&inst)?;
    let shared_only: Vec<Vec<usize>> = vec![vec![p.k as usize + 1]; inst.m()];
    let restricted = opt_xos_restricted(&inst, Some(&shared_only))?;
    t.check(close(known, want, CHECK_TOL), || format!("(d) known_opt {known} != {want}"));
    t.check(close(analytic.allocation_value(&inst)?, want, CHECK_TOL), || "(d) analytic allocation value differs".into());
    t.check(restricted.opt >= want * (1.0 - CHECK_TOL), || format!("(d) restricted welfare {} < {want}", restricted.opt));
    Ok(t.report(
        "hard-dynamic-rounds",
        json!({
            "params": p,
            "known_opt": known,
            "restricted_opt": restricted.opt,
            "worst_fresh_round_ratio": worst_a,
            "worst_repeat_round_ratio": worst_b,
            "repeat_failures_first_price_at_top": b_fail_top,
            "repeat_failures_first_price_inside": b_fail_interior,
        }),
    ))
}

fn hard_dynamic_rounds(opts: &VerifyOptions) -> Result<VerifyReport> {
    let need = |name: &str| Error::Config(format!("hard-dynamic-rounds needs --{name}"));
    let p = HardDynamicParams {
        k: opts.k.ok_or_else(|| need("k"))?,
        f: opts.f.ok_or_else(|| need("F"))?,
        y: opts.y.ok_or_else(|| need("Y"))?,
        m: opts.m.ok_or_else(|| need("m"))?,
    };
    hard_dynamic_rounds_report(&p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma_suites_pass_small() {
        let opts = VerifyOptions { seeds: 60, ..VerifyOptions::default() };
        for s in ["lemma-oracle", "lemma-monotone-demand", "lemma-supported-set", "lemma-breakpoints", "lemma-ladder", "group-compression"] {
            let r = run_suite(s, &opts).unwrap();
            assert!(r.passed, "{s}: {:?}", r.failures);
            assert!(r.cases > 0);
        }
    }

    #[test]
    fn sub_bundle_count() {
        assert_eq!(sub_bundles(&Bundle::from_counts(vec![2, 0, 1])).len(), 6);
    }
}
