//! The utility-maximizing demand oracle and uniform-price demand curves.

use crate::error::{domain, Error, Result};
use crate::num::{approx_eq, definitely_greater};
use crate::pricing::PriceAssignment;
use crate::valuation::{check_groups, Bundle, Component, Components, ExplicitTable, Valuation};
use serde::{Deserialize, Serialize};

/// Which zero-margin units a buyer takes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginRule {
    /// Buy only strictly profitable units.
    #[default]
    Strict,
    /// Also buy units whose margin is exactly zero.
    Inclusive,
}

/// How ties between utility-maximizing XOS components are broken.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentRule {
    #[default]
    LowestIndex,
}

/// Buyer behaviour among several utility maximizers.
///
/// For explicit valuations the strict rule picks a smallest maximizer and the
/// inclusive rule a largest one, then the lowest subset mask.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TieBreakPolicy {
    pub margin_rule: MarginRule,
    pub component_rule: ComponentRule,
}

impl TieBreakPolicy {
    pub const STRICT: Self = Self { margin_rule: MarginRule::Strict, component_rule: ComponentRule::LowestIndex };
    pub const INCLUSIVE: Self = Self { margin_rule: MarginRule::Inclusive, component_rule: ComponentRule::LowestIndex };

    pub fn is_inclusive(self) -> bool {
        self.margin_rule == MarginRule::Inclusive
    }

    fn buys(self, value: f64, price: f64) -> bool {
        match self.margin_rule {
            MarginRule::Strict => definitely_greater(value, price),
            MarginRule::Inclusive => value >= price || approx_eq(value, price),
        }
    }
}

/// What one buyer takes at given prices.
#[derive(Clone, Debug, PartialEq)]
pub struct Purchase {
    pub bundle: Bundle,
    pub payment: f64,
    pub utility: f64,
    /// Winning additive component for additive and XOS buyers.
    pub chosen_component: Option<usize>,
}

impl Purchase {
    pub fn units(&self) -> u128 {
        self.bundle.total_units()
    }
}

/// A utility-maximizing sub-bundle of `available` at `prices`.
pub fn demand(v: &Valuation, available: &Bundle, prices: &PriceAssignment, tie: TieBreakPolicy) -> Result<Purchase> {
    let n = available.n_groups();
    prices.validate(n)?;
    check_groups(v.max_group(), available)?;
    let mut bundle = Bundle::empty(n);
    let (utility, chosen_component) = match v {
        Valuation::Additive(c) => {
            let u = margin(c, available, prices, tie);
            take(c, available, prices, tie, &mut bundle);
            (u, Some(0))
        }
        Valuation::Xos(t) => {
            let (u, idx) = select(t, available, prices, tie);
            let c = t.component(idx).expect("selected index exists");
            take(&c, available, prices, tie, &mut bundle);
            (u, Some(idx))
        }
        Valuation::Explicit(t) => (explicit_demand(t, available, prices, tie, &mut bundle)?, None),
    };
    if tie.is_inclusive() {
        // free units of worthless groups
        for g in 0..n {
            let mut free = 0;
            prices.for_each_tier(g, available.get(g), |p, c| {
                if p == 0.0 {
                    free += c;
                    true
                } else {
                    false
                }
            });
            if free > bundle.get(g) {
                bundle.set(g, free);
            }
        }
    }
    let payment = payment_for(&bundle, available, prices);
    Ok(Purchase { bundle, payment, utility, chosen_component })
}

pub(crate) fn payment_for(bundle: &Bundle, available: &Bundle, prices: &PriceAssignment) -> f64 {
    bundle
        .iter()
        .map(|(g, q)| prices.cheapest_cost(g, available.get(g), q))
        .sum()
}

fn margin(c: &Component, avail: &Bundle, prices: &PriceAssignment, tie: TieBreakPolicy) -> f64 {
    let mut u = 0.0;
    for &(g, a) in c.entries() {
        prices.for_each_tier(g, avail.get(g), |p, cnt| {
            if tie.buys(a, p) {
                u += (a - p) * cnt as f64;
                true
            } else {
                false
            }
        });
    }
    u
}

fn take(c: &Component, avail: &Bundle, prices: &PriceAssignment, tie: TieBreakPolicy, out: &mut Bundle) {
    for &(g, a) in c.entries() {
        let mut q = 0;
        prices.for_each_tier(g, avail.get(g), |p, cnt| {
            if tie.buys(a, p) {
                q += cnt;
                true
            } else {
                false
            }
        });
        if q > 0 {
            out.set(g, q);
        }
    }
}

/// Best component: (utility, global index), lowest index on ties.
fn select(t: &Components, avail: &Bundle, prices: &PriceAssignment, tie: TieBreakPolicy) -> (f64, usize) {
    match t {
        Components::List(cs) => {
            let mut best = (f64::NEG_INFINITY, 0);
            for (i, c) in cs.iter().enumerate() {
                let u = margin(c, avail, prices, tie);
                if i == 0 || definitely_greater(u, best.0) {
                    best = (u, i);
                }
            }
            best
        }
        Components::Product(blocks) => {
            let mut u = 0.0;
            let mut digits = Vec::with_capacity(blocks.len());
            for b in blocks {
                let (bu, bi) = select(b, avail, prices, tie);
                u += bu;
                digits.push(bi);
            }
            (u, Components::product_index(blocks, &digits))
        }
        Components::Union(members) => {
            let mut best = (f64::NEG_INFINITY, 0);
            let mut offset = 0;
            for (i, m) in members.iter().enumerate() {
                let (u, idx) = select(m, avail, prices, tie);
                if i == 0 || definitely_greater(u, best.0) {
                    best = (u, offset + idx);
                }
                offset += m.count().expect("component count fits usize");
            }
            best
        }
    }
}

/// Prices of the single available unit of each explicit item, if for sale.
fn explicit_offers(t: &ExplicitTable, avail: &Bundle, prices: &PriceAssignment) -> Result<Vec<(usize, f64)>> {
    let mut offers = Vec::new();
    for (j, &g) in t.items().iter().enumerate() {
        let q = avail.get(g);
        if q > 1 {
            return Err(domain(format!(
                "explicit valuations need single-unit groups; group {g} has {q} units"
            )));
        }
        if q == 1 && prices.units_for_sale(g, 1) == 1 {
            offers.push((j, prices.cheapest_cost(g, 1, 1)));
        }
    }
    Ok(offers)
}

/// Is candidate `(u, size, mask)` preferred over `best`?
fn explicit_better(tie: TieBreakPolicy, u: f64, size: u32, mask: usize, best: (f64, u32, usize)) -> bool {
    if definitely_greater(u, best.0) {
        return true;
    }
    if !approx_eq(u, best.0) {
        return false;
    }
    let size_pref = if tie.is_inclusive() { size.cmp(&best.1) } else { best.1.cmp(&size) };
    match size_pref {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => mask < best.2,
    }
}

fn explicit_demand(
    t: &ExplicitTable,
    avail: &Bundle,
    prices: &PriceAssignment,
    tie: TieBreakPolicy,
    out: &mut Bundle,
) -> Result<f64> {
    let offers = explicit_offers(t, avail, prices)?;
    let k = offers.len();
    let mut best = (0.0, 0u32, 0usize);
    if let Some(by_size) = t.by_size() {
        // the best set of each size is the cheapest one; lowest indices among equal prices
        let mut sorted = offers.clone();
        sorted.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let mut mask = 0usize;
        let mut cost = 0.0;
        for (s, &(j, p)) in sorted.iter().enumerate() {
            mask |= 1 << j;
            cost += p;
            let size = s as u32 + 1;
            let u = by_size[size as usize] - cost;
            if explicit_better(tie, u, size, mask, best) {
                best = (u, size, mask);
            }
        }
    } else {
        let mut cost = vec![0.0; 1 << k];
        let mut full = vec![0usize; 1 << k];
        for m in 1usize..1 << k {
            let low = m.trailing_zeros() as usize;
            let rest = m & (m - 1);
            cost[m] = cost[rest] + offers[low].1;
            full[m] = full[rest] | (1 << offers[low].0);
            let u = t.value_mask(full[m]) - cost[m];
            if explicit_better(tie, u, m.count_ones(), full[m], best) {
                best = (u, m.count_ones(), full[m]);
            }
        }
    }
    for (j, &g) in t.items().iter().enumerate() {
        if best.2 & (1 << j) != 0 {
            out.set(g, 1);
        }
    }
    Ok(best.0)
}

/// Exhaustive search over every sub-multiset of at most 20 units.
pub fn demand_bruteforce(v: &Valuation, available: &Bundle, prices: &PriceAssignment) -> Result<Purchase> {
    const MAX_UNITS: u128 = 20;
    let n = available.n_groups();
    prices.validate(n)?;
    check_groups(v.max_group(), available)?;
    if available.total_units() > MAX_UNITS {
        return Err(Error::Capacity(format!(
            "brute-force demand supports at most {MAX_UNITS} units, got {}",
            available.total_units()
        )));
    }
    let limits: Vec<u128> = (0..n).map(|g| prices.units_for_sale(g, available.get(g))).collect();
    let mut q = vec![0u128; n];
    let mut best: Option<Purchase> = None;
    loop {
        let bundle = Bundle::from_counts(q.clone());
        let payment = payment_for(&bundle, available, prices);
        let utility = v.value(&bundle)? - payment;
        if best.as_ref().is_none_or(|b| utility > b.utility) {
            best = Some(Purchase { bundle, payment, utility, chosen_component: None });
        }
        let mut g = 0;
        loop {
            if g == n {
                return Ok(best.expect("empty bundle evaluated"));
            }
            if q[g] < limits[g] {
                q[g] += 1;
                break;
            }
            q[g] = 0;
            g += 1;
        }
    }
}

/// `max_{S' ⊆ b} v(S')`.
pub fn h_value(v: &Valuation, b: &Bundle) -> Result<f64> {
    Ok(demand(v, b, &PriceAssignment::Uniform(0.0), TieBreakPolicy::STRICT)?.utility)
}

/// Does the buyer take all of `b` at uniform price `p`?
pub fn is_supported(v: &Valuation, b: &Bundle, p: f64, tie: TieBreakPolicy) -> Result<bool> {
    Ok(demand(v, b, &PriceAssignment::Uniform(p), tie)?.bundle == *b)
}

/// A price below which the demanded size becomes `size`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Breakpoint {
    pub price: f64,
    pub size: u128,
}

/// Strictly decreasing prices `q_t` with strictly increasing sizes `n_t`:
/// the demanded size is `n_t` for uniform prices strictly between `q_{t+1}`
/// and `q_t`, where `q_{l+1} = 0`.
pub fn breakpoints(v: &Valuation, b: &Bundle, tie: TieBreakPolicy) -> Result<Vec<Breakpoint>> {
    if b.is_empty() {
        return Err(domain("breakpoints need a non-empty bundle"));
    }
    let events = uniform_price_events(v, b)?;
    let mut out = Vec::new();
    let mut prev = 0;
    for (t, &hi) in events.iter().enumerate() {
        let lo = events.get(t + 1).copied().unwrap_or(0.0);
        let size = demand(v, b, &PriceAssignment::Uniform(0.5 * (lo + hi)), tie)?.units();
        if size != prev {
            out.push(Breakpoint { price: hi, size });
            prev = size;
        }
    }
    Ok(out)
}

/// Utility `u(p)` rebuilt from breakpoints, anchored at `u = 0` above `q_1`.
pub fn utility_from_breakpoints(bps: &[Breakpoint], p: f64) -> f64 {
    // u is continuous, zero above q_1, slope -n_t on (q_{t+1}, q_t)
    let mut u = 0.0;
    for (t, bp) in bps.iter().enumerate() {
        if p >= bp.price {
            break;
        }
        let lo = bps.get(t + 1).map_or(0.0, |b| b.price).max(p);
        u += bp.size as f64 * (bp.price - lo);
    }
    u
}

/// Positive uniform prices, in decreasing order, outside of which the demand
/// of `v` on `avail` cannot change: per-item values plus every crossing of two
/// component utility curves. A superset of the true change points.
pub fn uniform_price_events(v: &Valuation, avail: &Bundle) -> Result<Vec<f64>> {
    check_groups(v.max_group(), avail)?;
    let mut out = Vec::new();
    match v {
        Valuation::Additive(c) => list_events(std::slice::from_ref(c), avail, &mut out),
        Valuation::Xos(t) => tree_events(t, avail, &mut out),
        Valuation::Explicit(t) => explicit_events(t, avail, &mut out)?,
    }
    Ok(normalize_events(out))
}

pub(crate) fn normalize_events(mut out: Vec<f64>) -> Vec<f64> {
    out.retain(|&p| p > 0.0 && p.is_finite());
    out.sort_by(|a, b| b.total_cmp(a));
    out.dedup_by(|a, b| approx_eq(*a, *b));
    out
}

fn list_events(cs: &[Component], avail: &Bundle, out: &mut Vec<f64>) {
    let mut entries: Vec<(f64, usize, f64)> = Vec::new();
    for (ci, c) in cs.iter().enumerate() {
        for &(g, a) in c.entries() {
            let q = avail.get(g);
            if q > 0 {
                entries.push((a, ci, q as f64));
            }
        }
    }
    entries.sort_by(|x, y| y.0.total_cmp(&x.0));
    out.extend(entries.iter().map(|e| e.0));
    if cs.len() < 2 {
        return;
    }
    // on each segment between kinks, component c has utility A_c - s_c p
    let mut a_sum = vec![0.0; cs.len()];
    let mut s_sum = vec![0.0; cs.len()];
    let mut i = 0;
    while i < entries.len() {
        let hi = entries[i].0;
        while i < entries.len() && entries[i].0 == hi {
            let (a, ci, q) = entries[i];
            a_sum[ci] += a * q;
            s_sum[ci] += q;
            i += 1;
        }
        let lo = entries.get(i).map_or(0.0, |e| e.0);
        for c in 0..cs.len() {
            for d in c + 1..cs.len() {
                let ds = s_sum[c] - s_sum[d];
                if ds != 0.0 {
                    let p = (a_sum[c] - a_sum[d]) / ds;
                    if p > lo && p < hi {
                        out.push(p);
                    }
                }
            }
        }
    }
}

/// Utility of the best component at uniform price `p`.
fn tree_utility(t: &Components, avail: &Bundle, p: f64) -> f64 {
    let comp = |c: &Component| {
        c.entries()
            .iter()
            .map(|&(g, a)| if a > p { (a - p) * avail.get(g) as f64 } else { 0.0 })
            .sum::<f64>()
    };
    match t {
        Components::List(cs) => cs.iter().map(comp).fold(0.0, f64::max),
        Components::Product(xs) => xs.iter().map(|x| tree_utility(x, avail, p)).sum(),
        Components::Union(xs) => xs.iter().map(|x| tree_utility(x, avail, p)).fold(0.0, f64::max),
    }
}

fn tree_events(t: &Components, avail: &Bundle, out: &mut Vec<f64>) {
    match t {
        Components::List(cs) => list_events(cs, avail, out),
        Components::Product(xs) => xs.iter().for_each(|x| tree_events(x, avail, out)),
        Components::Union(xs) => {
            let mut grid = Vec::new();
            for x in xs {
                tree_events(x, avail, &mut grid);
            }
            let mut grid = normalize_events(grid);
            out.extend_from_slice(&grid);
            grid.push(0.0);
            // every member is linear between consecutive grid points
            let u: Vec<Vec<f64>> = xs
                .iter()
                .map(|x| grid.iter().map(|&p| tree_utility(x, avail, p)).collect())
                .collect();
            let sign = |a: f64, b: f64| {
                if definitely_greater(a, b) {
                    1
                } else if definitely_greater(b, a) {
                    -1
                } else {
                    0
                }
            };
            for i in 0..xs.len() {
                for j in i + 1..xs.len() {
                    for t in 0..grid.len().saturating_sub(1) {
                        let (s0, s1) = (sign(u[i][t], u[j][t]), sign(u[i][t + 1], u[j][t + 1]));
                        if s0 * s1 < 0 {
                            let d0 = u[i][t] - u[j][t];
                            let d1 = u[i][t + 1] - u[j][t + 1];
                            let (hi, lo) = (grid[t], grid[t + 1]);
                            out.push(hi + (lo - hi) * d0 / (d0 - d1));
                        }
                    }
                }
            }
        }
    }
}

/// Crossings of the lines `w_s - s p`, where `w_s` is the best value of a set
/// of `s` available items; the utility is their upper envelope.
fn explicit_events(t: &ExplicitTable, avail: &Bundle, out: &mut Vec<f64>) -> Result<()> {
    let offers = explicit_offers(t, avail, &PriceAssignment::Uniform(0.0))?;
    let k = offers.len();
    let w: Vec<f64> = if let Some(by_size) = t.by_size() {
        by_size[..=k].to_vec()
    } else {
        let mut w = vec![0.0f64; k + 1];
        let mut full = vec![0usize; 1 << k];
        for m in 1usize..1 << k {
            let low = m.trailing_zeros() as usize;
            full[m] = full[m & (m - 1)] | (1 << offers[low].0);
            let s = m.count_ones() as usize;
            w[s] = w[s].max(t.value_mask(full[m]));
        }
        w
    };
    for s in 1..=k {
        for r in 0..s {
            out.push((w[s] - w[r]) / (s - r) as f64);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuation::Component;

    fn harmonic(n: usize) -> Valuation {
        let mut h = vec![0.0];
        for i in 1..=n {
            h.push(h[i - 1] + 1.0 / i as f64);
        }
        Valuation::Explicit(ExplicitTable::from_cardinality((0..n).collect(), h).unwrap())
    }

    fn two_comp() -> Valuation {
        Valuation::xos(vec![
            Component::new([(0, 4.0)]).unwrap(),
            Component::new([(1, 3.0)]).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn xos_example() {
        let p = demand(&two_comp(), &Bundle::from_counts(vec![1, 1]), &PriceAssignment::Uniform(2.0), TieBreakPolicy::STRICT)
            .unwrap();
        assert_eq!(p.bundle.counts(), &[1, 0]);
        assert_eq!((p.payment, p.utility, p.chosen_component), (2.0, 2.0, Some(0)));
    }

    #[test]
    fn harmonic_example() {
        let v = harmonic(4);
        let b = Bundle::from_counts(vec![1; 4]);
        let p = demand(&v, &b, &PriceAssignment::Uniform(0.4), TieBreakPolicy::STRICT).unwrap();
        assert_eq!(p.units(), 2);
        assert!((p.payment - 0.8).abs() < 1e-12);
        assert!((p.utility - 0.7).abs() < 1e-12);
        let bf = demand_bruteforce(&v, &b, &PriceAssignment::Uniform(0.4)).unwrap();
        assert!((bf.utility - 0.7).abs() < 1e-12);
        let none = demand_bruteforce(&v, &b, &PriceAssignment::Uniform(1.5)).unwrap();
        assert_eq!((none.units(), none.utility), (0, 0.0));
    }

    #[test]
    fn bruteforce_additive_multiplicity() {
        let v = Valuation::additive([(0, 5.0)]).unwrap();
        let p = demand_bruteforce(&v, &Bundle::from_counts(vec![3]), &PriceAssignment::Uniform(4.0)).unwrap();
        assert_eq!((p.units(), p.utility), (3, 3.0));
    }

    #[test]
    fn price_above_everything_buys_nothing() {
        let p = demand(&two_comp(), &Bundle::from_counts(vec![1, 1]), &PriceAssignment::Uniform(9.0), TieBreakPolicy::INCLUSIVE)
            .unwrap();
        assert!(p.bundle.is_empty());
        assert_eq!(p.utility, 0.0);
    }

    #[test]
    fn h_values() {
        let v = harmonic(4);
        assert!((h_value(&v, &Bundle::from_counts(vec![1; 4])).unwrap() - 25.0 / 12.0).abs() < 1e-12);
        assert_eq!(h_value(&v, &Bundle::empty(4)).unwrap(), 0.0);
    }

    #[test]
    fn breakpoint_examples() {
        let bps = breakpoints(&harmonic(3), &Bundle::from_counts(vec![1; 3]), TieBreakPolicy::STRICT).unwrap();
        let got: Vec<(f64, u128)> = bps.iter().map(|b| (b.price, b.size)).collect();
        assert_eq!(got.len(), 3);
        for (g, w) in got.iter().zip([(1.0, 1), (0.5, 2), (1.0 / 3.0, 3)]) {
            assert!((g.0 - w.0).abs() < 1e-12 && g.1 == w.1, "{got:?}");
        }
        let single = Valuation::additive([(0, 7.0)]).unwrap();
        let bps = breakpoints(&single, &Bundle::from_counts(vec![1]), TieBreakPolicy::STRICT).unwrap();
        assert_eq!(bps, vec![Breakpoint { price: 7.0, size: 1 }]);
        let bps = breakpoints(&two_comp(), &Bundle::from_counts(vec![1, 1]), TieBreakPolicy::STRICT).unwrap();
        assert_eq!(bps, vec![Breakpoint { price: 4.0, size: 1 }]);
    }

    #[test]
    fn supported_examples() {
        let b2 = Bundle::from_counts(vec![1, 1]);
        assert!(is_supported(&harmonic(2), &b2, 0.5, TieBreakPolicy::INCLUSIVE).unwrap());
        assert!(!is_supported(&harmonic(2), &b2, 0.5, TieBreakPolicy::STRICT).unwrap());
        let v = Valuation::additive([(0, 3.0), (1, 1.0)]).unwrap();
        assert!(!is_supported(&v, &b2, 2.0, TieBreakPolicy::STRICT).unwrap());
        let z = Valuation::additive([(0, 3.0)]).unwrap();
        assert!(is_supported(&z, &b2, 0.0, TieBreakPolicy::INCLUSIVE).unwrap());
    }

    #[test]
    fn negative_price_is_domain_error() {
        let r = demand(&two_comp(), &Bundle::from_counts(vec![1, 1]), &PriceAssignment::Uniform(-1.0), TieBreakPolicy::STRICT);
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn reconstruction_matches_demand() {
        let v = harmonic(5);
        let b = Bundle::from_counts(vec![1; 5]);
        let bps = breakpoints(&v, &b, TieBreakPolicy::STRICT).unwrap();
        for i in 0..200 {
            let p = i as f64 / 100.0;
            let u = demand(&v, &b, &PriceAssignment::Uniform(p), TieBreakPolicy::STRICT).unwrap().utility;
            assert!((u - utility_from_breakpoints(&bps, p)).abs() < 1e-12, "p={p}");
        }
    }
}
