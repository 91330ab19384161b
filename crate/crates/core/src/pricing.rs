//! Posted prices.

use crate::error::{domain, Result};
use crate::valuation::GroupIndex;
use std::sync::Arc;

/// The price of one group.
///
/// `Tiered` lists `(price, units)` in ascending price order and may contain
/// `f64::INFINITY` for units that are not for sale. A buyer always takes the
/// cheapest units of a group first, so when `avail` units remain they are the
/// `avail` most expensive entries of the list.
#[derive(Clone, Debug, PartialEq)]
pub enum GroupPrice {
    Price(f64),
    Tiered(Vec<(f64, u128)>),
    Unavailable,
}

impl GroupPrice {
    fn validate(&self, g: GroupIndex) -> Result<()> {
        let bad = |p: f64| p.is_nan() || p < 0.0 || p == f64::NEG_INFINITY;
        match self {
            Self::Price(p) if bad(*p) => Err(domain(format!("negative or NaN price {p} on group {g}"))),
            Self::Tiered(t) => {
                if t.iter().any(|&(p, _)| bad(p)) {
                    return Err(domain(format!("negative or NaN tier price on group {g}")));
                }
                if t.windows(2).any(|w| w[1].0 < w[0].0) {
                    return Err(domain(format!("price tiers of group {g} are not ascending")));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// A uniform price or one price per group.
#[derive(Clone, Debug, PartialEq)]
pub enum PriceAssignment {
    Uniform(f64),
    PerGroup(Arc<[GroupPrice]>),
}

impl PriceAssignment {
    pub fn per_group(prices: Vec<GroupPrice>) -> Self {
        Self::PerGroup(prices.into())
    }

    /// Reject negative or NaN prices and size mismatches.
    pub fn validate(&self, n_groups: usize) -> Result<()> {
        match self {
            Self::Uniform(p) if p.is_nan() || *p < 0.0 => {
                Err(domain(format!("negative or NaN uniform price {p}")))
            }
            Self::Uniform(_) => Ok(()),
            Self::PerGroup(v) => {
                if v.len() != n_groups {
                    return Err(domain(format!(
                        "per-group prices cover {} groups, inventory has {n_groups}",
                        v.len()
                    )));
                }
                v.iter().enumerate().try_for_each(|(g, p)| p.validate(g))
            }
        }
    }

    /// Calls `f(price, units)` for the finite-priced tiers of the `avail`
    /// remaining units of `g`, cheapest first, until `f` returns false.
    pub(crate) fn for_each_tier(&self, g: GroupIndex, avail: u128, mut f: impl FnMut(f64, u128) -> bool) {
        if avail == 0 {
            return;
        }
        let p = match self {
            Self::Uniform(p) => *p,
            Self::PerGroup(v) => match &v[g] {
                GroupPrice::Price(p) => *p,
                GroupPrice::Unavailable => return,
                GroupPrice::Tiered(t) => {
                    let total: u128 = t.iter().map(|x| x.1).sum();
                    // units missing from the list count as unavailable
                    let mut skip = total.saturating_sub(avail);
                    for &(p, c) in t {
                        if skip >= c {
                            skip -= c;
                            continue;
                        }
                        let c = c - skip;
                        skip = 0;
                        if !p.is_finite() || !f(p, c) {
                            return;
                        }
                    }
                    return;
                }
            },
        };
        if p.is_finite() {
            f(p, avail);
        }
    }

    /// Units of `g` for sale when `avail` remain.
    pub fn units_for_sale(&self, g: GroupIndex, avail: u128) -> u128 {
        let mut n = 0;
        self.for_each_tier(g, avail, |_, c| {
            n += c;
            true
        });
        n
    }

    /// Cost of the `q` cheapest units of `g` when `avail` remain.
    pub fn cheapest_cost(&self, g: GroupIndex, avail: u128, q: u128) -> f64 {
        let mut left = q;
        let mut cost = 0.0;
        self.for_each_tier(g, avail, |p, c| {
            let take = c.min(left);
            if take > 0 && p > 0.0 {
                cost += p * take as f64;
            }
            left -= take;
            left > 0
        });
        cost
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self, Self::Uniform(_))
    }

    pub fn mode_name(&self) -> &'static str {
        match self {
            Self::Uniform(_) => "uniform",
            Self::PerGroup(_) => "per_group",
        }
    }

    /// The uniform price, or the smallest finite price posted on any group.
    pub fn min_price(&self) -> f64 {
        match self {
            Self::Uniform(p) => *p,
            Self::PerGroup(v) => v
                .iter()
                .filter_map(|p| match p {
                    GroupPrice::Price(p) => Some(*p),
                    GroupPrice::Tiered(t) => t.first().map(|x| x.0),
                    GroupPrice::Unavailable => None,
                })
                .fold(f64::INFINITY, f64::min),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiers_keep_most_expensive_units() {
        let p = PriceAssignment::per_group(vec![GroupPrice::Tiered(vec![(1.0, 2), (3.0, 1), (f64::INFINITY, 1)])]);
        let mut seen = vec![];
        p.for_each_tier(0, 2, |p, c| {
            seen.push((p, c));
            true
        });
        assert_eq!(seen, vec![(3.0, 1)]);
        assert_eq!(p.cheapest_cost(0, 4, 3), 5.0);
        assert_eq!(p.units_for_sale(0, 4), 3);
    }

    #[test]
    fn negative_price_rejected() {
        assert!(PriceAssignment::Uniform(-1.0).validate(1).is_err());
        assert!(PriceAssignment::per_group(vec![GroupPrice::Price(f64::NAN)]).validate(1).is_err());
        assert!(PriceAssignment::per_group(vec![GroupPrice::Unavailable]).validate(1).is_ok());
    }
}
