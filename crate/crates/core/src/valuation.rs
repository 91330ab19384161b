//! Item groups, bundles and valuation representations.

use crate::error::{domain, Error, Result};
use serde::{Deserialize, Serialize};

/// Position of a group inside an instance.
pub type GroupIndex = usize;

/// A class of interchangeable items.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemGroup {
    pub id: String,
    pub count: u128,
}

impl ItemGroup {
    pub fn new(id: impl Into<String>, count: u128) -> Self {
        Self { id: id.into(), count }
    }
}

/// Unit counts per group, indexed by group position.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Bundle(Vec<u128>);

impl Bundle {
    pub fn empty(n_groups: usize) -> Self {
        Self(vec![0; n_groups])
    }

    pub fn from_counts(counts: Vec<u128>) -> Self {
        Self(counts)
    }

    pub fn n_groups(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, g: GroupIndex) -> u128 {
        self.0.get(g).copied().unwrap_or(0)
    }

    pub fn set(&mut self, g: GroupIndex, q: u128) {
        self.0[g] = q;
    }

    pub fn counts(&self) -> &[u128] {
        &self.0
    }

    pub fn total_units(&self) -> u128 {
        self.0.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&q| q == 0)
    }

    /// Every count of `self` is at most the matching count of `other`.
    pub fn is_within(&self, other: &Bundle) -> bool {
        self.0.iter().enumerate().all(|(g, &q)| q <= other.get(g))
    }

    /// Remove `other` from `self`.
    pub fn subtract(&mut self, other: &Bundle) -> Result<()> {
        if !other.is_within(self) {
            return Err(domain("cannot remove units that are not present"));
        }
        for (g, &q) in other.0.iter().enumerate() {
            self.0[g] -= q;
        }
        Ok(())
    }

    pub fn add(&mut self, other: &Bundle) {
        if self.0.len() < other.0.len() {
            self.0.resize(other.0.len(), 0);
        }
        for (g, &q) in other.0.iter().enumerate() {
            self.0[g] += q;
        }
    }

    /// Non-zero entries.
    pub fn iter(&self) -> impl Iterator<Item = (GroupIndex, u128)> + '_ {
        self.0.iter().copied().enumerate().filter(|&(_, q)| q > 0)
    }
}

/// One additive function: a per-item value for each group it touches.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Component {
    entries: Vec<(GroupIndex, f64)>,
}

impl Component {
    /// Zero values are dropped; negative or non-finite values are rejected.
    pub fn new(entries: impl IntoIterator<Item = (GroupIndex, f64)>) -> Result<Self> {
        let mut entries: Vec<(GroupIndex, f64)> = entries.into_iter().collect();
        for &(g, a) in &entries {
            if !a.is_finite() || a < 0.0 {
                return Err(Error::InvalidValuation(format!(
                    "per-item value {a} on group {g} must be finite and non-negative"
                )));
            }
        }
        entries.retain(|&(_, a)| a > 0.0);
        entries.sort_by_key(|&(g, _)| g);
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidValuation("duplicate group in component".into()));
        }
        Ok(Self { entries })
    }

    pub fn from_dense(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().copied().enumerate())
    }

    pub fn entries(&self) -> &[(GroupIndex, f64)] {
        &self.entries
    }

    pub fn value_of(&self, g: GroupIndex) -> f64 {
        match self.entries.binary_search_by_key(&g, |&(h, _)| h) {
            Ok(i) => self.entries[i].1,
            Err(_) => 0.0,
        }
    }

    pub fn max_value(&self) -> f64 {
        self.entries.iter().map(|&(_, a)| a).fold(0.0, f64::max)
    }

    pub fn max_group(&self) -> Option<GroupIndex> {
        self.entries.last().map(|&(g, _)| g)
    }

    pub fn sum_over(&self, b: &Bundle) -> Result<f64> {
        check_groups(self.max_group(), b)?;
        Ok(self
            .entries
            .iter()
            .map(|&(g, a)| a * b.get(g) as f64)
            .sum())
    }
}

pub(crate) fn check_groups(max_group: Option<GroupIndex>, b: &Bundle) -> Result<()> {
    match max_group {
        Some(g) if g >= b.n_groups() => Err(domain(format!(
            "valuation references group {g} but the bundle has {} groups",
            b.n_groups()
        ))),
        _ => Ok(()),
    }
}

/// The additive components of an XOS valuation.
///
/// `Product` blocks touch disjoint groups and are chosen independently, so a
/// product of `b` blocks with `l` components each stands for `l^b` additive
/// functions without materializing them. Global indices are mixed radix with
/// block 0 most significant. `Union` concatenates the index ranges of its
/// members.
#[derive(Clone, Debug, PartialEq)]
pub enum Components {
    List(Vec<Component>),
    Product(Vec<Components>),
    Union(Vec<Components>),
}

impl Components {
    pub fn list(components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidValuation("XOS needs at least one component".into()));
        }
        Ok(Self::List(components))
    }

    pub fn product(blocks: Vec<Components>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidValuation("empty product".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for b in &blocks {
            for g in b.support() {
                if !seen.insert(g) {
                    return Err(Error::InvalidValuation(format!(
                        "product blocks overlap on group {g}"
                    )));
                }
            }
        }
        Ok(Self::Product(blocks))
    }

    pub fn union(members: Vec<Components>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidValuation("empty union".into()));
        }
        Ok(Self::Union(members))
    }

    /// Number of additive components represented.
    pub fn count(&self) -> Option<usize> {
        match self {
            Self::List(c) => Some(c.len()),
            Self::Product(b) => b.iter().try_fold(1usize, |acc, x| acc.checked_mul(x.count()?)),
            Self::Union(m) => m.iter().try_fold(0usize, |acc, x| acc.checked_add(x.count()?)),
        }
    }

    /// Sorted groups with a positive value in some component.
    pub fn support(&self) -> Vec<GroupIndex> {
        let mut out = Vec::new();
        self.collect_support(&mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    fn collect_support(&self, out: &mut Vec<GroupIndex>) {
        match self {
            Self::List(c) => c.iter().for_each(|c| out.extend(c.entries.iter().map(|e| e.0))),
            Self::Product(xs) | Self::Union(xs) => xs.iter().for_each(|x| x.collect_support(out)),
        }
    }

    pub fn max_group(&self) -> Option<GroupIndex> {
        match self {
            Self::List(c) => c.iter().filter_map(Component::max_group).max(),
            Self::Product(xs) | Self::Union(xs) => xs.iter().filter_map(Self::max_group).max(),
        }
    }

    /// Largest per-item value anywhere.
    pub fn max_item_value(&self) -> f64 {
        match self {
            Self::List(c) => c.iter().map(Component::max_value).fold(0.0, f64::max),
            Self::Product(xs) | Self::Union(xs) => {
                xs.iter().map(Self::max_item_value).fold(0.0, f64::max)
            }
        }
    }

    /// Materialize component `idx`.
    pub fn component(&self, idx: usize) -> Option<Component> {
        let mut entries = Vec::new();
        self.collect_component(idx, &mut entries)?;
        Some(Component::new(entries).expect("components of a valid tree are valid"))
    }

    fn collect_component(&self, idx: usize, out: &mut Vec<(GroupIndex, f64)>) -> Option<()> {
        match self {
            Self::List(c) => {
                out.extend_from_slice(&c.get(idx)?.entries);
                Some(())
            }
            Self::Product(blocks) => {
                let digits = self.product_digits(blocks, idx)?;
                for (b, d) in blocks.iter().zip(digits) {
                    b.collect_component(d, out)?;
                }
                Some(())
            }
            Self::Union(members) => {
                let mut rest = idx;
                for m in members {
                    let c = m.count()?;
                    if rest < c {
                        return m.collect_component(rest, out);
                    }
                    rest -= c;
                }
                None
            }
        }
    }

    fn product_digits(&self, blocks: &[Components], mut idx: usize) -> Option<Vec<usize>> {
        let mut digits = vec![0; blocks.len()];
        for (i, b) in blocks.iter().enumerate().rev() {
            let c = b.count()?;
            digits[i] = idx % c;
            idx /= c;
        }
        (idx == 0).then_some(digits)
    }

    /// Combine per-block digits into a global index.
    pub(crate) fn product_index(blocks: &[Components], digits: &[usize]) -> usize {
        let mut idx = 0usize;
        for (b, &d) in blocks.iter().zip(digits) {
            idx = idx.saturating_mul(b.count().unwrap_or(usize::MAX)).saturating_add(d);
        }
        idx
    }

    pub fn value(&self, b: &Bundle) -> Result<f64> {
        check_groups(self.max_group(), b)?;
        Ok(self.value_unchecked(b))
    }

    fn value_unchecked(&self, b: &Bundle) -> f64 {
        match self {
            Self::List(c) => c
                .iter()
                .map(|c| c.entries.iter().map(|&(g, a)| a * b.get(g) as f64).sum::<f64>())
                .fold(0.0, f64::max),
            Self::Product(xs) => xs.iter().map(|x| x.value_unchecked(b)).sum(),
            Self::Union(xs) => xs.iter().map(|x| x.value_unchecked(b)).fold(0.0, f64::max),
        }
    }
}

/// A set function tabulated over at most 20 single-unit groups.
///
/// Bit `j` of a subset mask stands for group `items[j]`. Units of other
/// groups are worth nothing to this buyer.
#[derive(Clone, Debug, PartialEq)]
pub struct ExplicitTable {
    items: Vec<GroupIndex>,
    table: Vec<f64>,
    by_size: Option<Vec<f64>>,
}

impl ExplicitTable {
    pub const MAX_ITEMS: usize = 20;

    /// Validates `v(∅) = 0`, monotonicity and subadditivity exhaustively.
    pub fn from_table(items: Vec<GroupIndex>, table: Vec<f64>) -> Result<Self> {
        let n = Self::check_items(&items)?;
        if table.len() != 1usize << n {
            return Err(Error::InvalidValuation(format!(
                "table over {n} items needs {} entries, got {}",
                1usize << n,
                table.len()
            )));
        }
        check_values(&table)?;
        if table[0] != 0.0 {
            return Err(Error::InvalidValuation("v(empty) must be 0".into()));
        }
        for mask in 0..table.len() {
            for j in 0..n {
                let bigger = mask | (1 << j);
                if table[bigger] < table[mask] && !crate::num::approx_eq(table[bigger], table[mask]) {
                    return Err(Error::InvalidValuation(format!(
                        "not monotone: v({mask:#b}) > v({bigger:#b})"
                    )));
                }
            }
        }
        for u in 1..table.len() {
            // every split {s, u \ s} once
            let mut s = (u - 1) & u;
            while s > 0 {
                let t = u ^ s;
                if s < t {
                    let lhs = table[s] + table[t];
                    if lhs < table[u] && !crate::num::approx_eq(lhs, table[u]) {
                        return Err(Error::InvalidValuation(format!(
                            "not subadditive: v({s:#b}) + v({t:#b}) < v({u:#b})"
                        )));
                    }
                }
                s = (s - 1) & u;
            }
        }
        Ok(Self { items, table, by_size: None })
    }

    /// A function of subset size only: `v(S) = by_size[|S|]`.
    pub fn from_cardinality(items: Vec<GroupIndex>, by_size: Vec<f64>) -> Result<Self> {
        let n = Self::check_items(&items)?;
        if by_size.len() != n + 1 {
            return Err(Error::InvalidValuation(format!(
                "cardinality table over {n} items needs {} entries",
                n + 1
            )));
        }
        check_values(&by_size)?;
        if by_size[0] != 0.0 {
            return Err(Error::InvalidValuation("v(empty) must be 0".into()));
        }
        if by_size.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidValuation("not monotone in size".into()));
        }
        for a in 1..=n {
            for b in a..=n - a {
                let lhs = by_size[a] + by_size[b];
                if lhs < by_size[a + b] && !crate::num::approx_eq(lhs, by_size[a + b]) {
                    return Err(Error::InvalidValuation(format!(
                        "not subadditive on sizes {a} + {b}"
                    )));
                }
            }
        }
        let table = (0..1usize << n)
            .map(|m| by_size[m.count_ones() as usize])
            .collect();
        Ok(Self { items, table, by_size: Some(by_size) })
    }

    fn check_items(items: &[GroupIndex]) -> Result<usize> {
        if items.len() > Self::MAX_ITEMS {
            return Err(Error::Capacity(format!(
                "explicit valuations support at most {} items, got {}",
                Self::MAX_ITEMS,
                items.len()
            )));
        }
        let mut sorted = items.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidValuation("duplicate item in explicit table".into()));
        }
        Ok(items.len())
    }

    pub fn items(&self) -> &[GroupIndex] {
        &self.items
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn by_size(&self) -> Option<&[f64]> {
        self.by_size.as_deref()
    }

    pub fn value_mask(&self, mask: usize) -> f64 {
        self.table[mask]
    }

    /// Subset mask of `b`, rejecting multiple units of one item.
    pub fn mask_of(&self, b: &Bundle) -> Result<usize> {
        check_groups(self.items.iter().copied().max(), b)?;
        let mut mask = 0;
        for (j, &g) in self.items.iter().enumerate() {
            match b.get(g) {
                0 => {}
                1 => mask |= 1 << j,
                q => {
                    return Err(domain(format!(
                        "explicit valuations need single-unit groups; group {g} has {q} units"
                    )))
                }
            }
        }
        Ok(mask)
    }
}

fn check_values(xs: &[f64]) -> Result<()> {
    if xs.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidValuation("values must be finite and non-negative".into()));
    }
    Ok(())
}

/// A buyer's valuation over bundles.
#[derive(Clone, Debug, PartialEq)]
pub enum Valuation {
    Additive(Component),
    Xos(Components),
    Explicit(ExplicitTable),
}

impl Valuation {
    pub fn additive(entries: impl IntoIterator<Item = (GroupIndex, f64)>) -> Result<Self> {
        Ok(Self::Additive(Component::new(entries)?))
    }

    pub fn xos(components: Vec<Component>) -> Result<Self> {
        Ok(Self::Xos(Components::list(components)?))
    }

    pub fn value(&self, b: &Bundle) -> Result<f64> {
        match self {
            Self::Additive(c) => c.sum_over(b),
            Self::Xos(c) => c.value(b),
            Self::Explicit(t) => Ok(t.value_mask(t.mask_of(b)?)),
        }
    }

    pub fn is_xos(&self) -> bool {
        !matches!(self, Self::Explicit(_))
    }

    /// Number of additive components (1 for additive, none for explicit).
    pub fn component_count(&self) -> Option<usize> {
        match self {
            Self::Additive(_) => Some(1),
            Self::Xos(c) => c.count(),
            Self::Explicit(_) => None,
        }
    }

    pub fn component(&self, idx: usize) -> Option<Component> {
        match self {
            Self::Additive(c) => (idx == 0).then(|| c.clone()),
            Self::Xos(c) => c.component(idx),
            Self::Explicit(_) => None,
        }
    }

    /// Highest group index referenced.
    pub fn max_group(&self) -> Option<GroupIndex> {
        match self {
            Self::Additive(c) => c.max_group(),
            Self::Xos(c) => c.max_group(),
            Self::Explicit(t) => t.items.iter().copied().max(),
        }
    }

    /// Groups this valuation can assign positive value to.
    pub fn support(&self) -> Vec<GroupIndex> {
        match self {
            Self::Additive(c) => c.entries.iter().map(|e| e.0).collect(),
            Self::Xos(c) => c.support(),
            Self::Explicit(t) => {
                let mut s = t.items.clone();
                s.sort_unstable();
                s
            }
        }
    }
}

/// `v(b)`.
pub fn value(v: &Valuation, b: &Bundle) -> Result<f64> {
    v.value(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn additive_and_xos_values() {
        let v = Valuation::additive([(0, 3.0), (1, 1.0)]).unwrap();
        assert_eq!(v.value(&Bundle::from_counts(vec![1, 1])).unwrap(), 4.0);
        let x = Valuation::xos(vec![
            Component::from_dense(&[4.0, 0.0]).unwrap(),
            Component::from_dense(&[0.0, 3.0]).unwrap(),
        ])
        .unwrap();
        assert_eq!(x.value(&Bundle::from_counts(vec![1, 1])).unwrap(), 4.0);
        assert_eq!(x.value(&Bundle::empty(2)).unwrap(), 0.0);
    }

    #[test]
    fn unknown_group_is_domain_error() {
        let v = Valuation::additive([(3, 1.0)]).unwrap();
        assert!(matches!(v.value(&Bundle::empty(2)), Err(Error::Domain(_))));
    }

    #[test]
    fn product_indexing_is_mixed_radix() {
        let a = Components::list(vec![
            Component::new([(0, 1.0)]).unwrap(),
            Component::new([(1, 2.0)]).unwrap(),
        ])
        .unwrap();
        let b = Components::list(vec![
            Component::new([(2, 3.0)]).unwrap(),
            Component::new([(3, 4.0)]).unwrap(),
            Component::new([(4, 5.0)]).unwrap(),
        ])
        .unwrap();
        let p = Components::product(vec![a, b]).unwrap();
        assert_eq!(p.count(), Some(6));
        let c = p.component(4).unwrap(); // digits (1, 1)
        assert_eq!(c.entries(), &[(1, 2.0), (3, 4.0)]);
        assert!(p.component(6).is_none());
        let full = Bundle::from_counts(vec![1; 5]);
        assert_eq!(p.value(&full).unwrap(), 2.0 + 5.0);
    }

    #[test]
    fn overlapping_product_rejected() {
        let a = Components::list(vec![Component::new([(0, 1.0)]).unwrap()]).unwrap();
        assert!(Components::product(vec![a.clone(), a]).is_err());
    }

    #[test]
    fn explicit_validation() {
        assert!(ExplicitTable::from_table(vec![0, 1], vec![0.0, 1.0, 1.0, 3.0]).is_err());
        assert!(ExplicitTable::from_table(vec![0, 1], vec![0.0, 2.0, 1.0, 1.5]).is_err());
        assert!(ExplicitTable::from_table(vec![0, 1], vec![0.0, 1.0, 1.0, 1.5]).is_ok());
        let h = ExplicitTable::from_cardinality(vec![0, 1, 2], vec![0.0, 1.0, 1.5, 1.5 + 1.0 / 3.0])
            .unwrap();
        assert_eq!(h.value_mask(0b101), 1.5);
        assert!(ExplicitTable::from_cardinality(vec![0, 1], vec![0.0, 1.0, 3.0]).is_err());
    }
}
