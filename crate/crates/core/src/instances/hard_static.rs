//! Instances on which every static uniform price earns little.
//!
//! Items are split into sets `S_0 .. S_{6k+2}` with `|S_i| = n_0 / X^i`, each
//! holding a high-value subset `S'_i` of size `n_0 / X^(i+1)`. Buyer A values
//! only the `S'_i`, at `c Y^i` per set; buyer B values `S'_i` at
//! `Y^i - Y^(i+1)` and the rest of `S_i` at `Y^(i+1)`. Both are 3-XOS, one
//! component per residue class of `i mod 3`. Here `Y = 1/2`, `X = 2^k`,
//! `c = c_scale / X` and `n_0 = 2^(9k^2)`.

use super::{Buyer, Instance, Metadata};
use crate::error::{domain, Error, Result};
use crate::valuation::{Bundle, Component, Components, GroupIndex, ItemGroup, Valuation};
use serde::{Deserialize, Serialize};
use std::str::FromStr;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HardStaticVariant {
    /// Buyer A then buyer B.
    TwoBuyer,
    /// One B-type buyer and `m - 1` A-type clones, each with a shadow copy
    /// of the `S'_i` sets.
    RandomOrderClone,
    /// `m` replicas of the clone market's items; buyer `q` plays B in
    /// replica `q` and a clone elsewhere.
    ReplicatedSellerOrder,
    /// The pointwise maximum of the replicated buyers, shared by every buyer.
    IdenticalBuyers,
}

impl FromStr for HardStaticVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "two_buyer" => Self::TwoBuyer,
            "random_order_clone" => Self::RandomOrderClone,
            "replicated_seller_order" => Self::ReplicatedSellerOrder,
            "identical_buyers" => Self::IdenticalBuyers,
            _ => return Err(Error::Parse(format!("unknown hard-static variant {s:?}"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardStaticParams {
    pub k: u32,
    pub variant: HardStaticVariant,
    /// buyers in the clone variant, replicas otherwise
    pub m: Option<usize>,
    /// arriving buyers in the identical variant (default `m`)
    pub buyers: Option<usize>,
    /// `c = c_scale / X`
    pub c_scale: f64,
}

impl HardStaticParams {
    pub const MAX_REPLICAS: usize = 8;

    pub fn two_buyer(k: u32) -> Self {
        Self { k, variant: HardStaticVariant::TwoBuyer, m: None, buyers: None, c_scale: 1.0 }
    }

    pub fn x(&self) -> f64 {
        2f64.powi(self.k as i32)
    }

    pub fn y(&self) -> f64 {
        0.5
    }

    pub fn c(&self) -> f64 {
        self.c_scale / self.x()
    }

    fn log_n0(&self) -> u32 {
        9 * self.k * self.k
    }

    pub fn n0(&self) -> u128 {
        1u128 << self.log_n0()
    }

    /// Number of sets, `6k + 3`.
    pub fn n_sets(&self) -> usize {
        6 * self.k as usize + 3
    }

    /// `|S_i|`.
    pub fn set_size(&self, i: usize) -> u128 {
        1u128 << (self.log_n0() - self.k * i as u32)
    }

    /// `|S'_i|`.
    pub fn high_size(&self, i: usize) -> u128 {
        1u128 << (self.log_n0() - self.k * (i as u32 + 1))
    }

    /// Effective `m` for the multi-buyer variants.
    pub fn m_value(&self) -> usize {
        match self.variant {
            HardStaticVariant::TwoBuyer => 2,
            HardStaticVariant::RandomOrderClone => self.m.unwrap_or_else(|| (self.x().sqrt().ceil() as usize).max(2)),
            _ => self.m.unwrap_or(2),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 || 9 * self.k * self.k > 127 {
            return Err(domain(format!("hard static instance needs 1 <= k <= 3 (n_0 = 2^(9k^2) units), got k={}", self.k)));
        }
        if !(self.c_scale > 0.0 && self.c_scale.is_finite()) {
            return Err(domain("c_scale must be positive"));
        }
        let m = self.m_value();
        match self.variant {
            HardStaticVariant::TwoBuyer => {}
            HardStaticVariant::RandomOrderClone if m < 2 => return Err(domain("clone variant needs m >= 2")),
            HardStaticVariant::ReplicatedSellerOrder | HardStaticVariant::IdenticalBuyers
                if !(2..=Self::MAX_REPLICAS).contains(&m) =>
            {
                return Err(domain(format!("replicated variants need 2 <= m <= {}, got {m}", Self::MAX_REPLICAS)))
            }
            _ => {}
        }
        if self.buyers == Some(0) {
            return Err(domain("buyers must be at least 1"));
        }
        Ok(())
    }
}

/// Group indices of one copy of the sets.
struct Copy {
    high: Vec<GroupIndex>,
    rest: Vec<GroupIndex>,
}

struct Builder<'a> {
    p: &'a HardStaticParams,
    groups: Vec<ItemGroup>,
}

impl Builder<'_> {
    fn add(&mut self, id: String, count: u128) -> GroupIndex {
        self.groups.push(ItemGroup::new(id, count));
        self.groups.len() - 1
    }

    fn originals(&mut self, prefix: &str) -> Copy {
        let mut high = Vec::new();
        let mut rest = Vec::new();
        for i in 0..self.p.n_sets() {
            high.push(self.add(format!("{prefix}s{i}.hi"), self.p.high_size(i)));
            rest.push(self.add(format!("{prefix}s{i}.lo"), self.p.set_size(i) - self.p.high_size(i)));
        }
        Copy { high, rest }
    }

    fn shadow(&mut self, prefix: &str) -> Vec<GroupIndex> {
        (0..self.p.n_sets())
            .map(|i| self.add(format!("{prefix}s{i}.hi"), self.p.high_size(i)))
            .collect()
    }
}

/// Buyer A's three components over the high subsets `high`.
fn role_a(p: &HardStaticParams, high: &[GroupIndex]) -> Vec<Component> {
    (0..3)
        .map(|r| {
            Component::new((r..p.n_sets()).step_by(3).map(|i| {
                let total = p.c() * p.y().powi(i as i32);
                (high[i], total / p.high_size(i) as f64)
            }))
            .expect("positive finite values")
        })
        .collect()
}

fn role_b(p: &HardStaticParams, copy: &Copy) -> Vec<Component> {
    let y = p.y();
    (0..3)
        .map(|r| {
            Component::new((r..p.n_sets()).step_by(3).flat_map(|i| {
                let yi = y.powi(i as i32);
                let hi = (yi - yi * y) / p.high_size(i) as f64;
                let lo = yi * y / (p.set_size(i) - p.high_size(i)) as f64;
                [(copy.high[i], hi), (copy.rest[i], lo)]
            }))
            .expect("positive finite values")
        })
        .collect()
}

/// A clone: buyer A's components on the shared sets, then on its own shadow.
fn role_clone(p: &HardStaticParams, copy: &Copy, shadow: &[GroupIndex]) -> Vec<Component> {
    let mut c = role_a(p, &copy.high);
    c.extend(role_a(p, shadow));
    c
}

/// Build the instance described by `params`.
pub fn gen_hard_static(params: &HardStaticParams) -> Result<Instance> {
    params.validate()?;
    let p = params;
    let mut b = Builder { p, groups: Vec::new() };
    let arc = |c: Vec<Component>| Ok::<_, Error>(Arc::new(Valuation::Xos(Components::list(c)?)));
    let buyers: Vec<Buyer> = match p.variant {
        HardStaticVariant::TwoBuyer => {
            let copy = b.originals("");
            vec![
                Buyer { id: "b1".into(), valuation: arc(role_a(p, &copy.high))? },
                Buyer { id: "b2".into(), valuation: arc(role_b(p, &copy))? },
            ]
        }
        HardStaticVariant::RandomOrderClone => {
            let m = p.m_value();
            let copy = b.originals("");
            let mut buyers = vec![Buyer { id: "special".into(), valuation: arc(role_b(p, &copy))? }];
            for q in 1..m {
                let shadow = b.shadow(&format!("clone{q}/"));
                buyers.push(Buyer { id: format!("clone{q}"), valuation: arc(role_clone(p, &copy, &shadow))? });
            }
            buyers
        }
        HardStaticVariant::ReplicatedSellerOrder | HardStaticVariant::IdenticalBuyers => {
            let m = p.m_value();
            // blocks[q][r]: buyer q's components inside replica r
            let mut blocks: Vec<Vec<Components>> = vec![Vec::new(); m];
            for r in 0..m {
                let copy = b.originals(&format!("r{r}/"));
                for (q, row) in blocks.iter_mut().enumerate() {
                    let comps = if q == r {
                        role_b(p, &copy)
                    } else {
                        let shadow = b.shadow(&format!("r{r}/b{q}/"));
                        role_clone(p, &copy, &shadow)
                    };
                    row.push(Components::list(comps)?);
                }
            }
            let roles = blocks.into_iter().map(Components::product).collect::<Result<Vec<_>>>()?;
            if p.variant == HardStaticVariant::ReplicatedSellerOrder {
                roles
                    .into_iter()
                    .enumerate()
                    .map(|(q, t)| Buyer { id: format!("b{q}"), valuation: Arc::new(Valuation::Xos(t)) })
                    .collect()
            } else {
                let shared = Arc::new(Valuation::Xos(Components::union(roles)?));
                (0..p.buyers.unwrap_or(m))
                    .map(|q| Buyer { id: format!("b{q}"), valuation: shared.clone() })
                    .collect()
            }
        }
    };
    let meta = Metadata::new("hard_static", serde_json::to_value(p)?);
    Instance::new(b.groups, buyers, Some(hard_static_known_opt(p)?), meta)
}

/// Welfare of the construction's reference allocation.
///
/// Two buyers: the best of giving B one residue class and A another, or
/// splitting one class. Replicated variants: in every replica the B-type
/// buyer takes the class-0 sets and each other buyer its class-0 shadow.
pub fn hard_static_known_opt(p: &HardStaticParams) -> Result<f64> {
    p.validate()?;
    let (y, c) = (p.y(), p.c());
    let w = |r: usize| (r..p.n_sets()).step_by(3).map(|j| y.powi(j as i32)).sum::<f64>();
    let m = p.m_value() as f64;
    Ok(match p.variant {
        HardStaticVariant::TwoBuyer => {
            let mut best = 0f64;
            for ra in 0..3 {
                for rb in 0..3 {
                    best = best.max(if ra == rb { w(ra) * (c.max(1.0 - y) + y) } else { w(rb) + c * w(ra) });
                }
            }
            best
        }
        HardStaticVariant::RandomOrderClone => w(0) * (1.0 + (m - 1.0) * c),
        HardStaticVariant::ReplicatedSellerOrder => m * w(0) * (1.0 + (m - 1.0) * c),
        HardStaticVariant::IdenticalBuyers => {
            let buyers = p.buyers.unwrap_or(p.m_value()) as f64;
            buyers.min(m) * w(0) * (1.0 + (m - 1.0) * c)
        }
    })
}

/// Exact crossover prices for one `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub i: usize,
    /// `p|T_{i+1}| = 1/X`
    pub c_next: f64,
    /// `u_A(T'_{i+1}) = u_A(T'_i)`
    pub a: f64,
    /// `u_B(T_{i+1} \ T'_{i+1}) = u_B(T_i)`
    pub b: f64,
    /// `p|T_i| = 1/X`
    pub c: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub k: u32,
    pub c_scale: f64,
    pub rows: Vec<ThresholdRow>,
    pub failing: Vec<usize>,
    pub passed: bool,
}

/// Solve the threshold chain `c_{i+1} > a_i > b_i > c_i` for `i < k` on the
/// two-buyer core, where `T_i` is the union of `S_j` for `j >= i`,
/// `j = i (mod 3)`.
pub fn validate_hard_static(params: &HardStaticParams) -> Result<ValidationReport> {
    let p = HardStaticParams { variant: HardStaticVariant::TwoBuyer, m: None, buyers: None, ..params.clone() };
    let inst = gen_hard_static(&p)?;
    let (va, vb) = (&inst.buyers()[0].valuation, &inst.buyers()[1].valuation);
    let n = inst.n_groups();
    // group 2i is S'_i, 2i+1 is S_i \ S'_i
    let set = |i: usize, high: bool, rest: bool| {
        let mut b = Bundle::empty(n);
        for j in (i..p.n_sets()).step_by(3) {
            if high {
                b.set(2 * j, inst.groups()[2 * j].count);
            }
            if rest {
                b.set(2 * j + 1, inst.groups()[2 * j + 1].count);
            }
        }
        b
    };
    let size = |b: &Bundle| b.total_units();
    let x = p.x();
    let mut rows = Vec::new();
    for i in 0..p.k as usize {
        let (t_hi, t_hi1) = (set(i, true, false), set(i + 1, true, false));
        let (t, t1) = (set(i, true, true), set(i + 1, true, true));
        let t1_rest = set(i + 1, false, true);
        let a = (va.value(&t_hi)? - va.value(&t_hi1)?) / (size(&t_hi) - size(&t_hi1)) as f64;
        let b = (vb.value(&t)? - vb.value(&t1_rest)?) / (size(&t) - size(&t1_rest)) as f64;
        let c = 1.0 / (x * size(&t) as f64);
        let c_next = 1.0 / (x * size(&t1) as f64);
        rows.push(ThresholdRow { i, c_next, a, b, c, holds: c_next > a && a > b && b > c });
    }
    let failing: Vec<usize> = rows.iter().filter(|r| !r.holds).map(|r| r.i).collect();
    Ok(ValidationReport { k: p.k, c_scale: p.c_scale, passed: failing.is_empty(), rows, failing })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k1_sizes() {
        let inst = gen_hard_static(&HardStaticParams::two_buyer(1)).unwrap();
        assert_eq!(inst.n_groups(), 18);
        assert_eq!(inst.total_units(), (0..9).map(|i| 512u128 >> i).sum::<u128>());
    }

    #[test]
    fn k3_fits() {
        let inst = gen_hard_static(&HardStaticParams::two_buyer(3)).unwrap();
        assert_eq!(inst.groups()[0].count, 1u128 << 78);
        assert!(gen_hard_static(&HardStaticParams::two_buyer(4)).is_err());
    }

    #[test]
    fn chain_outcomes() {
        // c = 1/X is outside the working window for every k
        for k in 1..=3 {
            assert!(!validate_hard_static(&HardStaticParams::two_buyer(k)).unwrap().passed, "k={k}");
        }
        let good = HardStaticParams { c_scale: 1.5, ..HardStaticParams::two_buyer(3) };
        assert!(validate_hard_static(&good).unwrap().passed);
        let off = HardStaticParams { c_scale: 2.0, ..HardStaticParams::two_buyer(3) };
        assert!(!validate_hard_static(&off).unwrap().passed);
    }
}
