//! Instance on which every dynamic uniform strategy earns little.
//!
//! Buyer `i` owns private groups `P_{i,0..k}` and shared groups `S_{i,0..k}`,
//! all of size `Y^j`. Component `j <= k` values `P_{i,j}` at `f(j)` per item;
//! component `k+1` values its own `S_{i,j}` at `f(j)` and every other
//! buyer's `S_{l,j}` at `f(j+1)`, where `f(j) = (j+1) F / Y^j`.

use super::{Buyer, Instance, Metadata};
use crate::error::{domain, Result};
use crate::valuation::{Component, Components, ItemGroup, Valuation};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HardDynamicParams {
    pub k: u32,
    #[serde(rename = "F")]
    pub f: u64,
    #[serde(rename = "Y")]
    pub y: u64,
    pub m: usize,
}

/// `f(j) = (j+1) F / Y^j`.
pub fn hard_dynamic_f(p: &HardDynamicParams, j: u32) -> f64 {
    (j + 1) as f64 * p.f as f64 / (p.y as f64).powi(j as i32)
}

impl HardDynamicParams {
    fn validate(&self) -> Result<()> {
        let (k, y, m) = (self.k as u128, self.y as u128, self.m as u128);
        if !(k > 1 && self.f > 1 && self.y > 4 && m >= 2 * y && 2 * y >= 4 * k) {
            return Err(domain(format!(
                "hard dynamic instance needs k > 1, F > 1, Y > 4 and m >= 2Y >= 4k; got k={}, F={}, Y={}, m={}",
                self.k, self.f, self.y, self.m
            )));
        }
        if (self.y as u128).checked_pow(self.k).is_none() {
            return Err(domain("group size Y^k overflows"));
        }
        Ok(())
    }

    /// Group index of `S_{i,j}` (shared) or `P_{i,j}` (private).
    pub fn group(&self, buyer: usize, j: u32, shared: bool) -> usize {
        let per = 2 * (self.k as usize + 1);
        buyer * per + if shared { 0 } else { self.k as usize + 1 } + j as usize
    }
}

pub fn gen_hard_dynamic(p: &HardDynamicParams) -> Result<Instance> {
    p.validate()?;
    let k = p.k;
    let mut groups = Vec::new();
    for i in 0..p.m {
        for j in 0..=k {
            groups.push(ItemGroup::new(format!("b{i}.shared{j}"), (p.y as u128).pow(j)));
        }
        for j in 0..=k {
            groups.push(ItemGroup::new(format!("b{i}.private{j}"), (p.y as u128).pow(j)));
        }
    }
    let f = |j: u32| hard_dynamic_f(p, j);
    let mut buyers = Vec::new();
    for i in 0..p.m {
        let mut comps: Vec<Component> = (0..=k).map(|j| Component::new([(p.group(i, j, false), f(j))])).collect::<Result<_>>()?;
        let shared = (0..p.m).flat_map(|l| (0..=k).map(move |j| (l, j))).map(|(l, j)| {
            (p.group(l, j, true), if l == i { f(j) } else { f(j + 1) })
        });
        comps.push(Component::new(shared)?);
        buyers.push(Buyer { id: format!("b{i}"), valuation: Arc::new(Valuation::Xos(Components::list(comps)?)) });
    }
    let known = p.m as f64 * p.f as f64 * ((k + 1) * (k + 2)) as f64 / 2.0;
    Instance::new(groups, buyers, Some(known), Metadata::new("hard_dynamic", serde_json::to_value(p)?))
}
