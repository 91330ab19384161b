//! Optimal social welfare.

use crate::error::{Error, Result};
use crate::instances::{harmonic_number, hard_static_known_opt, HardDynamicParams, HardStaticParams, HardStaticVariant, Instance};
use crate::num::definitely_greater;
use crate::valuation::{value, Bundle, Valuation};
use serde::Serialize;
use std::collections::BTreeMap;

/// Largest search space the exhaustive methods accept.
pub const MAX_BRANCHES: f64 = 1e7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WelfareMethod {
    Bruteforce,
    XosExact,
    Analytic,
}

/// One buyer's share of an allocation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AllocationEntry {
    pub buyer: String,
    #[serde(rename = "bundle")]
    pub counts: BTreeMap<String, u128>,
    #[serde(skip)]
    pub bundle: Bundle,
}

/// A welfare value and an allocation achieving it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WelfareReport {
    pub opt: f64,
    pub method: WelfareMethod,
    /// buyers with non-empty bundles
    pub allocation: Vec<AllocationEntry>,
}

impl WelfareReport {
    fn new(inst: &Instance, opt: f64, method: WelfareMethod, bundles: Vec<Bundle>) -> Self {
        let allocation = bundles
            .into_iter()
            .enumerate()
            .filter(|(_, b)| !b.is_empty())
            .map(|(i, bundle)| AllocationEntry { buyer: inst.buyers()[i].id.clone(), counts: inst.bundle_map(&bundle), bundle })
            .collect();
        Self { opt, method, allocation }
    }

    /// Sum of the buyers' values for their bundles.
    pub fn allocation_value(&self, inst: &Instance) -> Result<f64> {
        self.allocation
            .iter()
            .map(|a| {
                let i = inst.buyer_index(&a.buyer).ok_or_else(|| Error::Domain(format!("unknown buyer {}", a.buyer)))?;
                value(&inst.buyers()[i].valuation, &a.bundle)
            })
            .sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Exhaustive search over every way to split each group among the buyers
/// and the seller. Needs `(m+1)^n <= 10^7` for `n` units.
pub fn opt_bruteforce(inst: &Instance) -> Result<WelfareReport> {
    let m = inst.m();
    let n = inst.total_units();
    if (m as f64 + 1.0).powf(n as f64) > MAX_BRANCHES {
        return Err(Error::Capacity(format!("brute force needs (m+1)^n <= 1e7, got m={m}, n={n}")));
    }
    let mut search = Search {
        inst,
        counts: inst.groups().iter().map(|g| g.count).collect(),
        current: vec![Bundle::empty(inst.n_groups()); m],
        best: -1.0,
        best_alloc: Vec::new(),
    };
    search.group(0)?;
    let opt = search.best.max(0.0);
    let alloc = if search.best_alloc.is_empty() { vec![Bundle::empty(inst.n_groups()); m] } else { search.best_alloc };
    Ok(WelfareReport::new(inst, opt, WelfareMethod::Bruteforce, alloc))
}

struct Search<'a> {
    inst: &'a Instance,
    counts: Vec<u128>,
    current: Vec<Bundle>,
    best: f64,
    best_alloc: Vec<Bundle>,
}

impl Search<'_> {
    fn group(&mut self, g: usize) -> Result<()> {
        if g == self.counts.len() {
            let mut w = 0.0;
            for (b, bundle) in self.inst.buyers().iter().zip(&self.current) {
                w += value(&b.valuation, bundle)?;
            }
            if self.best < 0.0 || definitely_greater(w, self.best) {
                self.best = w;
                self.best_alloc = self.current.clone();
            }
            return Ok(());
        }
        self.split(g, 0, self.counts[g])
    }

    /// Give some of the `left` units of `g` to buyer `i`, the rest onward.
    fn split(&mut self, g: usize, i: usize, left: u128) -> Result<()> {
        if i == self.current.len() {
            // units still left stay unsold
            return self.group(g + 1);
        }
        for q in 0..=left {
            self.current[i].set(g, q);
            self.split(g, i + 1, left - q)?;
        }
        self.current[i].set(g, 0);
        Ok(())
    }
}

/// Dense additive components of one buyer.
fn dense_components(v: &Valuation, n_groups: usize, allowed: Option<&[usize]>) -> Result<Vec<(usize, Vec<f64>)>> {
    let count = v.component_count().ok_or_else(|| Error::InvalidValuation("welfare by components needs additive or XOS buyers".into()))?;
    let idx: Vec<usize> = match allowed {
        Some(a) => a.to_vec(),
        None => (0..count).collect(),
    };
    idx.into_iter()
        .map(|c| {
            let comp = v.component(c).ok_or_else(|| Error::Domain(format!("component {c} out of range")))?;
            let mut d = vec![0.0; n_groups];
            for &(g, a) in comp.entries() {
                if g < n_groups {
                    d[g] = a;
                }
            }
            Ok((c, d))
        })
        .collect()
}

/// Exact optimum for additive and XOS buyers: the best over all component
/// choices `z` of giving every unit to the buyer whose chosen component
/// values it most. Needs the product of the component counts <= 10^7.
pub fn opt_xos(inst: &Instance) -> Result<WelfareReport> {
    opt_xos_restricted(inst, None)
}

/// As `opt_xos` with buyer `i` limited to the components in `allowed[i]`.
/// With restrictions the result is a lower bound on the optimum.
pub fn opt_xos_restricted(inst: &Instance, allowed: Option<&[Vec<usize>]>) -> Result<WelfareReport> {
    let m = inst.m();
    let ng = inst.n_groups();
    if let Some(a) = allowed {
        if a.len() != m || a.iter().any(|x| x.is_empty()) {
            return Err(Error::Config("restricted components need a non-empty list per buyer".into()));
        }
    }
    let mut space = 1f64;
    for (i, b) in inst.buyers().iter().enumerate() {
        let l = match allowed {
            Some(a) => a[i].len(),
            None => b.valuation.component_count().ok_or_else(|| {
                Error::InvalidValuation(format!("buyer {} is not XOS", b.id))
            })?,
        };
        space *= l as f64;
    }
    if space > MAX_BRANCHES {
        return Err(Error::Capacity(format!("component tuple space {space:e} exceeds 1e7")));
    }
    let comps = inst
        .buyers()
        .iter()
        .enumerate()
        .map(|(i, b)| dense_components(&b.valuation, ng, allowed.map(|a| a[i].as_slice())))
        .collect::<Result<Vec<_>>>()?;
    let counts: Vec<f64> = inst.groups().iter().map(|g| g.count as f64).collect();
    let mut z = vec![0usize; m];
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        let mut w = 0.0;
        for g in 0..ng {
            let top = (0..m).map(|i| comps[i][z[i]].1[g]).fold(0.0, f64::max);
            w += counts[g] * top;
        }
        if best.as_ref().is_none_or(|b| definitely_greater(w, b.0)) {
            best = Some((w, z.clone()));
        }
        // odometer, last buyer fastest
        let mut i = m;
        loop {
            if i == 0 {
                let (opt, z) = best.unwrap_or((0.0, vec![]));
                let mut alloc = vec![Bundle::empty(ng); m];
                for g in 0..ng {
                    let mut who = None;
                    let mut top = 0.0;
                    for i in 0..m {
                        let a = comps[i][z[i]].1[g];
                        if a > top {
                            top = a;
                            who = Some(i);
                        }
                    }
                    if let Some(i) = who {
                        alloc[i].set(g, inst.groups()[g].count);
                    }
                }
                return Ok(WelfareReport::new(inst, opt, WelfareMethod::XosExact, alloc));
            }
            i -= 1;
            z[i] += 1;
            if z[i] < comps[i].len() {
                break;
            }
            z[i] = 0;
        }
    }
}

/// Closed-form welfare of the generator's reference allocation: exact for
/// harmonic instances, a lower bound for the hard families.
pub fn opt_analytic(inst: &Instance) -> Result<WelfareReport> {
    let meta = inst.metadata();
    let ng = inst.n_groups();
    let m = inst.m();
    let mut alloc = vec![Bundle::empty(ng); m];
    let opt = match meta.generator.as_str() {
        "harmonic" => {
            let n = meta.params.get("n").and_then(|v| v.as_u64()).ok_or_else(|| Error::Config("harmonic metadata lacks n".into()))?;
            alloc[0] = inst.full_bundle();
            harmonic_number(n as usize)
        }
        "hard_dynamic" => {
            let p: HardDynamicParams = serde_json::from_value(meta.params.clone())?;
            for (i, a) in alloc.iter_mut().enumerate() {
                for j in 0..=p.k {
                    let g = p.group(i, j, true);
                    a.set(g, inst.groups()[g].count);
                }
            }
            p.m as f64 * p.f as f64 * ((p.k + 1) * (p.k + 2)) as f64 / 2.0
        }
        "hard_static" => {
            let p: HardStaticParams = serde_json::from_value(meta.params.clone())?;
            if p.variant == HardStaticVariant::TwoBuyer {
                alloc = two_buyer_allocation(inst, &p)?;
            } else {
                alloc.clear();
            }
            hard_static_known_opt(&p)?
        }
        g => return Err(Error::Config(format!("no closed-form welfare for generator {g:?}"))),
    };
    Ok(WelfareReport::new(inst, opt, WelfareMethod::Analytic, alloc))
}

/// The best allocation among those giving each buyer whole residue classes.
fn two_buyer_allocation(inst: &Instance, p: &HardStaticParams) -> Result<Vec<Bundle>> {
    let ng = inst.n_groups();
    let count = |g: usize| inst.groups()[g].count;
    let mut best: Option<(f64, Vec<Bundle>)> = None;
    for ra in 0..3 {
        for rb in 0..3 {
            for a_takes_high in [false, true] {
                let mut a = Bundle::empty(ng);
                let mut b = Bundle::empty(ng);
                for i in 0..p.n_sets() {
                    let (hi, lo) = (2 * i, 2 * i + 1);
                    if i % 3 == rb {
                        b.set(lo, count(lo));
                        if !(ra == rb && a_takes_high) {
                            b.set(hi, count(hi));
                        }
                    }
                    if i % 3 == ra && (ra != rb || a_takes_high) {
                        a.set(hi, count(hi));
                    }
                }
                let w = value(&inst.buyers()[0].valuation, &a)? + value(&inst.buyers()[1].valuation, &b)?;
                if best.as_ref().is_none_or(|x| definitely_greater(w, x.0)) {
                    best = Some((w, vec![a, b]));
                }
            }
        }
    }
    Ok(best.expect("nine class pairs").1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_harmonic, gen_hard_static, gen_random_xos};

    #[test]
    fn harmonic_four() {
        let inst = gen_harmonic(4).unwrap();
        let r = opt_bruteforce(&inst).unwrap();
        assert!((r.opt - 25.0 / 12.0).abs() < 1e-12);
        assert!((opt_analytic(&inst).unwrap().opt - r.opt).abs() < 1e-12);
    }

    #[test]
    fn xos_matches_bruteforce() {
        for seed in 0..20 {
            let inst = gen_random_xos(6, 2, 2, 1.0, seed).unwrap();
            let a = opt_bruteforce(&inst).unwrap();
            let b = opt_xos(&inst).unwrap();
            assert!((a.opt - b.opt).abs() <= 1e-9 * a.opt.max(1.0), "seed {seed}");
            assert!((b.allocation_value(&inst).unwrap() - b.opt).abs() <= 1e-9 * b.opt.max(1.0));
        }
    }

    #[test]
    fn two_buyer_allocation_matches_formula() {
        let inst = gen_hard_static(&HardStaticParams::two_buyer(1)).unwrap();
        let r = opt_analytic(&inst).unwrap();
        let v = r.allocation_value(&inst).unwrap();
        assert!((v - r.opt).abs() <= 1e-9 * r.opt);
        assert!(opt_xos(&inst).unwrap().opt >= r.opt * (1.0 - 1e-12));
    }

    #[test]
    fn report_json() {
        let inst = gen_harmonic(2).unwrap();
        let j: serde_json::Value = serde_json::from_str(&opt_bruteforce(&inst).unwrap().to_json().unwrap()).unwrap();
        assert_eq!(j["method"], "bruteforce");
        assert_eq!(j["allocation"][0]["buyer"], "b0");
        assert_eq!(j["allocation"][0]["bundle"]["i1"], 1);
    }
}
