use super::{Buyer, Instance, Metadata};
use crate::error::{domain, Result};
use crate::valuation::{Component, Components, ExplicitTable, ItemGroup, Valuation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::sync::Arc;

/// `H_n = 1 + 1/2 + .. + 1/n`.
pub fn harmonic_number(n: usize) -> f64 {
    (1..=n).map(|i| 1.0 / i as f64).sum()
}

/// One buyer over `n` single items with `v(S) = H_|S|`.
pub fn gen_harmonic(n: usize) -> Result<Instance> {
    if !(1..=ExplicitTable::MAX_ITEMS).contains(&n) {
        return Err(domain(format!("harmonic instance needs 1 <= n <= 20, got {n}")));
    }
    let by_size: Vec<f64> = (0..=n).map(harmonic_number).collect();
    let groups = (0..n).map(|i| ItemGroup::new(format!("i{i}"), 1)).collect();
    let v = Valuation::Explicit(ExplicitTable::from_cardinality((0..n).collect(), by_size)?);
    Instance::new(
        groups,
        vec![Buyer { id: "b0".into(), valuation: Arc::new(v) }],
        Some(harmonic_number(n)),
        Metadata::new("harmonic", json!({ "n": n })),
    )
}

/// Random XOS family. Each per-item value is, independently with
/// probability `density`, uniform on `[0, value_scale)`, and zero otherwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomXosParams {
    /// number of groups
    pub n: usize,
    pub m: usize,
    pub l: usize,
    pub value_scale: f64,
    pub density: f64,
    pub units_per_group: u128,
    /// every buyer gets the first buyer's valuation
    pub identical: bool,
    pub seed: u64,
}

impl Default for RandomXosParams {
    fn default() -> Self {
        Self { n: 8, m: 2, l: 2, value_scale: 1.0, density: 1.0, units_per_group: 1, identical: false, seed: 0 }
    }
}

pub fn gen_random_xos(n: usize, m: usize, l: usize, value_scale: f64, seed: u64) -> Result<Instance> {
    gen_random_xos_with(&RandomXosParams { n, m, l, value_scale, seed, ..Default::default() })
}

pub fn gen_random_xos_with(p: &RandomXosParams) -> Result<Instance> {
    if p.n == 0 || p.m == 0 || p.l == 0 {
        return Err(domain("random XOS needs n, m, l >= 1"));
    }
    if !(p.value_scale > 0.0 && p.value_scale.is_finite()) || !(0.0..=1.0).contains(&p.density) || p.units_per_group == 0 {
        return Err(domain("random XOS needs value_scale > 0, density in [0, 1], units >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let draw = |rng: &mut ChaCha8Rng| -> Result<Valuation> {
        let comps = (0..p.l)
            .map(|_| {
                let dense: Vec<f64> = (0..p.n)
                    .map(|_| {
                        let keep = rng.random::<f64>() < p.density;
                        let a = rng.random::<f64>() * p.value_scale;
                        if keep { a } else { 0.0 }
                    })
                    .collect();
                Component::from_dense(&dense)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(if p.l == 1 {
            Valuation::Additive(comps.into_iter().next().expect("one component"))
        } else {
            Valuation::Xos(Components::list(comps)?)
        })
    };
    let mut buyers: Vec<Buyer> = Vec::new();
    for i in 0..p.m {
        let v = match buyers.first() {
            Some(b) if p.identical => b.valuation.clone(),
            _ => Arc::new(draw(&mut rng)?),
        };
        buyers.push(Buyer { id: format!("b{i}"), valuation: v });
    }
    let groups = (0..p.n).map(|g| ItemGroup::new(format!("g{g}"), p.units_per_group)).collect();
    Instance::new(groups, buyers, None, Metadata::new("random_xos", serde_json::to_value(p)?))
}
