//! Market instances, their JSON form, and generators.

mod hard_dynamic;
mod hard_static;
mod random;

pub use hard_dynamic::{gen_hard_dynamic, hard_dynamic_f, HardDynamicParams};
pub use hard_static::{
    gen_hard_static, hard_static_known_opt, validate_hard_static, HardStaticParams, HardStaticVariant,
    ThresholdRow, ValidationReport,
};
pub use random::{gen_harmonic, gen_random_xos, gen_random_xos_with, harmonic_number, RandomXosParams};

use crate::error::{domain, Error, Result};
use crate::valuation::{Bundle, Component, Components, ExplicitTable, GroupIndex, ItemGroup, Valuation};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::Arc;

/// A buyer and its valuation. Identical buyers share one `Arc`.
#[derive(Clone, Debug, PartialEq)]
pub struct Buyer {
    pub id: String,
    pub valuation: Arc<Valuation>,
}

/// Which generator produced an instance, and with what parameters.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub generator: String,
    #[serde(default)]
    pub params: serde_json::Value,
}

impl Metadata {
    pub fn new(generator: impl Into<String>, params: serde_json::Value) -> Self {
        Self { generator: generator.into(), params }
    }
}

/// Groups of items, an ordered list of buyers, and optional known OPT.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    groups: Vec<ItemGroup>,
    buyers: Vec<Buyer>,
    known_opt: Option<f64>,
    metadata: Metadata,
}

impl Instance {
    /// Checks ids are unique and valuations reference declared groups only.
    pub fn new(groups: Vec<ItemGroup>, buyers: Vec<Buyer>, known_opt: Option<f64>, metadata: Metadata) -> Result<Self> {
        let mut ids = HashMap::new();
        for (i, g) in groups.iter().enumerate() {
            if ids.insert(g.id.as_str(), i).is_some() {
                return Err(domain(format!("duplicate group id {:?}", g.id)));
            }
        }
        let mut bids = std::collections::HashSet::new();
        for b in &buyers {
            if !bids.insert(b.id.as_str()) {
                return Err(domain(format!("duplicate buyer id {:?}", b.id)));
            }
            if let Some(g) = b.valuation.max_group() {
                if g >= groups.len() {
                    return Err(domain(format!("buyer {:?} references undeclared group {g}", b.id)));
                }
            }
            if let Valuation::Explicit(t) = b.valuation.as_ref() {
                for &g in t.items() {
                    if groups[g].count > 1 {
                        return Err(domain(format!(
                            "explicit buyer {:?} needs single-unit groups; {:?} has {} units",
                            b.id, groups[g].id, groups[g].count
                        )));
                    }
                }
            }
        }
        if let Some(o) = known_opt {
            if !o.is_finite() || o < 0.0 {
                return Err(domain(format!("known_opt must be finite and non-negative, got {o}")));
            }
        }
        Ok(Self { groups, buyers, known_opt, metadata })
    }

    pub fn groups(&self) -> &[ItemGroup] {
        &self.groups
    }

    pub fn buyers(&self) -> &[Buyer] {
        &self.buyers
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    /// Number of buyers.
    pub fn m(&self) -> usize {
        self.buyers.len()
    }

    /// Total number of units `n`.
    pub fn total_units(&self) -> u128 {
        self.groups.iter().map(|g| g.count).sum()
    }

    pub fn full_bundle(&self) -> Bundle {
        Bundle::from_counts(self.groups.iter().map(|g| g.count).collect())
    }

    pub fn known_opt(&self) -> Option<f64> {
        self.known_opt
    }

    pub fn metadata(&self) -> &Metadata {
        &self.metadata
    }

    pub fn group_index(&self, id: &str) -> Option<GroupIndex> {
        self.groups.iter().position(|g| g.id == id)
    }

    pub fn buyer_index(&self, id: &str) -> Option<usize> {
        self.buyers.iter().position(|b| b.id == id)
    }

    /// Do all buyers have the same valuation?
    pub fn identical_buyers(&self) -> bool {
        self.buyers.windows(2).all(|w| Arc::ptr_eq(&w[0].valuation, &w[1].valuation) || w[0].valuation == w[1].valuation)
    }

    /// `{group id: count}` for the non-zero entries of `b`.
    pub fn bundle_map(&self, b: &Bundle) -> BTreeMap<String, u128> {
        b.iter().map(|(g, q)| (self.groups[g].id.clone(), q)).collect()
    }

    /// Every group split into single units. Explicit buyers already use
    /// single-unit groups and are carried over unchanged.
    pub fn unit_expanded(&self, max_units: u128) -> Result<(Instance, Vec<GroupIndex>)> {
        if self.total_units() > max_units {
            return Err(Error::Capacity(format!(
                "unit expansion limited to {max_units} units, instance has {}",
                self.total_units()
            )));
        }
        let mut groups = Vec::new();
        let mut owner = Vec::new();
        let mut first = Vec::new();
        for (g, grp) in self.groups.iter().enumerate() {
            first.push(groups.len());
            for u in 0..grp.count {
                groups.push(ItemGroup::new(format!("{}#{u}", grp.id), 1));
                owner.push(g);
            }
        }
        let expand = |c: &Component| {
            Component::new(c.entries().iter().flat_map(|&(g, a)| {
                let start = first[g];
                (0..self.groups[g].count as usize).map(move |u| (start + u, a))
            }))
        };
        fn expand_tree(t: &Components, f: &dyn Fn(&Component) -> Result<Component>) -> Result<Components> {
            Ok(match t {
                Components::List(cs) => Components::List(cs.iter().map(f).collect::<Result<_>>()?),
                Components::Product(xs) => Components::Product(xs.iter().map(|x| expand_tree(x, f)).collect::<Result<_>>()?),
                Components::Union(xs) => Components::Union(xs.iter().map(|x| expand_tree(x, f)).collect::<Result<_>>()?),
            })
        }
        let mut cache: Vec<(*const Valuation, Arc<Valuation>)> = Vec::new();
        let mut buyers = Vec::new();
        for b in &self.buyers {
            let key = Arc::as_ptr(&b.valuation);
            let v = if let Some((_, v)) = cache.iter().find(|(k, _)| *k == key) {
                v.clone()
            } else {
                let v = Arc::new(match b.valuation.as_ref() {
                    Valuation::Additive(c) => Valuation::Additive(expand(c)?),
                    Valuation::Xos(t) => Valuation::Xos(expand_tree(t, &expand)?),
                    Valuation::Explicit(t) => {
                        let items = t.items().iter().map(|&g| first[g]).collect();
                        Valuation::Explicit(match t.by_size() {
                            Some(s) => ExplicitTable::from_cardinality(items, s.to_vec())?,
                            None => ExplicitTable::from_table(items, t.table().to_vec())?,
                        })
                    }
                });
                cache.push((key, v.clone()));
                v
            };
            buyers.push(Buyer { id: b.id.clone(), valuation: v });
        }
        let inst = Instance::new(groups, buyers, self.known_opt, self.metadata.clone())?;
        Ok((inst, owner))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_wire())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: InstanceWire = serde_json::from_str(text)?;
        Self::from_wire(wire)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut s = self.to_json()?;
        s.push('\n');
        std::fs::write(path, s)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn to_wire(&self) -> InstanceWire {
        let id = |g: GroupIndex| self.groups[g].id.clone();
        let comp = |c: &Component| c.entries().iter().map(|&(g, a)| (id(g), a)).collect::<BTreeMap<_, _>>();
        fn tree(t: &Components, comp: &dyn Fn(&Component) -> BTreeMap<String, f64>) -> ComponentsWire {
            match t {
                Components::List(cs) => ComponentsWire::List(cs.iter().map(comp).collect()),
                Components::Product(xs) => ComponentsWire::Product { product: xs.iter().map(|x| tree(x, comp)).collect() },
                Components::Union(xs) => ComponentsWire::Union { union: xs.iter().map(|x| tree(x, comp)).collect() },
            }
        }
        let buyers = self
            .buyers
            .iter()
            .map(|b| BuyerWire {
                id: b.id.clone(),
                valuation: match b.valuation.as_ref() {
                    Valuation::Additive(c) => ValuationWire::Additive { values: comp(c) },
                    Valuation::Xos(t) => ValuationWire::Xos { components: tree(t, &comp) },
                    Valuation::Explicit(t) => ValuationWire::Explicit {
                        items: t.items().iter().map(|&g| id(g)).collect(),
                        table: t.by_size().is_none().then(|| t.table().to_vec()),
                        by_size: t.by_size().map(<[f64]>::to_vec),
                    },
                },
            })
            .collect();
        InstanceWire {
            groups: self.groups.clone(),
            buyers,
            known_opt: self.known_opt,
            metadata: self.metadata.clone(),
        }
    }

    fn from_wire(w: InstanceWire) -> Result<Self> {
        let index: HashMap<&str, GroupIndex> = w.groups.iter().enumerate().map(|(i, g)| (g.id.as_str(), i)).collect();
        let look = |id: &str| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| domain(format!("unknown group id {id:?}")))
        };
        let comp = |m: &BTreeMap<String, f64>| -> Result<Component> {
            Component::new(m.iter().map(|(id, &a)| Ok((look(id)?, a))).collect::<Result<Vec<_>>>()?)
        };
        fn tree(t: &ComponentsWire, comp: &dyn Fn(&BTreeMap<String, f64>) -> Result<Component>) -> Result<Components> {
            match t {
                ComponentsWire::List(cs) => Components::list(cs.iter().map(comp).collect::<Result<_>>()?),
                ComponentsWire::Product { product } => {
                    Components::product(product.iter().map(|x| tree(x, comp)).collect::<Result<_>>()?)
                }
                ComponentsWire::Union { union } => Components::union(union.iter().map(|x| tree(x, comp)).collect::<Result<_>>()?),
            }
        }
        let mut buyers: Vec<Buyer> = Vec::new();
        for b in &w.buyers {
            let v = match &b.valuation {
                ValuationWire::Additive { values } => Valuation::Additive(comp(values)?),
                ValuationWire::Xos { components } => Valuation::Xos(tree(components, &comp)?),
                ValuationWire::Explicit { items, table, by_size } => {
                    let items = items.iter().map(|id| look(id)).collect::<Result<Vec<_>>>()?;
                    Valuation::Explicit(match (table, by_size) {
                        (Some(t), None) => ExplicitTable::from_table(items, t.clone())?,
                        (None, Some(s)) => ExplicitTable::from_cardinality(items, s.clone())?,
                        _ => return Err(domain("explicit valuation needs exactly one of \"table\" or \"by_size\"")),
                    })
                }
            };
            // share equal valuations so identical buyers stay identical
            let v = match buyers.iter().find(|x| *x.valuation == v) {
                Some(x) => x.valuation.clone(),
                None => Arc::new(v),
            };
            buyers.push(Buyer { id: b.id.clone(), valuation: v });
        }
        Instance::new(w.groups, buyers, w.known_opt, w.metadata)
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceWire {
    groups: Vec<ItemGroup>,
    buyers: Vec<BuyerWire>,
    #[serde(default)]
    known_opt: Option<f64>,
    #[serde(default)]
    metadata: Metadata,
}

#[derive(Serialize, Deserialize)]
struct BuyerWire {
    id: String,
    valuation: ValuationWire,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum ValuationWire {
    Additive {
        values: BTreeMap<String, f64>,
    },
    Xos {
        components: ComponentsWire,
    },
    Explicit {
        items: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        table: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        by_size: Option<Vec<f64>>,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ComponentsWire {
    List(Vec<BTreeMap<String, f64>>),
    Product { product: Vec<ComponentsWire> },
    Union { union: Vec<ComponentsWire> },
}

/// Parse a generator spec such as `harmonic:n=4` or `hard-dynamic:k=2,F=81,Y=9,m=18`
/// into its name and `key=value` pairs.
pub fn parse_spec(spec: &str) -> Result<(String, BTreeMap<String, String>)> {
    let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let mut kv = BTreeMap::new();
    for part in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value in {spec:?}, got {part:?}")))?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok((name.trim().to_string(), kv))
}

pub(crate) fn get_param<T: std::str::FromStr>(kv: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    kv.get(key)
        .map(|v| v.parse::<T>().map_err(|_| Error::Parse(format!("bad value {v:?} for {key}"))))
        .transpose()
}

/// Build an instance from a generator spec (`file:<path>` loads JSON).
pub fn from_spec(spec: &str) -> Result<Instance> {
    if let Some(path) = spec.strip_prefix("file:") {
        return Instance::load(path);
    }
    let (name, kv) = parse_spec(spec)?;
    let known: &[&str] = match name.as_str() {
        "harmonic" => &["n"],
        "random-xos" => &["n", "m", "l", "scale", "density", "units", "identical", "seed"],
        "hard-static" => &["k", "variant", "m", "buyers", "c"],
        "hard-dynamic" => &["k", "F", "Y", "m"],
        _ => return Err(Error::Parse(format!("unknown instance generator {name:?}"))),
    };
    if let Some(bad) = kv.keys().find(|k| !known.contains(&k.as_str())) {
        return Err(Error::Parse(format!("unknown parameter {bad:?} for {name}")));
    }
    let need = |key: &str| -> Result<String> {
        kv.get(key).cloned().ok_or_else(|| Error::Parse(format!("{name} needs parameter {key}")))
    };
    match name.as_str() {
        "harmonic" => gen_harmonic(need("n")?.parse().map_err(|_| Error::Parse("bad n".into()))?),
        "random-xos" => {
            let d = RandomXosParams::default();
            gen_random_xos_with(&RandomXosParams {
                n: get_param(&kv, "n")?.unwrap_or(d.n),
                m: get_param(&kv, "m")?.unwrap_or(d.m),
                l: get_param(&kv, "l")?.unwrap_or(d.l),
                value_scale: get_param(&kv, "scale")?.unwrap_or(d.value_scale),
                density: get_param(&kv, "density")?.unwrap_or(d.density),
                units_per_group: get_param(&kv, "units")?.unwrap_or(d.units_per_group),
                identical: get_param(&kv, "identical")?.unwrap_or(d.identical),
                seed: get_param(&kv, "seed")?.unwrap_or(d.seed),
            })
        }
        "hard-static" => {
            let variant = match kv.get("variant").map(String::as_str) {
                None => HardStaticVariant::TwoBuyer,
                Some(v) => v.parse()?,
            };
            gen_hard_static(&HardStaticParams {
                k: need("k")?.parse().map_err(|_| Error::Parse("bad k".into()))?,
                variant,
                m: get_param(&kv, "m")?,
                buyers: get_param(&kv, "buyers")?,
                c_scale: get_param(&kv, "c")?.unwrap_or(1.0),
            })
        }
        "hard-dynamic" => gen_hard_dynamic(&HardDynamicParams {
            k: need("k")?.parse().map_err(|_| Error::Parse("bad k".into()))?,
            f: need("F")?.parse().map_err(|_| Error::Parse("bad F".into()))?,
            y: need("Y")?.parse().map_err(|_| Error::Parse("bad Y".into()))?,
            m: need("m")?.parse().map_err(|_| Error::Parse("bad m".into()))?,
        }),
        _ => unreachable!(),
    }
}
