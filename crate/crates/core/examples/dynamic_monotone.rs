//! The decreasing price schedule, averaged over every arrival order.

use pricelab::instances::{gen_random_xos_with, RandomXosParams};
use pricelab::market::{expected_revenue, EvalConfig, OrderModel};
use pricelab::strategies::{PublicInfo, StrategySpec};
use pricelab::valuation::Bundle;
use pricelab::welfare::opt_xos;

fn main() -> pricelab::error::Result<()> {
    let inst = gen_random_xos_with(&RandomXosParams { n: 8, m: 6, l: 2, seed: 3, ..RandomXosParams::default() })?;
    let opt = opt_xos(&inst)?.opt;
    let info = PublicInfo::for_instance(&inst, opt)?;
    let mut s = StrategySpec::DynamicMonotone.instantiate(&info, 0)?;
    let unsold = Bundle::from_counts(vec![1; inst.n_groups()]);
    for t in 0..inst.m() {
        println!("round {t}: price {:.4}", s.next_prices(t, &unsold)?.min_price());
    }
    let e = expected_revenue(&inst, &StrategySpec::DynamicMonotone, &info, &OrderModel::UniformRandom, &EvalConfig::exact())?;
    println!("OPT {opt:.4}, E[R] over {} orders {:.4}", e.per_order.len(), e.mean);
    Ok(())
}
