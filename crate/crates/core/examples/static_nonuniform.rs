//! Both branches of the random static per-item pricing.

use pricelab::instances::{gen_random_xos_with, RandomXosParams};
use pricelab::market::{expected_revenue, EvalConfig, OrderModel};
use pricelab::random::SeededChooser;
use pricelab::strategies::{nonuniform_ladder, sample_branch_b, PublicInfo, StrategySpec};
use pricelab::welfare::opt_xos;

fn main() -> pricelab::error::Result<()> {
    let inst = gen_random_xos_with(&RandomXosParams { n: 4, m: 2, l: 2, units_per_group: 50, seed: 5, ..RandomXosParams::default() })?;
    let opt = opt_xos(&inst)?.opt;
    let info = PublicInfo::for_instance(&inst, opt)?;
    let lad = nonuniform_ladder(&info);
    println!("k={}, uniform branch {:?}", lad.k, lad.branch_a);
    let draw = sample_branch_b(&info, &inst.full_bundle(), &mut SeededChooser::new(1))?;
    println!("one per-unit draw: {draw:?}");
    let e = expected_revenue(&inst, &StrategySpec::StaticNonuniform, &info, &OrderModel::UniformRandom, &EvalConfig::monte_carlo(2000, 1))?;
    println!("OPT {opt:.3}, E[R] {:.3} ± {:.3}", e.mean, e.std_error);
    Ok(())
}
