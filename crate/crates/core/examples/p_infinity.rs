//! The k-phase run on identical buyers and the single pricing derived from it.

use pricelab::demand::TieBreakPolicy;
use pricelab::instances::{gen_random_xos_with, RandomXosParams};
use pricelab::market::simulate;
use pricelab::strategies::{p_infinity_assignment, PublicInfo, StrategySpec};
use pricelab::welfare::opt_xos;
use std::sync::Arc;

fn main() -> pricelab::error::Result<()> {
    let inst = Arc::new(gen_random_xos_with(&RandomXosParams { n: 8, m: 8, l: 3, identical: true, seed: 1, ..RandomXosParams::default() })?);
    let opt = opt_xos(&inst)?.opt;
    let info = PublicInfo::for_instance(&inst, opt)?.with_full_information(inst.clone());
    let (prices, run) = p_infinity_assignment(&info)?;
    println!("phase revenues {:?}, best phase {} at price {}", run.phase_revenues, run.best_phase, run.price);
    println!("posted: {prices:?}");
    let order: Vec<usize> = (0..inst.m()).collect();
    let t = simulate(&inst, &mut StrategySpec::PInfinity.instantiate(&info, 0)?, &order, TieBreakPolicy::STRICT)?;
    println!("replay revenue {:.4}", t.total_revenue);
    Ok(())
}
