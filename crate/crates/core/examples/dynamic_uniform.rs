//! Exact expected revenue of the dynamic uniform ladder against the adversarial order.

use pricelab::instances::{gen_random_xos_with, RandomXosParams};
use pricelab::market::{adversarial_order, EvalConfig};
use pricelab::num::ceil_log2;
use pricelab::strategies::{PublicInfo, StrategySpec};
use pricelab::welfare::opt_xos;

fn main() -> pricelab::error::Result<()> {
    let inst = gen_random_xos_with(&RandomXosParams { n: 16, m: 4, l: 3, seed: 7, ..RandomXosParams::default() })?;
    let opt = opt_xos(&inst)?.opt;
    let info = PublicInfo::for_instance(&inst, opt)?;
    let (order, e) = adversarial_order(&inst, &StrategySpec::DynamicUniform, &info, &EvalConfig::exact())?;
    let k = (ceil_log2(inst.total_units()) + 1) as f64;
    println!("OPT {opt:.4}, worst order {order:?}, E[R] {:.4}", e.mean);
    println!("E[R] / (OPT / (4(k+1)^2)) = {:.2}", e.mean / (opt / (4.0 * (k + 1.0) * (k + 1.0))));
    Ok(())
}
