//! Uniform price sweep on the two-buyer hard instance, and its threshold chain.

use pricelab::demand::TieBreakPolicy;
use pricelab::instances::{gen_hard_static, validate_hard_static, HardStaticParams};
use pricelab::market::sweep_uniform_prices;

fn main() -> pricelab::error::Result<()> {
    for k in 1..=3 {
        let p = HardStaticParams::two_buyer(k);
        let inst = gen_hard_static(&p)?;
        let opt = inst.known_opt().unwrap_or(f64::NAN);
        let s = sweep_uniform_prices(&inst, &[0, 1], TieBreakPolicy::STRICT)?;
        let chain = validate_hard_static(&p)?;
        println!(
            "k={k}: {} units, OPT {opt:.4}, best uniform revenue {:.4} (bound {:.4}), chain failing at {:?}",
            inst.total_units(),
            s.supremum,
            4.0 * opt / p.x(),
            chain.failing
        );
    }
    Ok(())
}
