//! Guessing OPT from a bounded power-of-two range.

use pricelab::guess::GuessMode;
use pricelab::instances::gen_harmonic;
use pricelab::market::{expected_revenue, EvalConfig, OrderModel};
use pricelab::strategies::{PublicInfo, StrategySpec};

fn main() -> pricelab::error::Result<()> {
    let inst = gen_harmonic(8)?;
    let opt = inst.known_opt().unwrap_or(1.0);
    let mode = GuessMode::Bounded { low: 1.0, high: 8.0 };
    for (v, p) in mode.support()? {
        println!("guess {v} with probability {p}");
    }
    let info = PublicInfo::for_instance(&inst, opt)?;
    let wrapped = StrategySpec::Guess { mode, inner: Box::new(StrategySpec::DynamicUniform) };
    for spec in [StrategySpec::DynamicUniform, wrapped] {
        let e = expected_revenue(&inst, &spec, &info, &OrderModel::Fixed(vec![0]), &EvalConfig::exact())?;
        println!("{spec}: E[R] {:.4}", e.mean);
    }
    Ok(())
}
