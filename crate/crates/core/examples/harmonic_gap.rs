//! No uniform price earns more than 1 on the harmonic buyer, whose OPT is H_n.

use pricelab::demand::TieBreakPolicy;
use pricelab::instances::{gen_harmonic, harmonic_number};
use pricelab::market::sweep_uniform_prices;

fn main() -> pricelab::error::Result<()> {
    for n in [4, 8, 16, 20] {
        let inst = gen_harmonic(n)?;
        let s = sweep_uniform_prices(&inst, &[0], TieBreakPolicy::INCLUSIVE)?;
        println!("n={n:>2}  best uniform revenue {:.6} at p={:.4}  OPT {:.6}", s.max_revenue, s.argmax_price, harmonic_number(n));
    }
    Ok(())
}
