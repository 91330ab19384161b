//! A buyer's demand at a few prices, checked against brute force.

use pricelab::demand::{breakpoints, demand, demand_bruteforce, TieBreakPolicy};
use pricelab::pricing::PriceAssignment;
use pricelab::valuation::{Bundle, Component, Valuation};

fn main() -> pricelab::error::Result<()> {
    let v = Valuation::xos(vec![Component::from_dense(&[3.0, 1.0, 0.5])?, Component::from_dense(&[0.0, 2.0, 2.0])?])?;
    let avail = Bundle::from_counts(vec![1, 2, 2]);
    for p in [0.25, 0.75, 1.5, 2.5] {
        let prices = PriceAssignment::Uniform(p);
        let d = demand(&v, &avail, &prices, TieBreakPolicy::STRICT)?;
        let o = demand_bruteforce(&v, &avail, &prices)?;
        println!("p={p}: buys {:?}, utility {} (brute force {})", d.bundle.counts(), d.utility, o.utility);
    }
    for b in breakpoints(&v, &avail, TieBreakPolicy::STRICT)? {
        println!("breakpoint q={} size={}", b.price, b.size);
    }
    Ok(())
}
