//! Optimal welfare by brute force and by component tuples.

use pricelab::instances::{gen_random_xos_with, RandomXosParams};
use pricelab::welfare::{opt_bruteforce, opt_xos};

fn main() -> pricelab::error::Result<()> {
    let inst = gen_random_xos_with(&RandomXosParams { n: 6, m: 3, l: 3, seed: 2, ..RandomXosParams::default() })?;
    let a = opt_bruteforce(&inst)?;
    let b = opt_xos(&inst)?;
    println!("brute force {:.6}, component tuples {:.6}", a.opt, b.opt);
    println!("{}", b.to_json()?);
    Ok(())
}
