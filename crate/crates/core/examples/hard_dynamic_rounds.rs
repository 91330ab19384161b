//! The per-round revenue claims on the hard dynamic instance.

use pricelab::instances::HardDynamicParams;
use pricelab::verify::hard_dynamic_rounds_report;

fn main() -> pricelab::error::Result<()> {
    let r = hard_dynamic_rounds_report(&HardDynamicParams { k: 2, f: 81, y: 9, m: 18 })?;
    println!("{} checks, {} failed", r.cases, r.failure_count);
    for f in r.failures.iter().take(5) {
        println!("  {f}");
    }
    println!("{}", serde_json::to_string_pretty(&r.details).unwrap_or_default());
    Ok(())
}
