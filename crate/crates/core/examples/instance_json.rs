//! Generate an instance, write it as JSON and read it back.

use pricelab::instances::{from_spec, Instance};

fn main() -> pricelab::error::Result<()> {
    let inst = from_spec("random-xos:n=3,m=2,l=2,seed=1")?;
    let json = inst.to_json()?;
    println!("{json}");
    let back = Instance::from_json(&json)?;
    println!("round trip equal: {}", back == inst);
    Ok(())
}
