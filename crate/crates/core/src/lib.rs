pub mod cli;
pub mod demand;
pub mod error;
pub mod guess;
pub mod instances;
pub mod market;
pub mod num;
pub mod pricing;
pub mod random;
pub mod strategies;
pub mod valuation;
pub mod verify;
pub mod welfare;
