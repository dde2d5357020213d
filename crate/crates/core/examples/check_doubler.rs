//! Checks the doubler contract and its repaired version with the SMT engine.
//!
//! Run with `cargo run --example check_doubler` (needs `z3` on PATH or
//! `REALIZE_SOLVER`).

use realize::engine::{check_realizability, report, CheckOptions, Format};
use realize::load_contract;

const DOUBLER: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/contracts/doubler.ctr"));
const FIXED: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/contracts/doubler_fixed.ctr"));

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let opts = CheckOptions::default();
    for text in [DOUBLER, FIXED] {
        let contract = load_contract(text)?;
        let verdict = check_realizability(&contract, &opts)?;
        println!("== {}", contract.name);
        print!("{}", report(&verdict, Format::Human));
    }
    Ok(())
}
