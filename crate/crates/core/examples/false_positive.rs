//! A realizable contract that the engine reports as unrealizable.
//!
//! Starting in `x = 1` is allowed but leads nowhere; an implementation can
//! simply start in `x = 0`. The base check inspects every allowed initial
//! state, so it finds the dead end at `x = 1`.

use std::collections::BTreeMap;

use realize::engine::{check_realizability, report, CheckOptions, Format};
use realize::load_contract;
use realize::oracle::{Domain, FiniteContract};

const TEXT: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/contracts/false_positive.ctr"));

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let contract = load_contract(TEXT)?;

    let verdict = check_realizability(&contract, &CheckOptions::default())?;
    print!("engine: {}", report(&verdict, Format::Human));

    let ranges = BTreeMap::from([
        ("d".to_string(), Domain::Bool),
        ("x".to_string(), Domain::IntRange(0, 1)),
    ]);
    let fc = FiniteContract::new(&contract, ranges)?;
    println!("oracle: realizable = {}", fc.check_realizable_oracle());
    for s in fc.viable_valuations() {
        println!("  viable: x = {}", s["x"]);
    }
    Ok(())
}
