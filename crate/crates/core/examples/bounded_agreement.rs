//! Compares the engine with the oracle on each sample contract that has a
//! `.ranges` file. The engine sees the contract with its ranges added as
//! constraints, so both sides decide the same question.

use std::fs;
use std::path::Path;

use realize::engine::{check_realizability, CheckOptions};
use realize::load_contract;
use realize::oracle::{parse_ranges, FiniteContract};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("contracts");
    let mut paths: Vec<_> = fs::read_dir(&dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "ranges"))
        .collect();
    paths.sort();
    let opts = CheckOptions::default();
    for ranges_path in paths {
        let contract = load_contract(&fs::read_to_string(ranges_path.with_extension("ctr"))?)?;
        let fc = FiniteContract::new(&contract, parse_ranges(&fs::read_to_string(&ranges_path)?)?)?;
        let verdict = check_realizability(&fc.bounded_contract(), &opts)?;
        println!(
            "{:<16} engine: {:<13} oracle: {}",
            contract.name,
            verdict.kind.label(),
            if fc.check_realizable_oracle() { "realizable" } else { "unrealizable" }
        );
    }
    Ok(())
}
