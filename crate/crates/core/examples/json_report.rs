//! Machine-readable verdicts, including the counterexample trace.

use realize::engine::{check_realizability, report, CheckOptions, Format};
use realize::load_contract;

const TEXT: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/contracts/two_step.ctr"));

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let contract = load_contract(TEXT)?;
    let opts = CheckOptions {
        concurrent: true,
        ..CheckOptions::default()
    };
    let verdict = check_realizability(&contract, &opts)?;
    println!("{}", report(&verdict, Format::Json));
    Ok(())
}
