//! Explicit-state analysis of the repaired doubler over small ranges:
//! viable states, the witness transition system and its realization check.

use std::collections::BTreeMap;

use realize::{load_contract, Valuation};
use realize::oracle::{Domain, FiniteContract};

const FIXED: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/contracts/doubler_fixed.ctr"));

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let contract = load_contract(FIXED)?;
    for (lo, hi) in [(0, 2), (0, 4)] {
        let ranges = BTreeMap::from([
            ("in".to_string(), Domain::IntRange(lo, hi)),
            ("out".to_string(), Domain::IntRange(-4, 4)),
        ]);
        let fc = FiniteContract::new(&contract, ranges)?;
        let s = fc.summary();
        println!(
            "in = {lo}..{hi}: {} of {} states viable after {} iterations",
            s.viable, s.states, s.fixpoint_iterations
        );
        for n in 0..3 {
            let fv = fc.finitely_viable_set(n).iter().filter(|b| **b).count();
            let ext = fc.extendable_set(n).iter().filter(|b| **b).count();
            println!("  n={n}: |FV| = {fv}, |EXT| = {ext}");
        }
        match fc.witness_transition() {
            Some(ts) => {
                let report = fc.check_realization(&ts);
                let reach = fc.reachable_set(&ts).iter().filter(|b| **b).count();
                println!(
                    "  witness starts in {}; {reach} reachable states; conditions {:?}",
                    show(&s.witness_initial.unwrap()),
                    report.conditions
                );
            }
            None => println!("  not realizable over these ranges"),
        }
    }
    Ok(())
}

fn show(v: &Valuation) -> String {
    let parts: Vec<String> = v.iter().map(|(k, x)| format!("{k} = {x}")).collect();
    parts.join(", ")
}
