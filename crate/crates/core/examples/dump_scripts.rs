//! Prints the SMT-LIB2 queries generated for the two-step counter.

use realize::encoder::{encode, QueryKind};
use realize::load_contract;

const TEXT: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/contracts/two_step.ctr"));

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let contract = load_contract(TEXT)?;
    for kind in [
        QueryKind::InitialSat,
        QueryKind::BaseCheckPrime(1),
        QueryKind::ExtendCheck(1),
        QueryKind::ExactBaseCheck(1),
    ] {
        let script = encode(&contract, kind);
        println!("-- {} ({} model constants)", kind.file_name(&contract.name), script.model_vars.len());
        print!("{}", script.text);
        println!();
    }
    Ok(())
}
