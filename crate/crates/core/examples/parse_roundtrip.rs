//! Parsing, type errors with positions, and pretty-printing.

use realize::{load_contract, parse_contract, render_contract};

fn main() {
    let text = "contract counter
  inputs:  reset : bool;
  state:   n : int;
  initial: n = 0;
  transitions:
    if reset then n' = 0 else n' = n + 1;
    n' >= 0;
end";
    let c = load_contract(text).expect("well typed");
    let rendered = render_contract(&c);
    print!("{rendered}");
    assert!(parse_contract(&rendered).unwrap().same_structure(&c));

    let broken = "contract broken
  inputs: in : int;
  state: out : int;
  assumptions: out' >= 0;
  transitions: in * out > 0; out' = true;
end";
    for d in load_contract(broken).unwrap_err().iter() {
        println!("{d}");
    }

    let garbled = "contract garbled state: x : int; transitions: x' = ; x' > ) 1; end";
    for d in parse_contract(garbled).unwrap_err().iter() {
        println!("{d}");
    }
}
