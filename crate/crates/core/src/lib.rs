//! Realizability checking for assume/guarantee contracts.
//!
//! A contract `(A, (G_I, G_T))` constrains a component's inputs (`A`), its
//! initial state (`G_I`) and each transition (`G_T`). It is *realizable*
//! when some transition system can start in a `G_I` state and, for every
//! input the assumptions allow, always pick a successor that keeps `G_T`
//! true forever.
//!
//! The crate is organised as:
//!
//! - [`contract`], [`typecheck`], [`eval`]: the contract AST and its
//!   concrete semantics.
//! - [`parser`]: the `.ctr` text format.
//! - [`encoder`] and [`solver`]: SMT-LIB2 query generation and an external
//!   solver process driver.
//! - [`engine`]: the k-induction style decision procedure and verdict
//!   reporting.
//! - [`oracle`]: explicit-state ground truth over finite domains.
//! - [`cli`]: the `realize` command line.

pub mod cli;
pub mod contract;
pub mod diagnostics;
pub mod encoder;
pub mod engine;
pub mod eval;
pub mod oracle;
pub mod parser;
pub mod solver;
pub mod typecheck;

pub use contract::{Contract, Expr, Sort, Trace, Valuation, Value, VarTag};
pub use diagnostics::{Diagnostic, DiagnosticKind, Diagnostics};
pub use engine::{check_realizability, CheckOptions, Verdict, VerdictKind};
pub use parser::{parse_contract, render_contract};
pub use typecheck::{typecheck, TypedContract};

/// Parses and type checks a contract in one step.
pub fn load_contract(text: &str) -> Result<TypedContract, Diagnostics> {
    typecheck(&parse_contract(text)?)
}
