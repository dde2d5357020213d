//! SMT-LIB2 encodings of the realizability queries.
//!
//! Every query except [`QueryKind::InitialSat`] is emitted in negated form:
//! an `unsat` answer means the check holds. Outer existentials are
//! skolemized into declared constants so that a `sat` answer comes with a
//! model describing the offending path; only the post-state of the final
//! step stays universally quantified.
//!
//! Naming: `s<j>$x` is state variable `x` at step `j`, `i<j>$x` the input
//! at step `j`, `w$x` the extra input applied to the last state and
//! `post$x` the bound post-state.

use std::fmt::{self, Write};

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::contract::{ArithOp, CmpOp, Contract, Expr, ExprKind, Sort, VarDecl, VarTag};
use crate::typecheck::TypedContract;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QueryKind {
    /// Some state satisfies `G_I` (not negated: `sat` is good).
    InitialSat,
    /// Negation of: every valid k-path from a `G_I` state extends by one step.
    BaseCheckPrime(usize),
    /// Negation of: some `G_I` state is viable for n steps.
    ExactBaseCheck(usize),
    /// Negation of: every valid n-path from any state extends by one step.
    ExtendCheck(usize),
}

impl QueryKind {
    pub fn slug(self) -> &'static str {
        match self {
            QueryKind::InitialSat => "initial_sat",
            QueryKind::BaseCheckPrime(_) => "base_check_prime",
            QueryKind::ExactBaseCheck(_) => "exact_base_check",
            QueryKind::ExtendCheck(_) => "extend_check",
        }
    }

    pub fn index(self) -> usize {
        match self {
            QueryKind::InitialSat => 0,
            QueryKind::BaseCheckPrime(k)
            | QueryKind::ExactBaseCheck(k)
            | QueryKind::ExtendCheck(k) => k,
        }
    }

    /// File name used when scripts are persisted: `<contract>_<kind>_<k>.smt2`.
    pub fn file_name(self, contract: &str) -> String {
        format!("{contract}_{}_{}.smt2", self.slug(), self.index())
    }
}

impl fmt::Display for QueryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QueryKind::InitialSat => f.write_str("InitialSat"),
            QueryKind::BaseCheckPrime(k) => write!(f, "BaseCheck'({k})"),
            QueryKind::ExactBaseCheck(n) => write!(f, "ExactBaseCheck({n})"),
            QueryKind::ExtendCheck(n) => write!(f, "ExtendCheck({n})"),
        }
    }
}

/// A declared constant of a script and the contract variable it stands for.
///
/// States use `step` 0..=k. Inputs on the path use `step` 0..k; the extra
/// input `w` is recorded as the input at `step == k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelVar {
    pub smt_name: String,
    pub var: String,
    pub step: usize,
    pub tag: VarTag,
    pub sort: Sort,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmtScript {
    pub kind: QueryKind,
    pub text: String,
    pub model_vars: Vec<ModelVar>,
}

/// Prefixes used when lowering the three variable tags of an expression.
#[derive(Debug, Clone)]
pub struct StepNames {
    pub pre: String,
    pub input: String,
    pub post: String,
}

impl StepNames {
    /// Names for a path step `j -> j+1`.
    pub fn path_step(j: usize) -> Self {
        StepNames {
            pre: state_prefix(j),
            input: input_prefix(j),
            post: state_prefix(j + 1),
        }
    }

    fn prefix(&self, tag: VarTag) -> &str {
        match tag {
            VarTag::PreState => &self.pre,
            VarTag::Input => &self.input,
            VarTag::PostState => &self.post,
        }
    }
}

pub fn state_prefix(j: usize) -> String {
    format!("s{j}$")
}

pub fn input_prefix(j: usize) -> String {
    format!("i{j}$")
}

pub const PENDING_PREFIX: &str = "w$";
pub const POST_PREFIX: &str = "post$";

/// Lowers a typed expression to an SMT-LIB2 term.
pub fn lower_expr(e: &Expr, names: &StepNames) -> String {
    let mut out = String::new();
    lower_into(&mut out, e, names);
    out
}

fn lower_into(out: &mut String, e: &Expr, names: &StepNames) {
    match &e.kind {
        ExprKind::BoolLit(b) => out.push_str(if *b { "true" } else { "false" }),
        ExprKind::IntLit(i) => out.push_str(&int_term(i)),
        ExprKind::RealLit(r) => out.push_str(&real_term(r)),
        ExprKind::Var { name, tag } => {
            out.push_str(names.prefix(*tag));
            out.push_str(name);
        }
        ExprKind::Not(inner) => app(out, "not", std::slice::from_ref(inner.as_ref()), names),
        ExprKind::And(es) => nary(out, "and", "true", es, names),
        ExprKind::Or(es) => nary(out, "or", "false", es, names),
        ExprKind::Implies(a, b) => app2(out, "=>", a, b, names),
        ExprKind::Ite(c, t, f) => {
            out.push_str("(ite ");
            lower_into(out, c, names);
            out.push(' ');
            lower_into(out, t, names);
            out.push(' ');
            lower_into(out, f, names);
            out.push(')');
        }
        ExprKind::Cmp(op, a, b) => {
            let head = match op {
                CmpOp::Eq => "=",
                CmpOp::Ne => "distinct",
                CmpOp::Lt => "<",
                CmpOp::Le => "<=",
                CmpOp::Gt => ">",
                CmpOp::Ge => ">=",
            };
            app2(out, head, a, b, names);
        }
        ExprKind::Arith(op, args) => match op {
            ArithOp::Add | ArithOp::Mul if args.len() == 1 => lower_into(out, &args[0], names),
            ArithOp::Add => app(out, "+", args, names),
            ArithOp::Mul => app(out, "*", args, names),
            ArithOp::Sub | ArithOp::Neg => app(out, "-", args, names),
            ArithOp::Div => app(out, "div", args, names),
            ArithOp::Mod => app(out, "mod", args, names),
        },
    }
}

fn app(out: &mut String, head: &str, args: &[Expr], names: &StepNames) {
    out.push('(');
    out.push_str(head);
    for a in args {
        out.push(' ');
        lower_into(out, a, names);
    }
    out.push(')');
}

fn app2(out: &mut String, head: &str, a: &Expr, b: &Expr, names: &StepNames) {
    write!(out, "({head} ").unwrap();
    lower_into(out, a, names);
    out.push(' ');
    lower_into(out, b, names);
    out.push(')');
}

fn nary(out: &mut String, head: &str, unit: &str, es: &[Expr], names: &StepNames) {
    match es {
        [] => out.push_str(unit),
        [only] => lower_into(out, only, names),
        _ => app(out, head, es, names),
    }
}

fn int_term(i: &BigInt) -> String {
    if i.sign() == num_bigint::Sign::Minus {
        format!("(- {})", -i)
    } else {
        i.to_string()
    }
}

fn real_term(r: &BigRational) -> String {
    let negative = r.numer().sign() == num_bigint::Sign::Minus;
    let abs = if negative { -r.clone() } else { r.clone() };
    let body = if abs.is_integer() {
        format!("{}.0", abs.numer())
    } else {
        format!("(/ {}.0 {}.0)", abs.numer(), abs.denom())
    };
    if negative {
        format!("(- {body})")
    } else {
        body
    }
}

/// Conjunction of a predicate section.
fn lower_conj(es: &[Expr], names: &StepNames) -> String {
    let mut out = String::new();
    nary(&mut out, "and", "true", es, names);
    out
}

fn binders(prefix: &str, decls: &[VarDecl]) -> String {
    decls
        .iter()
        .map(|d| format!("({prefix}{} {})", d.name, d.sort.smt_name()))
        .collect::<Vec<_>>()
        .join(" ")
}

fn quantified(q: &str, prefix: &str, decls: &[VarDecl], body: String) -> String {
    if decls.is_empty() {
        body
    } else {
        format!("({q} ({}) {body})", binders(prefix, decls))
    }
}

struct ScriptBuilder<'a> {
    contract: &'a Contract,
    kind: QueryKind,
    decls: String,
    asserts: String,
    model_vars: Vec<ModelVar>,
}

impl<'a> ScriptBuilder<'a> {
    fn new(contract: &'a Contract, kind: QueryKind) -> Self {
        ScriptBuilder {
            contract,
            kind,
            decls: String::new(),
            asserts: String::new(),
            model_vars: Vec::new(),
        }
    }

    fn declare(&mut self, prefix: &str, decls: &[VarDecl], step: usize, tag: VarTag) {
        for d in decls {
            let smt_name = format!("{prefix}{}", d.name);
            writeln!(self.decls, "(declare-const {smt_name} {})", d.sort.smt_name()).unwrap();
            self.model_vars.push(ModelVar {
                smt_name,
                var: d.name.clone(),
                step,
                tag,
                sort: d.sort,
            });
        }
    }

    fn assert(&mut self, term: String) {
        writeln!(self.asserts, "(assert {term})").unwrap();
    }

    fn finish(self) -> SmtScript {
        let mut text = String::new();
        writeln!(
            text,
            "; {} for contract {}",
            self.kind, self.contract.name
        )
        .unwrap();
        text.push_str("(set-option :produce-models true)\n");
        text.push_str("(set-logic ALL)\n");
        text.push_str(&self.decls);
        text.push_str(&self.asserts);
        text.push_str("(check-sat)\n(get-model)\n");
        SmtScript {
            kind: self.kind,
            text,
            model_vars: self.model_vars,
        }
    }
}

/// `∃ s0. G_I(s0)`; `sat` means an initial state exists.
pub fn encode_initial_sat(c: &TypedContract) -> SmtScript {
    let mut b = ScriptBuilder::new(c, QueryKind::InitialSat);
    b.declare(&state_prefix(0), &c.states, 0, VarTag::PreState);
    let names = StepNames::path_step(0);
    b.assert(lower_conj(&c.initial_guarantees, &names));
    b.finish()
}

/// Negated BaseCheck'(k): a valid k-path from a `G_I` state whose last state
/// has no `G_T` successor for the admissible input `w`.
pub fn encode_base_check_prime(c: &TypedContract, k: usize) -> SmtScript {
    encode_path_query(c, k, QueryKind::BaseCheckPrime(k), true)
}

/// Negated ExtendCheck(n): like BaseCheck'(n) but rooted at an arbitrary
/// state.
pub fn encode_extend_check(c: &TypedContract, n: usize) -> SmtScript {
    encode_path_query(c, n, QueryKind::ExtendCheck(n), false)
}

fn encode_path_query(c: &TypedContract, k: usize, kind: QueryKind, rooted: bool) -> SmtScript {
    let mut b = ScriptBuilder::new(c, kind);
    for j in 0..=k {
        b.declare(&state_prefix(j), &c.states, j, VarTag::PreState);
    }
    for j in 0..k {
        b.declare(&input_prefix(j), &c.inputs, j, VarTag::Input);
    }
    b.declare(PENDING_PREFIX, &c.inputs, k, VarTag::Input);

    if rooted {
        b.assert(lower_conj(&c.initial_guarantees, &StepNames::path_step(0)));
    }
    for j in 0..k {
        let names = StepNames::path_step(j);
        let step = [
            lower_conj(&c.assumptions, &names),
            lower_conj(&c.transitional_guarantees, &names),
        ];
        b.assert(format!("(and {} {})", step[0], step[1]));
    }
    let last = StepNames {
        pre: state_prefix(k),
        input: PENDING_PREFIX.to_string(),
        post: POST_PREFIX.to_string(),
    };
    b.assert(lower_conj(&c.assumptions, &last));
    let stuck = format!("(not {})", lower_conj(&c.transitional_guarantees, &last));
    b.assert(quantified("forall", POST_PREFIX, &c.states, stuck));
    b.finish()
}

/// Negated exact base check: `¬∃ s. G_I(s) ∧ FV_n(s)` with the n-step
/// viability unrolled as alternating `∀ input / ∃ post-state` quantifiers.
pub fn encode_exact_base_check(c: &TypedContract, n: usize) -> SmtScript {
    let mut b = ScriptBuilder::new(c, QueryKind::ExactBaseCheck(n));
    let level_state = |j: usize| format!("e{j}$");
    let level_input = |j: usize| format!("f{j}$");

    // FV_{n-j} at level j, built inside out.
    let mut fv = "true".to_string();
    for j in (0..n).rev() {
        let names = StepNames {
            pre: level_state(j),
            input: level_input(j),
            post: level_state(j + 1),
        };
        let step = if fv == "true" {
            lower_conj(&c.transitional_guarantees, &names)
        } else {
            format!("(and {} {fv})", lower_conj(&c.transitional_guarantees, &names))
        };
        let exists = quantified("exists", &level_state(j + 1), &c.states, step);
        let body = format!("(=> {} {exists})", lower_conj(&c.assumptions, &names));
        fv = quantified("forall", &level_input(j), &c.inputs, body);
    }
    let root = StepNames {
        pre: level_state(0),
        input: level_input(0),
        post: level_state(1),
    };
    let gi = lower_conj(&c.initial_guarantees, &root);
    let witness = format!("(not (and {gi} {fv}))");
    b.assert(quantified("forall", &level_state(0), &c.states, witness));
    b.finish()
}

/// Dispatches on the query kind.
pub fn encode(c: &TypedContract, kind: QueryKind) -> SmtScript {
    match kind {
        QueryKind::InitialSat => encode_initial_sat(c),
        QueryKind::BaseCheckPrime(k) => encode_base_check_prime(c, k),
        QueryKind::ExactBaseCheck(n) => encode_exact_base_check(c, n),
        QueryKind::ExtendCheck(n) => encode_extend_check(c, n),
    }
}
