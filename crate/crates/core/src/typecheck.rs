//! Sort inference and well-formedness checks for contracts.

use std::collections::HashSet;
use std::ops::Deref;

use num_traits::Zero;

use crate::contract::{ArithOp, CmpOp, Contract, Expr, ExprKind, Section, Sort, VarTag};
use crate::diagnostics::{Diagnostic, DiagnosticKind, Diagnostics};
use crate::eval::{eval, Env};
use crate::contract::Value;

/// A contract whose expressions all carry a sort annotation and respect
/// the per-section variable restrictions. Only [`typecheck`] builds one.
#[derive(Debug, Clone, PartialEq)]
pub struct TypedContract {
    contract: Contract,
}

impl TypedContract {
    pub fn contract(&self) -> &Contract {
        &self.contract
    }

    pub fn into_contract(self) -> Contract {
        self.contract
    }
}

impl Deref for TypedContract {
    type Target = Contract;

    fn deref(&self) -> &Contract {
        &self.contract
    }
}

pub fn typecheck(contract: &Contract) -> Result<TypedContract, Diagnostics> {
    let mut checker = Checker {
        contract,
        diags: Vec::new(),
    };
    checker.check_decls();

    let mut typed = contract.clone();
    for section in [Section::Assumptions, Section::Initial, Section::Transitions] {
        for e in typed.section_mut(section).iter_mut() {
            if let Some(sort) = checker.infer(e, section) {
                if sort != Sort::Bool {
                    checker.error(
                        DiagnosticKind::SortMismatch,
                        e,
                        format!("{} entries must be bool, found {sort}", section.keyword()),
                    );
                }
            }
        }
    }

    if checker.diags.is_empty() {
        Ok(TypedContract { contract: typed })
    } else {
        Err(Diagnostics(checker.diags))
    }
}

struct Checker<'a> {
    contract: &'a Contract,
    diags: Vec<Diagnostic>,
}

impl Checker<'_> {
    fn error(&mut self, kind: DiagnosticKind, at: &Expr, message: String) {
        self.diags.push(Diagnostic::new(kind, at.span, message));
    }

    fn check_decls(&mut self) {
        let mut seen = HashSet::new();
        for d in self.contract.inputs.iter().chain(&self.contract.states) {
            if !seen.insert(d.name.as_str()) {
                self.diags.push(Diagnostic::new(
                    DiagnosticKind::DuplicateVariable,
                    d.span,
                    format!("variable `{}` declared more than once", d.name),
                ));
            }
        }
    }

    fn infer(&mut self, e: &mut Expr, section: Section) -> Option<Sort> {
        let sort = self.infer_kind(e, section)?;
        e.sort = Some(sort);
        Some(sort)
    }

    fn expect(&mut self, e: &mut Expr, section: Section, want: Sort, what: &str) -> Option<()> {
        let got = self.infer(e, section)?;
        if got != want {
            self.error(
                DiagnosticKind::SortMismatch,
                e,
                format!("{what} must be {want}, found {got}"),
            );
            return None;
        }
        Some(())
    }

    fn infer_kind(&mut self, e: &mut Expr, section: Section) -> Option<Sort> {
        let span_holder = Expr {
            kind: ExprKind::BoolLit(true),
            span: e.span,
            sort: None,
        };
        match &mut e.kind {
            ExprKind::BoolLit(_) => Some(Sort::Bool),
            ExprKind::IntLit(_) => Some(Sort::Int),
            ExprKind::RealLit(_) => Some(Sort::Real),
            ExprKind::Var { name, tag } => self.var_sort(&span_holder, name, *tag, section),
            ExprKind::Not(inner) => {
                self.expect(inner, section, Sort::Bool, "operand of `not`")?;
                Some(Sort::Bool)
            }
            ExprKind::And(es) | ExprKind::Or(es) => {
                let mut ok = true;
                for c in es.iter_mut() {
                    ok &= self.expect(c, section, Sort::Bool, "logical operand").is_some();
                }
                ok.then_some(Sort::Bool)
            }
            ExprKind::Implies(a, b) => {
                let ok_a = self.expect(a, section, Sort::Bool, "antecedent").is_some();
                let ok_b = self.expect(b, section, Sort::Bool, "consequent").is_some();
                (ok_a && ok_b).then_some(Sort::Bool)
            }
            ExprKind::Ite(c, t, f) => {
                let ok_c = self.expect(c, section, Sort::Bool, "condition").is_some();
                let ts = self.infer(t, section);
                let fs = self.infer(f, section);
                let (ts, fs) = (ts?, fs?);
                if ts != fs {
                    self.error(
                        DiagnosticKind::SortMismatch,
                        &span_holder,
                        format!("if-branches differ: {ts} vs {fs}"),
                    );
                    return None;
                }
                ok_c.then_some(ts)
            }
            ExprKind::Cmp(op, a, b) => {
                let op = *op;
                let sa = self.infer(a, section);
                let sb = self.infer(b, section);
                let (sa, sb) = (sa?, sb?);
                if sa != sb {
                    self.error(
                        DiagnosticKind::SortMismatch,
                        &span_holder,
                        format!("cannot compare {sa} with {sb}"),
                    );
                    return None;
                }
                if sa == Sort::Bool && !matches!(op, CmpOp::Eq | CmpOp::Ne) {
                    self.error(
                        DiagnosticKind::SortMismatch,
                        &span_holder,
                        format!("`{}` needs numeric operands", op.symbol()),
                    );
                    return None;
                }
                Some(Sort::Bool)
            }
            ExprKind::Arith(op, args) => {
                let op = *op;
                self.infer_arith(&span_holder, op, args, section)
            }
        }
    }

    fn var_sort(&mut self, at: &Expr, name: &str, tag: VarTag, section: Section) -> Option<Sort> {
        let sort = match self.contract.sort_of(name, tag) {
            Some(sort) => sort,
            None => {
                let (kind, msg) = if self.contract.input(name).is_some() {
                    (
                        DiagnosticKind::IllegalTagInSection,
                        format!("input `{name}` cannot be used as a {tag} variable"),
                    )
                } else if self.contract.state(name).is_some() {
                    (
                        DiagnosticKind::IllegalTagInSection,
                        format!("state `{name}` cannot be used as an {tag} variable"),
                    )
                } else {
                    (
                        DiagnosticKind::UnknownVariable,
                        format!("`{name}` is not declared"),
                    )
                };
                self.error(kind, at, msg);
                return None;
            }
        };
        if !section.allows(tag) {
            let shown = if tag == VarTag::PostState {
                format!("{name}'")
            } else {
                name.to_string()
            };
            self.error(
                DiagnosticKind::IllegalTagInSection,
                at,
                format!(
                    "{tag} variable `{shown}` is not allowed in {}",
                    section.keyword()
                ),
            );
            return None;
        }
        Some(sort)
    }

    fn infer_arith(
        &mut self,
        at: &Expr,
        op: ArithOp,
        args: &mut [Expr],
        section: Section,
    ) -> Option<Sort> {
        let arity_ok = match op {
            ArithOp::Neg => args.len() == 1,
            ArithOp::Div | ArithOp::Mod => args.len() == 2,
            ArithOp::Add | ArithOp::Mul => !args.is_empty(),
            ArithOp::Sub => args.len() >= 2,
        };
        if !arity_ok {
            self.error(
                DiagnosticKind::SortMismatch,
                at,
                format!("wrong number of operands ({}) for `{}`", args.len(), op.symbol()),
            );
            return None;
        }

        let mut sorts = Vec::with_capacity(args.len());
        for a in args.iter_mut() {
            sorts.push(self.infer(a, section));
        }
        let sorts: Option<Vec<Sort>> = sorts.into_iter().collect();
        let sorts = sorts?;
        let first = sorts[0];
        if !first.is_numeric() || sorts.iter().any(|s| *s != first) {
            let shown: Vec<String> = sorts.iter().map(Sort::to_string).collect();
            self.error(
                DiagnosticKind::SortMismatch,
                at,
                format!(
                    "`{}` needs operands of one numeric sort, found {}",
                    op.symbol(),
                    shown.join(", ")
                ),
            );
            return None;
        }

        match op {
            ArithOp::Mul => {
                let non_constant = args.iter().filter(|a| !a.is_constant()).count();
                if non_constant > 1 {
                    self.error(
                        DiagnosticKind::NonlinearMultiplication,
                        at,
                        "multiplication needs a constant operand".into(),
                    );
                    return None;
                }
            }
            ArithOp::Div | ArithOp::Mod => {
                if first != Sort::Int {
                    self.error(
                        DiagnosticKind::SortMismatch,
                        at,
                        format!("`{}` is only defined on int", op.symbol()),
                    );
                    return None;
                }
                if !args[1].is_constant() {
                    self.error(
                        DiagnosticKind::NonlinearMultiplication,
                        at,
                        format!("divisor of `{}` must be a constant", op.symbol()),
                    );
                    return None;
                }
                let env = Env::default();
                if let Ok(Value::Int(d)) = eval(&args[1], &env) {
                    if d.is_zero() {
                        self.error(
                            DiagnosticKind::SortMismatch,
                            at,
                            format!("constant divisor of `{}` is zero", op.symbol()),
                        );
                        return None;
                    }
                }
            }
            _ => {}
        }
        Some(first)
    }
}
