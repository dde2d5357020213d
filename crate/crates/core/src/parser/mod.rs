//! Front end for the `.ctr` contract language.
//!
//! ```text
//! contract doubler
//!   inputs:  in : int;
//!   state:   out : int;
//!   assumptions:
//!   initial:     true;
//!   transitions: out' = 2 * in; out' >= 0;
//! end
//! ```
//!
//! Precedence, lowest first: `=>` (right-assoc), `or`, `and`, `not`,
//! comparisons (non-associative), `+ -`, `* div mod`, unary `-`.
//! Primed state names denote the post-state; `--` starts a comment.

mod lexer;
mod render;

use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::contract::{
    ArithOp, CmpOp, Contract, Expr, ExprKind, Section, SourceSpan, Sort, VarDecl, VarTag,
};
use crate::diagnostics::{Diagnostic, DiagnosticKind, Diagnostics};

pub use render::{render_contract, render_expr};

use lexer::{lex, Tok, Token};

const RESERVED: &[&str] = &[
    "contract",
    "end",
    "inputs",
    "state",
    "assumptions",
    "initial",
    "transitions",
    "bool",
    "int",
    "real",
    "if",
    "then",
    "else",
    "and",
    "or",
    "not",
    "div",
    "mod",
    "true",
    "false",
];

pub fn is_reserved(word: &str) -> bool {
    RESERVED.contains(&word)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SectionHeader {
    Inputs,
    State,
    Exprs(Section),
}

impl SectionHeader {
    fn from_word(word: &str) -> Option<Self> {
        Some(match word {
            "inputs" => SectionHeader::Inputs,
            "state" => SectionHeader::State,
            "assumptions" => SectionHeader::Exprs(Section::Assumptions),
            "initial" => SectionHeader::Exprs(Section::Initial),
            "transitions" => SectionHeader::Exprs(Section::Transitions),
            _ => return None,
        })
    }
}

/// Parses a contract file. Errors inside a declaration or expression are
/// recovered at the next `;`, so one call reports as many problems as
/// possible.
pub fn parse_contract(text: &str) -> Result<Contract, Diagnostics> {
    let (tokens, lex_diags) = lex(text);
    let mut p = Parser {
        tokens,
        pos: 0,
        diags: lex_diags,
    };
    let contract = p.contract();
    match contract {
        Some(c) if p.diags.is_empty() => Ok(c),
        _ => {
            if p.diags.is_empty() {
                p.diags.push(Diagnostic::new(
                    DiagnosticKind::SyntaxError,
                    None,
                    "could not parse contract",
                ));
            }
            Err(Diagnostics(p.diags))
        }
    }
}

/// Parses a single expression. Unprimed identifiers are tagged as
/// pre-state variables; callers with a declaration context re-tag inputs.
pub fn parse_expr(text: &str) -> Result<Expr, Diagnostics> {
    let (tokens, lex_diags) = lex(text);
    let mut p = Parser {
        tokens,
        pos: 0,
        diags: lex_diags,
    };
    let e = p.expr();
    if e.is_some() && !matches!(p.peek(), Tok::Eof) {
        let t = p.cur().clone();
        p.syntax(&t, format!("unexpected {} after expression", t.tok.describe()));
    }
    match e {
        Some(e) if p.diags.is_empty() => Ok(e),
        _ => Err(Diagnostics(p.diags)),
    }
}

/// Marker for an error already recorded in `diags`.
struct Reported;

type PResult<T> = Result<T, Reported>;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    diags: Vec<Diagnostic>,
}

impl Parser {
    fn cur(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if !matches!(t.tok, Tok::Eof) {
            self.pos += 1;
        }
        t
    }

    fn is_word(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(w) if w == word)
    }

    fn syntax(&mut self, at: &Token, message: String) -> Reported {
        self.diags.push(Diagnostic::new(
            DiagnosticKind::SyntaxError,
            Some(at.span),
            message,
        ));
        Reported
    }

    fn expect(&mut self, want: Tok, context: &str) -> PResult<Token> {
        if *self.peek() == want {
            Ok(self.bump())
        } else {
            let t = self.cur().clone();
            Err(self.syntax(
                &t,
                format!(
                    "expected {} {context}, found {}",
                    want.describe(),
                    t.tok.describe()
                ),
            ))
        }
    }

    fn expect_word(&mut self, word: &str) -> PResult<Token> {
        if self.is_word(word) {
            Ok(self.bump())
        } else {
            let t = self.cur().clone();
            Err(self.syntax(
                &t,
                format!("expected `{word}`, found {}", t.tok.describe()),
            ))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        let t = self.cur().clone();
        match &t.tok {
            Tok::Ident(w) if !is_reserved(w) => {
                self.bump();
                Ok((w.clone(), t.span))
            }
            other => Err(self.syntax(
                &t,
                format!("expected {what}, found {}", other.describe()),
            )),
        }
    }

    fn at_section_boundary(&self) -> bool {
        match self.peek() {
            Tok::Eof => true,
            Tok::Ident(w) if w == "end" => true,
            Tok::Ident(w) => {
                SectionHeader::from_word(w).is_some() && matches!(self.peek_at(1), Tok::Colon)
            }
            _ => false,
        }
    }

    /// Skips to just past the next `;`, stopping early at a section header
    /// or `end`.
    fn recover(&mut self) {
        loop {
            if self.at_section_boundary() {
                return;
            }
            if matches!(self.bump().tok, Tok::Semi) {
                return;
            }
        }
    }

    fn contract(&mut self) -> Option<Contract> {
        if self.expect_word("contract").is_err() {
            return None;
        }
        let name = match self.ident("contract name") {
            Ok((n, _)) => n,
            Err(_) => return None,
        };
        let mut c = Contract::new(&name);
        let mut seen_sections: HashSet<&'static str> = HashSet::new();
        let mut seen_vars: HashSet<String> = HashSet::new();

        loop {
            let t = self.cur().clone();
            match &t.tok {
                Tok::Eof => {
                    self.syntax(&t, "missing `end` of contract".into());
                    break;
                }
                Tok::Ident(w) if w == "end" => {
                    self.bump();
                    if !matches!(self.peek(), Tok::Eof) {
                        let t = self.cur().clone();
                        self.syntax(
                            &t,
                            format!("unexpected {} after `end`", t.tok.describe()),
                        );
                    }
                    break;
                }
                Tok::Ident(w) if SectionHeader::from_word(w).is_some() => {
                    let header = SectionHeader::from_word(w).unwrap();
                    let keyword: &'static str = RESERVED.iter().find(|k| *k == w).unwrap();
                    self.bump();
                    if self.expect(Tok::Colon, "after section name").is_err() {
                        self.recover();
                        continue;
                    }
                    if !seen_sections.insert(keyword) {
                        self.diags.push(Diagnostic::new(
                            DiagnosticKind::DuplicateSection,
                            Some(t.span),
                            format!("section `{keyword}` appears more than once"),
                        ));
                    }
                    match header {
                        SectionHeader::Inputs => self.decls(&mut c.inputs, &mut seen_vars),
                        SectionHeader::State => self.decls(&mut c.states, &mut seen_vars),
                        SectionHeader::Exprs(section) => {
                            let es = self.exprs();
                            c.section_mut(section).extend(es);
                        }
                    }
                }
                other => {
                    let msg = format!(
                        "expected a section (`inputs:`, `state:`, `assumptions:`, `initial:`, `transitions:`) or `end`, found {}",
                        other.describe()
                    );
                    self.syntax(&t, msg);
                    self.bump();
                    self.recover();
                }
            }
        }

        resolve_inputs(&mut c);
        Some(c)
    }

    fn decls(&mut self, out: &mut Vec<VarDecl>, seen: &mut HashSet<String>) {
        while !self.at_section_boundary() {
            match self.decl() {
                Ok(d) => {
                    if !seen.insert(d.name.clone()) {
                        self.diags.push(Diagnostic::new(
                            DiagnosticKind::DuplicateVariable,
                            d.span,
                            format!("variable `{}` declared more than once", d.name),
                        ));
                    }
                    out.push(d);
                }
                Err(Reported) => self.recover(),
            }
        }
    }

    fn decl(&mut self) -> PResult<VarDecl> {
        let (name, span) = self.ident("variable name")?;
        self.expect(Tok::Colon, "after variable name")?;
        let t = self.cur().clone();
        let sort = match &t.tok {
            Tok::Ident(w) if w == "bool" => Sort::Bool,
            Tok::Ident(w) if w == "int" => Sort::Int,
            Tok::Ident(w) if w == "real" => Sort::Real,
            other => {
                return Err(self.syntax(
                    &t,
                    format!("expected `bool`, `int` or `real`, found {}", other.describe()),
                ))
            }
        };
        self.bump();
        self.expect(Tok::Semi, "after declaration")?;
        Ok(VarDecl {
            name,
            sort,
            span: Some(span),
        })
    }

    fn exprs(&mut self) -> Vec<Expr> {
        let mut out = Vec::new();
        while !self.at_section_boundary() {
            let r = self
                .expr_inner()
                .and_then(|e| self.expect(Tok::Semi, "after expression").map(|_| e));
            match r {
                Ok(e) => out.push(e),
                Err(Reported) => self.recover(),
            }
        }
        out
    }

    fn expr(&mut self) -> Option<Expr> {
        self.expr_inner().ok()
    }

    fn expr_inner(&mut self) -> PResult<Expr> {
        self.implies()
    }

    fn implies(&mut self) -> PResult<Expr> {
        let lhs = self.or()?;
        if matches!(self.peek(), Tok::Arrow) {
            let t = self.bump();
            let rhs = self.implies()?;
            return Ok(Expr::with_span(
                ExprKind::Implies(Box::new(lhs), Box::new(rhs)),
                t.span,
            ));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> PResult<Expr> {
        let first = self.and()?;
        if !self.is_word("or") {
            return Ok(first);
        }
        let span = self.cur().span;
        let mut es = vec![first];
        while self.is_word("or") {
            self.bump();
            es.push(self.and()?);
        }
        Ok(Expr::with_span(ExprKind::Or(es), span))
    }

    fn and(&mut self) -> PResult<Expr> {
        let first = self.not()?;
        if !self.is_word("and") {
            return Ok(first);
        }
        let span = self.cur().span;
        let mut es = vec![first];
        while self.is_word("and") {
            self.bump();
            es.push(self.not()?);
        }
        Ok(Expr::with_span(ExprKind::And(es), span))
    }

    fn not(&mut self) -> PResult<Expr> {
        if self.is_word("not") {
            let t = self.bump();
            let inner = self.not()?;
            return Ok(Expr::with_span(ExprKind::Not(Box::new(inner)), t.span));
        }
        self.comparison()
    }

    fn cmp_op(&self) -> Option<CmpOp> {
        Some(match self.peek() {
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            _ => return None,
        })
    }

    fn comparison(&mut self) -> PResult<Expr> {
        let lhs = self.additive()?;
        let Some(op) = self.cmp_op() else {
            return Ok(lhs);
        };
        let t = self.bump();
        let rhs = self.additive()?;
        if self.cmp_op().is_some() {
            let t2 = self.cur().clone();
            return Err(self.syntax(
                &t2,
                "comparison operators do not chain; add parentheses".into(),
            ));
        }
        Ok(Expr::with_span(
            ExprKind::Cmp(op, Box::new(lhs), Box::new(rhs)),
            t.span,
        ))
    }

    fn additive(&mut self) -> PResult<Expr> {
        let mut acc = self.multiplicative()?;
        // Consecutive uses of the same operator extend one n-ary node.
        let mut open: Option<ArithOp> = None;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(acc),
            };
            let t = self.bump();
            let rhs = self.multiplicative()?;
            acc = extend_or_wrap(acc, op, rhs, &mut open, t.span);
        }
    }

    fn multiplicative(&mut self) -> PResult<Expr> {
        let mut acc = self.unary()?;
        let mut open: Option<ArithOp> = None;
        loop {
            let op = match self.peek() {
                Tok::Star => ArithOp::Mul,
                Tok::Ident(w) if w == "div" => ArithOp::Div,
                Tok::Ident(w) if w == "mod" => ArithOp::Mod,
                _ => return Ok(acc),
            };
            let t = self.bump();
            let rhs = self.unary()?;
            acc = extend_or_wrap(acc, op, rhs, &mut open, t.span);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if matches!(self.peek(), Tok::Minus) {
            let t = self.bump();
            // `-3` is a negative literal; `-(3)` and `-x` are negations.
            match self.peek().clone() {
                Tok::Int(i) => {
                    let lt = self.bump();
                    return Ok(Expr::with_span(ExprKind::IntLit(-i), merge(t.span, lt.span)));
                }
                Tok::Decimal(r) => {
                    let lt = self.bump();
                    return Ok(Expr::with_span(ExprKind::RealLit(-r), merge(t.span, lt.span)));
                }
                _ => {}
            }
            let inner = self.unary()?;
            return Ok(Expr::with_span(
                ExprKind::Arith(ArithOp::Neg, vec![inner]),
                t.span,
            ));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        let t = self.cur().clone();
        match &t.tok {
            Tok::Int(i) => {
                self.bump();
                Ok(Expr::with_span(ExprKind::IntLit(i.clone()), t.span))
            }
            Tok::Decimal(r) => {
                self.bump();
                Ok(Expr::with_span(ExprKind::RealLit(r.clone()), t.span))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr_inner()?;
                self.expect(Tok::RParen, "to close `(`")?;
                Ok(e)
            }
            Tok::Ident(w) if w == "true" || w == "false" => {
                self.bump();
                Ok(Expr::with_span(ExprKind::BoolLit(w == "true"), t.span))
            }
            Tok::Ident(w) if w == "if" => {
                self.bump();
                let c = self.expr_inner()?;
                self.expect_word("then")?;
                let a = self.expr_inner()?;
                self.expect_word("else")?;
                let b = self.expr_inner()?;
                Ok(Expr::with_span(
                    ExprKind::Ite(Box::new(c), Box::new(a), Box::new(b)),
                    t.span,
                ))
            }
            Tok::Ident(w) if !is_reserved(w) => {
                self.bump();
                let (tag, span) = if matches!(self.peek(), Tok::Prime) {
                    let pt = self.bump();
                    (VarTag::PostState, merge(t.span, pt.span))
                } else {
                    (VarTag::PreState, t.span)
                };
                Ok(Expr::with_span(
                    ExprKind::Var {
                        name: w.clone(),
                        tag,
                    },
                    span,
                ))
            }
            other => Err(self.syntax(
                &t,
                format!("expected an expression, found {}", other.describe()),
            )),
        }
    }
}

fn merge(a: SourceSpan, b: SourceSpan) -> SourceSpan {
    if a.line == b.line && b.column >= a.column {
        SourceSpan::new(a.line, a.column, b.column + b.length - a.column)
    } else {
        a
    }
}

fn extend_or_wrap(
    acc: Expr,
    op: ArithOp,
    rhs: Expr,
    open: &mut Option<ArithOp>,
    span: SourceSpan,
) -> Expr {
    let flattens = matches!(op, ArithOp::Add | ArithOp::Sub | ArithOp::Mul);
    if flattens && *open == Some(op) {
        if let ExprKind::Arith(_, mut args) = acc.kind {
            args.push(rhs);
            return Expr {
                kind: ExprKind::Arith(op, args),
                span: acc.span,
                sort: None,
            };
        }
        unreachable!("open operator always wraps an Arith node");
    }
    *open = Some(op);
    Expr::with_span(ExprKind::Arith(op, vec![acc, rhs]), span)
}

/// Unprimed references to declared inputs become `Input`-tagged.
fn resolve_inputs(c: &mut Contract) {
    let inputs: HashSet<String> = c.inputs.iter().map(|d| d.name.clone()).collect();
    fn walk(e: &mut Expr, inputs: &HashSet<String>) {
        match &mut e.kind {
            ExprKind::Var { name, tag } => {
                if *tag == VarTag::PreState && inputs.contains(name) {
                    *tag = VarTag::Input;
                }
            }
            ExprKind::Not(a) => walk(a, inputs),
            ExprKind::And(es) | ExprKind::Or(es) | ExprKind::Arith(_, es) => {
                es.iter_mut().for_each(|x| walk(x, inputs))
            }
            ExprKind::Implies(a, b) | ExprKind::Cmp(_, a, b) => {
                walk(a, inputs);
                walk(b, inputs);
            }
            ExprKind::Ite(a, b, d) => {
                walk(a, inputs);
                walk(b, inputs);
                walk(d, inputs);
            }
            ExprKind::BoolLit(_) | ExprKind::IntLit(_) | ExprKind::RealLit(_) => {}
        }
    }
    for s in [Section::Assumptions, Section::Initial, Section::Transitions] {
        for e in c.section_mut(s).iter_mut() {
            walk(e, &inputs);
        }
    }
}

// Literal helpers used by the renderer.
pub(crate) fn int_is_negative(i: &BigInt) -> bool {
    i.sign() == num_bigint::Sign::Minus
}

pub(crate) fn real_is_negative(r: &BigRational) -> bool {
    int_is_negative(r.numer())
}
