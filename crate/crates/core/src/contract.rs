//! Contract AST: sorts, variable tags, expressions, contracts, and the
//! concrete values, valuations and traces produced by evaluation and by
//! counterexample extraction.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::ser::{Serialize, Serializer};

/// Position of a syntax element in a contract file (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SourceSpan {
    pub line: u32,
    pub column: u32,
    pub length: u32,
}

impl SourceSpan {
    pub fn new(line: u32, column: u32, length: u32) -> Self {
        SourceSpan {
            line: line.max(1),
            column: column.max(1),
            length: length.max(1),
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Bool,
    Int,
    Real,
}

impl Sort {
    pub fn is_numeric(self) -> bool {
        matches!(self, Sort::Int | Sort::Real)
    }

    /// Keyword used by the contract language.
    pub fn keyword(self) -> &'static str {
        match self {
            Sort::Bool => "bool",
            Sort::Int => "int",
            Sort::Real => "real",
        }
    }

    /// SMT-LIB2 sort name.
    pub fn smt_name(self) -> &'static str {
        match self {
            Sort::Bool => "Bool",
            Sort::Int => "Int",
            Sort::Real => "Real",
        }
    }

    pub fn default_value(self) -> Value {
        match self {
            Sort::Bool => Value::Bool(false),
            Sort::Int => Value::Int(BigInt::zero()),
            Sort::Real => Value::Real(BigRational::zero()),
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Which step of a transition a variable reference denotes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarTag {
    PreState,
    Input,
    PostState,
}

impl fmt::Display for VarTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VarTag::PreState => "pre-state",
            VarTag::Input => "input",
            VarTag::PostState => "post-state",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "<>",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Neg,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub | ArithOp::Neg => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "div",
            ArithOp::Mod => "mod",
        }
    }
}

/// Expression node. Equality is structural: spans and sort annotations are
/// ignored.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Option<SourceSpan>,
    /// Filled in by the type checker.
    pub sort: Option<Sort>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    BoolLit(bool),
    IntLit(BigInt),
    RealLit(BigRational),
    Var { name: String, tag: VarTag },
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    Ite(Box<Expr>, Box<Expr>, Box<Expr>),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    Arith(ArithOp, Vec<Expr>),
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl From<ExprKind> for Expr {
    fn from(kind: ExprKind) -> Self {
        Expr {
            kind,
            span: None,
            sort: None,
        }
    }
}

impl Expr {
    pub fn with_span(kind: ExprKind, span: SourceSpan) -> Self {
        Expr {
            kind,
            span: Some(span),
            sort: None,
        }
    }

    pub fn bool(b: bool) -> Self {
        ExprKind::BoolLit(b).into()
    }

    pub fn int(v: impl Into<BigInt>) -> Self {
        ExprKind::IntLit(v.into()).into()
    }

    pub fn real(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Self {
        ExprKind::RealLit(BigRational::new(numer.into(), denom.into())).into()
    }

    pub fn pre(name: &str) -> Self {
        Self::var(name, VarTag::PreState)
    }

    pub fn input(name: &str) -> Self {
        Self::var(name, VarTag::Input)
    }

    pub fn post(name: &str) -> Self {
        Self::var(name, VarTag::PostState)
    }

    pub fn var(name: &str, tag: VarTag) -> Self {
        ExprKind::Var {
            name: name.to_string(),
            tag,
        }
        .into()
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Self {
        ExprKind::Not(Box::new(e)).into()
    }

    pub fn and(es: Vec<Expr>) -> Self {
        ExprKind::And(es).into()
    }

    pub fn or(es: Vec<Expr>) -> Self {
        ExprKind::Or(es).into()
    }

    pub fn implies(a: Expr, b: Expr) -> Self {
        ExprKind::Implies(Box::new(a), Box::new(b)).into()
    }

    pub fn ite(c: Expr, t: Expr, e: Expr) -> Self {
        ExprKind::Ite(Box::new(c), Box::new(t), Box::new(e)).into()
    }

    pub fn cmp(op: CmpOp, a: Expr, b: Expr) -> Self {
        ExprKind::Cmp(op, Box::new(a), Box::new(b)).into()
    }

    pub fn eq(a: Expr, b: Expr) -> Self {
        Self::cmp(CmpOp::Eq, a, b)
    }

    pub fn arith(op: ArithOp, args: Vec<Expr>) -> Self {
        ExprKind::Arith(op, args).into()
    }

    /// Direct children in source order.
    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::BoolLit(_)
            | ExprKind::IntLit(_)
            | ExprKind::RealLit(_)
            | ExprKind::Var { .. } => Vec::new(),
            ExprKind::Not(e) => vec![e],
            ExprKind::And(es) | ExprKind::Or(es) | ExprKind::Arith(_, es) => es.iter().collect(),
            ExprKind::Implies(a, b) | ExprKind::Cmp(_, a, b) => vec![a, b],
            ExprKind::Ite(c, t, e) => vec![c, t, e],
        }
    }

    /// True if no variable occurs anywhere below this node.
    pub fn is_constant(&self) -> bool {
        match &self.kind {
            ExprKind::Var { .. } => false,
            _ => self.children().into_iter().all(Expr::is_constant),
        }
    }

    /// Calls `f` on every variable reference in the tree.
    pub fn visit_vars<'a>(&'a self, f: &mut impl FnMut(&'a str, VarTag, Option<SourceSpan>)) {
        if let ExprKind::Var { name, tag } = &self.kind {
            f(name, *tag, self.span);
        }
        for c in self.children() {
            c.visit_vars(f);
        }
    }

    /// Rewrites trivial shapes so that structurally equivalent parses
    /// compare equal: empty `and`/`or` become literals and single-operand
    /// `and`/`or`/`+`/`*` collapse to their operand.
    pub fn normalized(&self) -> Expr {
        let kind = match &self.kind {
            ExprKind::Not(e) => ExprKind::Not(Box::new(e.normalized())),
            ExprKind::And(es) | ExprKind::Or(es) => {
                let is_and = matches!(self.kind, ExprKind::And(_));
                let mut es: Vec<Expr> = es.iter().map(Expr::normalized).collect();
                match es.len() {
                    0 => ExprKind::BoolLit(is_and),
                    1 => es.pop().unwrap().kind,
                    _ if is_and => ExprKind::And(es),
                    _ => ExprKind::Or(es),
                }
            }
            ExprKind::Implies(a, b) => {
                ExprKind::Implies(Box::new(a.normalized()), Box::new(b.normalized()))
            }
            ExprKind::Ite(c, t, e) => ExprKind::Ite(
                Box::new(c.normalized()),
                Box::new(t.normalized()),
                Box::new(e.normalized()),
            ),
            ExprKind::Cmp(op, a, b) => {
                ExprKind::Cmp(*op, Box::new(a.normalized()), Box::new(b.normalized()))
            }
            ExprKind::Arith(op, args) => {
                let mut args: Vec<Expr> = args.iter().map(Expr::normalized).collect();
                if args.len() == 1 && matches!(op, ArithOp::Add | ArithOp::Mul) {
                    args.pop().unwrap().kind
                } else {
                    ExprKind::Arith(*op, args)
                }
            }
            other => other.clone(),
        };
        Expr {
            kind,
            span: self.span,
            sort: self.sort,
        }
    }
}

/// A declared input or state variable. Equality ignores the span.
#[derive(Debug, Clone)]
pub struct VarDecl {
    pub name: String,
    pub sort: Sort,
    pub span: Option<SourceSpan>,
}

impl PartialEq for VarDecl {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.sort == other.sort
    }
}

impl VarDecl {
    pub fn new(name: &str, sort: Sort) -> Self {
        VarDecl {
            name: name.to_string(),
            sort,
            span: None,
        }
    }
}

/// The three predicate sections of a contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Section {
    Assumptions,
    Initial,
    Transitions,
}

impl Section {
    pub fn keyword(self) -> &'static str {
        match self {
            Section::Assumptions => "assumptions",
            Section::Initial => "initial",
            Section::Transitions => "transitions",
        }
    }

    pub fn allows(self, tag: VarTag) -> bool {
        match self {
            Section::Assumptions => matches!(tag, VarTag::PreState | VarTag::Input),
            Section::Initial => tag == VarTag::PreState,
            Section::Transitions => true,
        }
    }
}

/// An assume/guarantee contract `(A, (G_I, G_T))`. Each predicate list is
/// a conjunction; an empty list means `true`.
#[derive(Debug, Clone, PartialEq)]
pub struct Contract {
    pub name: String,
    pub inputs: Vec<VarDecl>,
    pub states: Vec<VarDecl>,
    pub assumptions: Vec<Expr>,
    pub initial_guarantees: Vec<Expr>,
    pub transitional_guarantees: Vec<Expr>,
}

impl Contract {
    pub fn new(name: &str) -> Self {
        Contract {
            name: name.to_string(),
            inputs: Vec::new(),
            states: Vec::new(),
            assumptions: Vec::new(),
            initial_guarantees: Vec::new(),
            transitional_guarantees: Vec::new(),
        }
    }

    pub fn section(&self, section: Section) -> &[Expr] {
        match section {
            Section::Assumptions => &self.assumptions,
            Section::Initial => &self.initial_guarantees,
            Section::Transitions => &self.transitional_guarantees,
        }
    }

    pub fn section_mut(&mut self, section: Section) -> &mut Vec<Expr> {
        match section {
            Section::Assumptions => &mut self.assumptions,
            Section::Initial => &mut self.initial_guarantees,
            Section::Transitions => &mut self.transitional_guarantees,
        }
    }

    pub fn input(&self, name: &str) -> Option<&VarDecl> {
        self.inputs.iter().find(|d| d.name == name)
    }

    pub fn state(&self, name: &str) -> Option<&VarDecl> {
        self.states.iter().find(|d| d.name == name)
    }

    /// Sort of a declared variable, looked up in the set the tag refers to.
    pub fn sort_of(&self, name: &str, tag: VarTag) -> Option<Sort> {
        match tag {
            VarTag::Input => self.input(name).map(|d| d.sort),
            VarTag::PreState | VarTag::PostState => self.state(name).map(|d| d.sort),
        }
    }

    /// Normal form used for structural comparison after a render/parse
    /// round trip: an empty section becomes `[true]`.
    pub fn normalized(&self) -> Contract {
        let norm = |es: &[Expr]| -> Vec<Expr> {
            if es.is_empty() {
                vec![Expr::bool(true)]
            } else {
                es.iter().map(Expr::normalized).collect()
            }
        };
        Contract {
            name: self.name.clone(),
            inputs: self.inputs.clone(),
            states: self.states.clone(),
            assumptions: norm(&self.assumptions),
            initial_guarantees: norm(&self.initial_guarantees),
            transitional_guarantees: norm(&self.transitional_guarantees),
        }
    }

    /// Structural equality modulo [`Contract::normalized`]. Spans never
    /// take part in equality.
    pub fn same_structure(&self, other: &Contract) -> bool {
        self.normalized() == other.normalized()
    }
}

/// A concrete value of one of the three sorts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Bool(bool),
    Int(BigInt),
    Real(BigRational),
}

impl Value {
    pub fn sort(&self) -> Sort {
        match self {
            Value::Bool(_) => Sort::Bool,
            Value::Int(_) => Sort::Int,
            Value::Real(_) => Sort::Real,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Value::Int(i) => Some(i),
            _ => None,
        }
    }

    pub fn int(v: i64) -> Value {
        Value::Int(BigInt::from(v))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Real(r) if r.is_integer() => write!(f, "{}.0", r.numer()),
            Value::Real(r) => {
                if r.is_negative() {
                    write!(f, "-{}/{}", r.numer().abs(), r.denom())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Bool(b) => serializer.serialize_bool(*b),
            Value::Int(i) => match i64::try_from(i) {
                Ok(v) => serializer.serialize_i64(v),
                Err(_) => serializer.serialize_str(&i.to_string()),
            },
            Value::Real(_) => serializer.serialize_str(&self.to_string()),
        }
    }
}

/// Assignment of concrete values to variable names. Ordered by name so
/// that printing and enumeration are deterministic.
pub type Valuation = BTreeMap<String, Value>;

/// One step of a path: the state and the input applied to it.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TraceStep {
    pub state: Valuation,
    pub input: Valuation,
}

/// A valid path through a contract, optionally ending in a deadlock.
///
/// Every consecutive pair satisfies `A` and `G_T`. When `pending_input` is
/// present the final state accepts it under `A`, but the solver found no
/// post-state satisfying `G_T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    pub pending_input: Option<Valuation>,
    pub final_state: Valuation,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// State at position `j` (`0..=len`).
    pub fn state(&self, j: usize) -> &Valuation {
        if j < self.steps.len() {
            &self.steps[j].state
        } else {
            &self.final_state
        }
    }
}
