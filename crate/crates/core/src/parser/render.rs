use std::fmt::Write;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::{int_is_negative, real_is_negative};
use crate::contract::{ArithOp, Contract, Expr, ExprKind, Section, VarDecl, VarTag};

/// Pretty-prints a contract in the `.ctr` syntax. Empty predicate sections
/// are written as `true;`, so a reparse yields the normalized contract.
pub fn render_contract(c: &Contract) -> String {
    let mut out = String::new();
    writeln!(out, "contract {}", c.name).unwrap();
    render_decls(&mut out, "inputs", &c.inputs);
    render_decls(&mut out, "state", &c.states);
    for section in [Section::Assumptions, Section::Initial, Section::Transitions] {
        let es = c.section(section);
        write!(out, "  {}:", section.keyword()).unwrap();
        if es.is_empty() {
            out.push_str(" true;");
        }
        for e in es {
            write!(out, " {};", render_expr(e)).unwrap();
        }
        out.push('\n');
    }
    out.push_str("end\n");
    out
}

fn render_decls(out: &mut String, header: &str, decls: &[VarDecl]) {
    write!(out, "  {header}:").unwrap();
    for d in decls {
        write!(out, " {} : {};", d.name, d.sort).unwrap();
    }
    out.push('\n');
}

pub fn render_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, 0);
    out
}

// Binding strength, weakest first. Atoms are 9.
fn prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Ite(..) => 0,
        ExprKind::Implies(..) => 1,
        ExprKind::Or(es) if es.len() >= 2 => 2,
        ExprKind::And(es) if es.len() >= 2 => 3,
        ExprKind::Or(_) | ExprKind::And(_) => 0,
        ExprKind::Not(_) => 4,
        ExprKind::Cmp(..) => 5,
        ExprKind::Arith(ArithOp::Add | ArithOp::Sub, _) => 6,
        ExprKind::Arith(ArithOp::Mul | ArithOp::Div | ArithOp::Mod, _) => 7,
        ExprKind::Arith(ArithOp::Neg, _) => 8,
        _ => 9,
    }
}

fn write_expr(out: &mut String, e: &Expr, min: u8) {
    let p = prec(e);
    let paren = p < min || (p == 0 && min > 0);
    if paren {
        out.push('(');
    }
    match &e.kind {
        ExprKind::BoolLit(b) => out.push_str(if *b { "true" } else { "false" }),
        ExprKind::IntLit(i) => {
            if int_is_negative(i) {
                write!(out, "({i})").unwrap();
            } else {
                write!(out, "{i}").unwrap();
            }
        }
        ExprKind::RealLit(r) => {
            if real_is_negative(r) {
                write!(out, "(-{})", decimal_text(&-r.clone())).unwrap();
            } else {
                out.push_str(&decimal_text(r));
            }
        }
        ExprKind::Var { name, tag } => {
            out.push_str(name);
            if *tag == VarTag::PostState {
                out.push('\'');
            }
        }
        ExprKind::Not(inner) => {
            out.push_str("not ");
            write_expr(out, inner, 4);
        }
        ExprKind::And(es) | ExprKind::Or(es) if es.len() < 2 => {
            // Degenerate n-ary forms have no direct syntax.
            let is_and = matches!(e.kind, ExprKind::And(_));
            match es.first() {
                None => out.push_str(if is_and { "true" } else { "false" }),
                Some(only) => write_expr(out, only, 0),
            }
        }
        ExprKind::And(es) => join(out, es, " and ", 4),
        ExprKind::Or(es) => join(out, es, " or ", 3),
        ExprKind::Implies(a, b) => {
            write_expr(out, a, 2);
            out.push_str(" => ");
            write_expr(out, b, 1);
        }
        ExprKind::Ite(c, t, f) => {
            out.push_str("if ");
            write_expr(out, c, 0);
            out.push_str(" then ");
            write_expr(out, t, 0);
            out.push_str(" else ");
            write_expr(out, f, 0);
        }
        ExprKind::Cmp(op, a, b) => {
            write_expr(out, a, 6);
            write!(out, " {} ", op.symbol()).unwrap();
            write_expr(out, b, 6);
        }
        ExprKind::Arith(ArithOp::Neg, args) => {
            out.push('-');
            let inner = &args[0];
            let bare_literal = matches!(
                &inner.kind,
                ExprKind::IntLit(i) if !int_is_negative(i)
            ) || matches!(&inner.kind, ExprKind::RealLit(r) if !real_is_negative(r));
            if bare_literal || prec(inner) < 9 {
                out.push('(');
                write_expr(out, inner, 0);
                out.push(')');
            } else {
                write_expr(out, inner, 9);
            }
        }
        ExprKind::Arith(op, args) => {
            let child = if matches!(op, ArithOp::Add | ArithOp::Sub) { 7 } else { 8 };
            join(out, args, &format!(" {} ", op.symbol()), child);
        }
    }
    if paren {
        out.push(')');
    }
}

fn join(out: &mut String, es: &[Expr], sep: &str, child_min: u8) {
    for (i, e) in es.iter().enumerate() {
        if i > 0 {
            out.push_str(sep);
        }
        write_expr(out, e, child_min);
    }
}

/// Decimal spelling of a non-negative rational. Exact when the denominator
/// has only factors 2 and 5; otherwise truncated to 30 fractional digits.
fn decimal_text(r: &BigRational) -> String {
    let (numer, denom) = (r.numer().abs(), r.denom().clone());
    let (int_part, mut rem) = numer.div_rem(&denom);
    let mut frac = String::new();
    let ten = BigInt::from(10);
    while !rem.is_zero() && frac.len() < 30 {
        rem *= &ten;
        let (d, r2) = rem.div_rem(&denom);
        frac.push_str(&d.to_string());
        rem = r2;
    }
    if frac.is_empty() {
        frac.push('0');
    }
    format!("{int_part}.{frac}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contract::{CmpOp, Sort};
    use crate::parser::{parse_contract, parse_expr};

    #[test]
    fn doubler_round_trip() {
        let text = "contract doubler
  inputs:  in : int;
  state:   out : int;
  assumptions:
  initial:     true;
  transitions: out' = 2 * in; out' >= 0;
end
";
        let c = parse_contract(text).unwrap();
        let rendered = render_contract(&c);
        assert!(rendered.contains("assumptions: true;"));
        let back = parse_contract(&rendered).unwrap();
        assert!(back.same_structure(&c));
        assert_eq!(back.assumptions, vec![Expr::bool(true)]);
    }

    #[test]
    fn ite_renders_with_keywords() {
        let e = Expr::eq(
            Expr::post("x"),
            Expr::ite(Expr::pre("b"), Expr::int(1), Expr::int(-1)),
        );
        let s = render_expr(&e);
        assert_eq!(s, "x' = (if b then 1 else (-1))");
        assert_eq!(parse_expr(&s).unwrap(), e);
    }

    #[test]
    fn nested_structure_is_parenthesised() {
        let e = Expr::and(vec![
            Expr::and(vec![Expr::pre("a"), Expr::pre("b")]),
            Expr::not(Expr::or(vec![Expr::pre("c"), Expr::pre("d")])),
            Expr::cmp(
                CmpOp::Eq,
                Expr::cmp(CmpOp::Lt, Expr::pre("x"), Expr::int(1)),
                Expr::pre("e"),
            ),
        ]);
        let s = render_expr(&e);
        assert_eq!(s, "(a and b) and not (c or d) and (x < 1) = e");
        assert_eq!(parse_expr(&s).unwrap(), e);
    }

    #[test]
    fn negations_round_trip() {
        for e in [
            Expr::arith(ArithOp::Neg, vec![Expr::int(3)]),
            Expr::arith(ArithOp::Neg, vec![Expr::int(-3)]),
            Expr::arith(ArithOp::Neg, vec![Expr::arith(ArithOp::Neg, vec![Expr::pre("x")])]),
            Expr::arith(ArithOp::Sub, vec![Expr::pre("x"), Expr::int(-2)]),
            Expr::arith(ArithOp::Sub, vec![Expr::pre("x"), Expr::real(-5, 2)]),
        ] {
            let s = render_expr(&e);
            assert!(!s.contains("--"), "{s}");
            assert_eq!(parse_expr(&s).unwrap(), e, "{s}");
        }
    }

    #[test]
    fn decimals() {
        assert_eq!(decimal_text(&BigRational::new(5.into(), 4.into())), "1.25");
        assert_eq!(decimal_text(&BigRational::from_integer(3.into())), "3.0");
    }

    #[test]
    fn empty_declaration_sections_render() {
        let mut c = Contract::new("c");
        c.states.push(VarDecl::new("x", Sort::Bool));
        let s = render_contract(&c);
        assert!(s.contains("  inputs:\n"));
        assert!(parse_contract(&s).unwrap().same_structure(&c));
    }
}
