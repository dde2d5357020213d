//! Concrete evaluation of expressions and contract predicates.
//!
//! Integer `div`/`mod` follow the SMT-LIB2 Ints theory: for a non-zero
//! divisor `b`, `a = b * (a div b) + (a mod b)` with `0 <= a mod b < |b|`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::contract::{ArithOp, CmpOp, Contract, Expr, ExprKind, Valuation, Value, VarTag};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("no value for {tag} variable `{name}`")]
    MissingValuation { name: String, tag: VarTag },
    #[error("ill-sorted expression: {0}")]
    Sort(String),
}

/// The valuations visible to an expression. Absent entries are only an
/// error if the expression actually reads from them.
#[derive(Debug, Clone, Copy, Default)]
pub struct Env<'a> {
    pub pre: Option<&'a Valuation>,
    pub input: Option<&'a Valuation>,
    pub post: Option<&'a Valuation>,
}

impl<'a> Env<'a> {
    pub fn new(
        pre: Option<&'a Valuation>,
        input: Option<&'a Valuation>,
        post: Option<&'a Valuation>,
    ) -> Self {
        Env { pre, input, post }
    }

    fn lookup(&self, name: &str, tag: VarTag) -> Result<&'a Value, EvalError> {
        let source = match tag {
            VarTag::PreState => self.pre,
            VarTag::Input => self.input,
            VarTag::PostState => self.post,
        };
        source
            .and_then(|v| v.get(name))
            .ok_or_else(|| EvalError::MissingValuation {
                name: name.to_string(),
                tag,
            })
    }
}

pub fn eval(e: &Expr, env: &Env<'_>) -> Result<Value, EvalError> {
    match &e.kind {
        ExprKind::BoolLit(b) => Ok(Value::Bool(*b)),
        ExprKind::IntLit(i) => Ok(Value::Int(i.clone())),
        ExprKind::RealLit(r) => Ok(Value::Real(r.clone())),
        ExprKind::Var { name, tag } => env.lookup(name, *tag).cloned(),
        ExprKind::Not(inner) => Ok(Value::Bool(!eval_bool(inner, env)?)),
        ExprKind::And(es) => {
            for c in es {
                if !eval_bool(c, env)? {
                    return Ok(Value::Bool(false));
                }
            }
            Ok(Value::Bool(true))
        }
        ExprKind::Or(es) => {
            for c in es {
                if eval_bool(c, env)? {
                    return Ok(Value::Bool(true));
                }
            }
            Ok(Value::Bool(false))
        }
        ExprKind::Implies(a, b) => Ok(Value::Bool(!eval_bool(a, env)? || eval_bool(b, env)?)),
        ExprKind::Ite(c, t, f) => {
            if eval_bool(c, env)? {
                eval(t, env)
            } else {
                eval(f, env)
            }
        }
        ExprKind::Cmp(op, a, b) => {
            let (a, b) = (eval(a, env)?, eval(b, env)?);
            compare(*op, &a, &b).map(Value::Bool)
        }
        ExprKind::Arith(op, args) => {
            let vals = args
                .iter()
                .map(|a| eval(a, env))
                .collect::<Result<Vec<_>, _>>()?;
            arith(*op, vals)
        }
    }
}

pub fn eval_bool(e: &Expr, env: &Env<'_>) -> Result<bool, EvalError> {
    match eval(e, env)? {
        Value::Bool(b) => Ok(b),
        other => Err(EvalError::Sort(format!("expected bool, got {other}"))),
    }
}

fn compare(op: CmpOp, a: &Value, b: &Value) -> Result<bool, EvalError> {
    use std::cmp::Ordering;
    let ord: Ordering = match (a, b) {
        (Value::Bool(x), Value::Bool(y)) => {
            return match op {
                CmpOp::Eq => Ok(x == y),
                CmpOp::Ne => Ok(x != y),
                _ => Err(EvalError::Sort(format!("`{}` on bool", op.symbol()))),
            }
        }
        (Value::Int(x), Value::Int(y)) => x.cmp(y),
        (Value::Real(x), Value::Real(y)) => x.cmp(y),
        _ => return Err(EvalError::Sort(format!("cannot compare {a} with {b}"))),
    };
    Ok(match op {
        CmpOp::Eq => ord == Ordering::Equal,
        CmpOp::Ne => ord != Ordering::Equal,
        CmpOp::Lt => ord == Ordering::Less,
        CmpOp::Le => ord != Ordering::Greater,
        CmpOp::Gt => ord == Ordering::Greater,
        CmpOp::Ge => ord != Ordering::Less,
    })
}

/// Euclidean quotient and remainder (remainder always non-negative).
pub fn div_mod_euclid(a: &BigInt, b: &BigInt) -> Result<(BigInt, BigInt), EvalError> {
    if b.is_zero() {
        return Err(EvalError::DivisionByZero);
    }
    let r = a.mod_floor(&b.abs());
    let q = (a - &r) / b;
    Ok((q, r))
}

fn arith(op: ArithOp, vals: Vec<Value>) -> Result<Value, EvalError> {
    let all_int = vals.iter().all(|v| matches!(v, Value::Int(_)));
    let all_real = vals.iter().all(|v| matches!(v, Value::Real(_)));
    if vals.is_empty() || !(all_int || all_real) {
        return Err(EvalError::Sort(format!(
            "`{}` needs operands of one numeric sort",
            op.symbol()
        )));
    }
    if all_int {
        let ints: Vec<BigInt> = vals
            .into_iter()
            .map(|v| match v {
                Value::Int(i) => i,
                _ => unreachable!(),
            })
            .collect();
        let out = match op {
            ArithOp::Neg => -&ints[0],
            ArithOp::Add => ints.iter().sum(),
            ArithOp::Mul => ints.iter().product(),
            ArithOp::Sub => fold_sub(ints),
            ArithOp::Div => div_mod_euclid(&ints[0], binary(&ints)?)?.0,
            ArithOp::Mod => div_mod_euclid(&ints[0], binary(&ints)?)?.1,
        };
        Ok(Value::Int(out))
    } else {
        let reals: Vec<BigRational> = vals
            .into_iter()
            .map(|v| match v {
                Value::Real(r) => r,
                _ => unreachable!(),
            })
            .collect();
        let out = match op {
            ArithOp::Neg => -&reals[0],
            ArithOp::Add => reals.iter().fold(BigRational::zero(), |acc, r| acc + r),
            ArithOp::Mul => reals
                .iter()
                .fold(BigRational::from_integer(1.into()), |acc, r| acc * r),
            ArithOp::Sub => fold_sub(reals),
            ArithOp::Div | ArithOp::Mod => {
                return Err(EvalError::Sort(format!("`{}` on real", op.symbol())))
            }
        };
        Ok(Value::Real(out))
    }
}

fn binary(ints: &[BigInt]) -> Result<&BigInt, EvalError> {
    ints.get(1)
        .filter(|_| ints.len() == 2)
        .ok_or_else(|| EvalError::Sort("expected two operands".into()))
}

fn fold_sub<T>(vals: Vec<T>) -> T
where
    T: std::ops::Sub<Output = T> + std::ops::Neg<Output = T>,
{
    let mut it = vals.into_iter();
    let first = it.next().expect("non-empty");
    let mut rest = it.peekable();
    if rest.peek().is_none() {
        return -first;
    }
    rest.fold(first, |acc, v| acc - v)
}

fn conj(es: &[Expr], env: &Env<'_>) -> Result<bool, EvalError> {
    for e in es {
        if !eval_bool(e, env)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `A(s, i)`.
pub fn holds_assumptions(c: &Contract, s: &Valuation, i: &Valuation) -> Result<bool, EvalError> {
    conj(&c.assumptions, &Env::new(Some(s), Some(i), None))
}

/// `G_I(s)`.
pub fn holds_initial(c: &Contract, s: &Valuation) -> Result<bool, EvalError> {
    conj(&c.initial_guarantees, &Env::new(Some(s), None, None))
}

/// `G_T(s, i, s')`.
pub fn holds_transition(
    c: &Contract,
    s: &Valuation,
    i: &Valuation,
    next: &Valuation,
) -> Result<bool, EvalError> {
    conj(
        &c.transitional_guarantees,
        &Env::new(Some(s), Some(i), Some(next)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contract::{Sort, VarDecl};

    fn val(pairs: &[(&str, i64)]) -> Valuation {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), Value::int(*v)))
            .collect()
    }

    fn doubler() -> Contract {
        let mut c = Contract::new("doubler");
        c.inputs.push(VarDecl::new("in", Sort::Int));
        c.states.push(VarDecl::new("out", Sort::Int));
        c.initial_guarantees.push(Expr::bool(true));
        c.transitional_guarantees.push(Expr::eq(
            Expr::post("out"),
            Expr::arith(ArithOp::Mul, vec![Expr::int(2), Expr::input("in")]),
        ));
        c.transitional_guarantees
            .push(Expr::cmp(CmpOp::Ge, Expr::post("out"), Expr::int(0)));
        c
    }

    #[test]
    fn doubling_guarantee() {
        let e = Expr::eq(
            Expr::post("out"),
            Expr::arith(ArithOp::Mul, vec![Expr::int(2), Expr::input("in")]),
        );
        let (pre, inp, post) = (val(&[]), val(&[("in", 3)]), val(&[("out", 6)]));
        let env = Env::new(Some(&pre), Some(&inp), Some(&post));
        assert_eq!(eval(&e, &env), Ok(Value::Bool(true)));
    }

    #[test]
    fn negative_output_fails_bound() {
        let e = Expr::cmp(CmpOp::Ge, Expr::post("out"), Expr::int(0));
        let post = val(&[("out", -2)]);
        assert_eq!(
            eval(&e, &Env::new(None, None, Some(&post))),
            Ok(Value::Bool(false))
        );
    }

    #[test]
    fn literal_true_needs_nothing() {
        assert_eq!(eval(&Expr::bool(true), &Env::default()), Ok(Value::Bool(true)));
    }

    #[test]
    fn doubler_transition_predicate() {
        let c = doubler();
        let s = val(&[("out", 0)]);
        assert!(!holds_transition(&c, &s, &val(&[("in", -1)]), &val(&[("out", -2)])).unwrap());
        assert!(holds_transition(&c, &s, &val(&[("in", 2)]), &val(&[("out", 4)])).unwrap());
        // no assumptions: any state/input pair is admissible
        assert!(holds_assumptions(&c, &s, &val(&[("in", -7)])).unwrap());
        assert!(holds_initial(&c, &s).unwrap());
    }

    #[test]
    fn missing_valuation_is_reported() {
        let e = Expr::cmp(CmpOp::Ge, Expr::post("out"), Expr::int(0));
        assert_eq!(
            eval(&e, &Env::default()),
            Err(EvalError::MissingValuation {
                name: "out".into(),
                tag: VarTag::PostState
            })
        );
    }

    #[test]
    fn euclidean_division() {
        let cases = [(7, 2, 3, 1), (-7, 2, -4, 1), (7, -2, -3, 1), (-7, -2, 4, 1), (6, 3, 2, 0)];
        for (a, b, q, r) in cases {
            let (gq, gr) = div_mod_euclid(&a.into(), &b.into()).unwrap();
            assert_eq!((gq, gr), (q.into(), r.into()), "{a} div/mod {b}");
        }
        assert_eq!(
            div_mod_euclid(&1.into(), &0.into()),
            Err(EvalError::DivisionByZero)
        );
    }

    #[test]
    fn div_expression_and_zero_divisor() {
        let pre = val(&[("x", -3)]);
        let env = Env::new(Some(&pre), None, None);
        let d = Expr::arith(ArithOp::Div, vec![Expr::pre("x"), Expr::int(2)]);
        assert_eq!(eval(&d, &env), Ok(Value::int(-2)));
        let m = Expr::arith(ArithOp::Mod, vec![Expr::pre("x"), Expr::int(2)]);
        assert_eq!(eval(&m, &env), Ok(Value::int(1)));
        let z = Expr::arith(ArithOp::Div, vec![Expr::pre("x"), Expr::int(0)]);
        assert_eq!(eval(&z, &env), Err(EvalError::DivisionByZero));
    }

    #[test]
    fn real_arithmetic() {
        let e = Expr::arith(
            ArithOp::Sub,
            vec![Expr::real(1, 2), Expr::real(1, 3), Expr::real(1, 6)],
        );
        assert_eq!(
            eval(&e, &Env::default()),
            Ok(Value::Real(BigRational::zero()))
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn leaf() -> impl Strategy<Value = Expr> {
            prop_oneof![
                any::<bool>().prop_map(Expr::bool),
                (0..3usize, -2i64..=2).prop_map(|(v, k)| {
                    let name = ["a", "b", "c"][v];
                    Expr::cmp(CmpOp::Le, Expr::pre(name), Expr::int(k))
                }),
            ]
        }

        fn bool_expr() -> impl Strategy<Value = Expr> {
            leaf().prop_recursive(4, 24, 3, |inner| {
                prop_oneof![
                    inner.clone().prop_map(Expr::not),
                    prop::collection::vec(inner.clone(), 0..4).prop_map(Expr::and),
                    prop::collection::vec(inner.clone(), 0..4).prop_map(Expr::or),
                    (inner.clone(), inner).prop_map(|(a, b)| Expr::implies(a, b)),
                ]
            })
        }

        proptest! {
            #[test]
            fn connectives_follow_truth_tables(
                es in prop::collection::vec(bool_expr(), 0..4),
                a in -3i64..=3, b in -3i64..=3, c in -3i64..=3,
            ) {
                let pre = val(&[("a", a), ("b", b), ("c", c)]);
                let env = Env::new(Some(&pre), None, None);
                let vals: Vec<bool> = es.iter().map(|e| eval_bool(e, &env).unwrap()).collect();
                for (e, v) in es.iter().zip(&vals) {
                    prop_assert_eq!(eval_bool(&Expr::not(e.clone()), &env).unwrap(), !v);
                }
                prop_assert_eq!(eval_bool(&Expr::and(es.clone()), &env).unwrap(), vals.iter().all(|v| *v));
                prop_assert_eq!(eval_bool(&Expr::or(es.clone()), &env).unwrap(), vals.iter().any(|v| *v));
                if es.len() >= 2 {
                    let imp = Expr::implies(es[0].clone(), es[1].clone());
                    prop_assert_eq!(eval_bool(&imp, &env).unwrap(), !vals[0] || vals[1]);
                }
            }

            #[test]
            fn euclid_identity(a in -50i64..50, b in -9i64..9) {
                prop_assume!(b != 0);
                let (q, r) = div_mod_euclid(&a.into(), &b.into()).unwrap();
                prop_assert!(r >= BigInt::zero() && r < BigInt::from(b.abs()));
                prop_assert_eq!(BigInt::from(b) * q + r, BigInt::from(a));
            }
        }
    }
}
